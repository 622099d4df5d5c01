"""Exact arithmetic in F_{p^f}, truncated W(F_{p^f}), and totally ramified
chain rings O/(pi^n) cut out by Eisenstein polynomials.

Representation choices:

* W(F_{p^f}) mod p^N is the unramified extension (Z/p^N)[x]/(m(x)) for a
  monic lift m of the residue-field modulus.  A scalar is an f-vector of
  integers mod p^N; reading each coordinate in base p recovers the digit
  layers, which is also the JSON serialization.
* O/(pi^n) for O = W[X]/(g), g Eisenstein of degree e, stores the e-vector
  of W-coordinates in the basis 1, pi, ..., pi^(e-1).  Coordinate i of the
  canonical form is reduced mod p^ceil((n-i)/e); two coordinate vectors
  represent the same element of O/(pi^n) iff their canonical forms agree,
  so zero (and hence valuation infinity) is decidable in the quotient.
* Valuations are Fraction instances normalized by val(p) = 1, val(pi) = 1/e,
  never floats.  val(x) is VAL_INF exactly when x = 0 in the truncation.

All values are immutable; ring handles are shareable for concurrent reads.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import (
    ConfigError,
    NotAUnit,
    NotEisenstein,
    NotIrreducible,
    PrecisionExhausted,
    ZeroInput,
)

VAL_INF = float("inf")


# --- dense polynomial helpers over F_p (residue-field plumbing) ---


def _poly_trim(a):
    while a and a[-1] == 0:
        a = a[:-1]
    return a


def _poly_mul_mod_p(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _poly_trim(out)


def _poly_divmod_mod_p(a, b, p):
    a = [c % p for c in a]
    b = _poly_trim([c % p for c in b])
    db = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    q = [0] * max(1, len(a) - db)
    r = list(a)
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i] % p
        if c:
            qc = (c * inv_lead) % p
            q[i - db] = qc
            for j in range(db + 1):
                r[i - db + j] = (r[i - db + j] - qc * b[j]) % p
    return _poly_trim(q), _poly_trim(r[:db])


def _poly_powmod_mod_p(a, k, m, p):
    result = [1]
    base = _poly_divmod_mod_p(a, m, p)[1]
    while k:
        if k & 1:
            result = _poly_divmod_mod_p(_poly_mul_mod_p(result, base, p), m, p)[1]
        base = _poly_divmod_mod_p(_poly_mul_mod_p(base, base, p), m, p)[1]
        k >>= 1
    return result


def _poly_gcd_mod_p(a, b, p):
    a, b = _poly_trim([c % p for c in a]), _poly_trim([c % p for c in b])
    while b:
        a, b = b, _poly_divmod_mod_p(a, b, p)[1]
    return a


def _poly_sub_mod_p(a, b, p):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c % p
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return _poly_trim(out)


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for d in small:
        if m % d == 0:
            return m == d
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:  # deterministic below 3.3e24
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def _irreducible_mod_p(modulus, p) -> bool:
    """Rabin irreducibility: x^(p^f) = x mod m, gcd(x^(p^(f/l)) - x, m) = 1."""
    f = len(modulus) - 1
    x = [0, 1]
    frob = _poly_powmod_mod_p(x, p**f, modulus, p)
    if _poly_sub_mod_p(frob, x, p):
        return False
    for ell in range(2, f + 1):
        if f % ell or not is_prime(ell):
            continue
        sub = _poly_powmod_mod_p(x, p ** (f // ell), modulus, p)
        diff = _poly_sub_mod_p(sub, x, p)
        if not diff or len(_poly_gcd_mod_p(diff, modulus, p)) > 1:
            return False
    return True


class PrimeFieldSpec:
    """F_{p^f} described by an odd prime p and a monic irreducible modulus.

    ``modulus`` lists coefficients ascending, length f+1, monic.  No canonical
    modulus is forced; ``default_modulus`` supplies the lexicographically
    least monic irreducible for convenience.
    """

    def __init__(self, p: int, f: int = 1, modulus=None):
        if not is_prime(p) or p < 3:
            raise ConfigError(f"p must be an odd prime, got {p}")
        if f < 1:
            raise ConfigError(f"f must be >= 1, got {f}")
        if modulus is None:
            modulus = self.default_modulus(p, f)
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != f + 1 or modulus[-1] != 1:
            raise ConfigError("modulus must be monic of degree f")
        if f > 1 and not _irreducible_mod_p(list(modulus), p):
            raise NotIrreducible(f"modulus {modulus} is reducible mod {p}")
        self.p = p
        self.f = f
        self.modulus = modulus
        self.q = p**f

    @staticmethod
    def default_modulus(p: int, f: int):
        if f == 1:
            return (0, 1)
        for tail in range(p**f):
            coeffs, t = [], tail
            for _ in range(f):
                coeffs.append(t % p)
                t //= p
            cand = coeffs + [1]
            if _irreducible_mod_p(cand, p):
                return tuple(cand)
        raise NotIrreducible(f"no irreducible of degree {f} over F_{p}?")

    def __eq__(self, other):
        return (
            isinstance(other, PrimeFieldSpec)
            and (self.p, self.f, self.modulus) == (other.p, other.f, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.f, self.modulus))

    def __repr__(self):
        return f"PrimeFieldSpec(p={self.p}, f={self.f}, modulus={list(self.modulus)})"


class WittRing:
    """W(F_{p^f}) truncated at absolute precision N: (Z/p^N)[x]/(m(x))."""

    def __init__(self, spec: PrimeFieldSpec, precision: int):
        if precision < 1:
            raise PrecisionExhausted("WittRing precision must be >= 1")
        self.spec = spec
        self.precision = precision
        self.p = spec.p
        self.f = spec.f
        self.pN = spec.p**precision
        self.modulus_lift = tuple(int(c) for c in spec.modulus)

    def scalar(self, value, precision: int | None = None) -> "WittScalar":
        prec = self.precision if precision is None else precision
        if isinstance(value, WittScalar):
            if value.ring.spec != self.spec:
                raise ConfigError("scalar from a different residue field")
            prec = min(prec, value.precision)
            pk = self.p**prec
            return WittScalar(self, tuple(c % pk for c in value.coeffs), prec)
        if isinstance(value, int):
            coeffs = (value,) + (0,) * (self.f - 1)
        else:
            coeffs = tuple(value)
            if len(coeffs) != self.f:
                raise ConfigError(f"need {self.f} coordinates, got {len(coeffs)}")
        pk = self.p**prec
        return WittScalar(self, tuple(int(c) % pk for c in coeffs), prec)

    def zero(self, precision=None):
        return self.scalar(0, precision)

    def one(self, precision=None):
        return self.scalar(1, precision)

    def teichmuller(self, residue_coeffs) -> "WittScalar":
        """The unique (p^f - 1)-st root of unity lifting a nonzero residue."""
        if isinstance(residue_coeffs, int):
            residue_coeffs = (residue_coeffs,) + (0,) * (self.f - 1)
        x = self.scalar(tuple(residue_coeffs))
        if x.val() != 0:
            raise ZeroInput("teichmuller lift needs a nonzero residue")
        q = self.spec.q
        for _ in range(self.precision - 1):
            x = x**q
        return x

    def with_precision(self, precision: int) -> "WittRing":
        if precision == self.precision:
            return self
        return WittRing(self.spec, precision)

    def __eq__(self, other):
        return (
            isinstance(other, WittRing)
            and self.spec == other.spec
            and self.precision == other.precision
        )

    def __hash__(self):
        return hash((self.spec, self.precision))

    def __repr__(self):
        return f"WittRing(p={self.p}, f={self.f}, precision={self.precision})"


class WittScalar:
    """Element of W(F_{p^f}) known mod p^precision.  Immutable."""

    __slots__ = ("ring", "coeffs", "precision")

    def __init__(self, ring: WittRing, coeffs, precision: int):
        if precision < 1:
            raise PrecisionExhausted("scalar precision fell below 1")
        self.ring = ring
        self.coeffs = tuple(coeffs)
        self.precision = precision

    # -- structure --

    def reduce(self, precision: int) -> "WittScalar":
        if precision > self.precision:
            raise PrecisionExhausted(
                f"cannot lift precision {self.precision} -> {precision}"
            )
        if precision == self.precision:
            return self
        pk = self.ring.p**precision
        return WittScalar(self.ring, tuple(c % pk for c in self.coeffs), precision)

    def lift_representative(self, precision: int) -> "WittScalar":
        """The same integer coordinates viewed at a higher precision.

        Only valid when the caller knows the representative is exact (e.g.
        canonical coordinates of a quotient-ring element).
        """
        if precision < self.precision:
            return self.reduce(precision)
        return WittScalar(self.ring, self.coeffs, precision)

    def val(self):
        """p-adic valuation as an int, or VAL_INF when zero mod p^precision."""
        best = None
        p = self.ring.p
        for c in self.coeffs:
            if c:
                v = 0
                while c % p == 0:
                    c //= p
                    v += 1
                if v == 0:
                    return 0
                best = v if best is None else min(best, v)
        return VAL_INF if best is None else best

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_unit(self):
        return self.val() == 0

    def residue(self):
        """Image in F_{p^f} as a coefficient tuple mod p."""
        p = self.ring.p
        return tuple(c % p for c in self.coeffs)

    # -- arithmetic --

    def _align(self, other):
        if isinstance(other, int):
            other = self.ring.scalar(other, self.precision)
        if other.ring.spec != self.ring.spec:
            raise ConfigError("mixed residue-field specs")
        prec = min(self.precision, other.precision)
        return self.reduce(prec), other.reduce(prec), prec

    def __add__(self, other):
        a, b, prec = self._align(other)
        pk = self.ring.p**prec
        return WittScalar(
            self.ring, tuple((x + y) % pk for x, y in zip(a.coeffs, b.coeffs)), prec
        )

    __radd__ = __add__

    def __neg__(self):
        pk = self.ring.p**self.precision
        return WittScalar(
            self.ring, tuple((-c) % pk for c in self.coeffs), self.precision
        )

    def __sub__(self, other):
        a, b, prec = self._align(other)
        pk = self.ring.p**prec
        return WittScalar(
            self.ring, tuple((x - y) % pk for x, y in zip(a.coeffs, b.coeffs)), prec
        )

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b, prec = self._align(other)
        pk = self.ring.p**prec
        f = self.ring.f
        if f == 1:
            return WittScalar(self.ring, ((a.coeffs[0] * b.coeffs[0]) % pk,), prec)
        prod = [0] * (2 * f - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    prod[i + j] = (prod[i + j] + x * y) % pk
        m = self.ring.modulus_lift
        for i in range(2 * f - 2, f - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(f):
                    prod[i - f + j] = (prod[i - f + j] - c * m[j]) % pk
        return WittScalar(self.ring, tuple(prod[:f]), prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = WittScalar(self.ring, (1,) + (0,) * (self.ring.f - 1), self.precision)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "WittScalar":
        if not self.is_unit():
            raise NotAUnit(f"{self!r} is not a unit")
        p, f = self.ring.p, self.ring.f
        if f == 1:
            z = WittScalar(self.ring, (pow(self.coeffs[0] % p, -1, p),), self.precision)
        else:
            # residue inverse by extended Euclid over F_p[x]
            a = _poly_trim(list(self.residue()))
            m = list(self.ring.spec.modulus)
            r0, r1 = m, a
            s0, s1 = [], [1]
            while len(r1) > 1:
                q, r = _poly_divmod_mod_p(r0, r1, p)
                s_new = _poly_sub_mod_p(s0, _poly_mul_mod_p(q, s1, p), p)
                r0, r1 = r1, r
                s0, s1 = s1, s_new
            if not r1:
                raise NotAUnit("residue is a zero divisor")
            c_inv = pow(r1[0], -1, p)
            inv_res = [(c * c_inv) % p for c in s1] + [0] * f
            z = WittScalar(self.ring, tuple(inv_res[:f]), self.precision)
        two = self.ring.scalar(2, self.precision)
        for _ in range(max(1, math.ceil(math.log2(self.precision))) + 1):
            z = z * (two - self * z)
        if not (self * z - self.ring.one(self.precision)).is_zero():
            raise NotAUnit("inverse iteration failed")
        return z

    def divide_by_p(self, k: int = 1) -> "WittScalar":
        """Exact division by p^k; drops absolute precision by k, never silently."""
        pk = self.ring.p**k
        if any(c % pk for c in self.coeffs):
            raise ZeroInput(f"not divisible by p^{k}")
        if self.precision - k < 1:
            raise PrecisionExhausted(
                f"dividing by p^{k} needs precision > {k}, have {self.precision}"
            )
        return WittScalar(
            self.ring, tuple(c // pk for c in self.coeffs), self.precision - k
        )

    # -- serialization --

    def to_digits(self):
        """Coordinate vector of base-p digit arrays (JSON form)."""
        p = self.ring.p
        out = []
        for c in self.coeffs:
            digits = []
            for _ in range(self.precision):
                digits.append(c % p)
                c //= p
            out.append(digits)
        return out

    @staticmethod
    def from_digits(ring: WittRing, digit_arrays, precision: int | None = None):
        prec = precision if precision is not None else len(digit_arrays[0])
        coeffs = []
        for digits in digit_arrays:
            c = 0
            for d in reversed(list(digits)[:prec]):
                c = c * ring.p + d
            coeffs.append(c)
        return ring.scalar(coeffs, prec)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.scalar(other, self.precision)
        if not isinstance(other, WittScalar):
            return NotImplemented
        a, b, _ = self._align(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash((self.ring.spec, self.precision, self.coeffs))

    def __repr__(self):
        if self.ring.f == 1:
            return f"{self.coeffs[0]}(mod {self.ring.p}^{self.precision})"
        return f"{list(self.coeffs)}(mod {self.ring.p}^{self.precision})"


class EisensteinPoly:
    """Monic degree-e polynomial over W, Eisenstein at p.

    Constant term has valuation exactly 1, every other non-leading coefficient
    valuation >= 1; defines O = W[X]/(g) totally ramified with uniformiser pi
    the class of X.
    """

    def __init__(self, ring: WittRing, coeffs):
        coeffs = tuple(ring.scalar(c) for c in coeffs)
        if len(coeffs) < 2:
            raise NotEisenstein("degree must be >= 1")
        if not (coeffs[-1] - 1).is_zero():
            raise NotEisenstein("not monic")
        for c in coeffs[1:-1]:
            if c.val() < 1:
                raise NotEisenstein(f"coefficient {c!r} is a unit")
        if coeffs[0].val() != 1:
            raise NotEisenstein(f"constant term valuation {coeffs[0].val()} != 1")
        self.ring = ring
        self.coeffs = coeffs
        self.e = len(coeffs) - 1

    def derivative_coeffs(self):
        return tuple(
            self.ring.scalar(i) * c for i, c in enumerate(self.coeffs) if i >= 1
        )

    def __repr__(self):
        return f"EisensteinPoly(e={self.e})"


def make_extension(spec: PrimeFieldSpec, g: EisensteinPoly, n: int) -> "ChainRing":
    """Ring handle for O/(pi^n), O = W(F_{p^f})[X]/(g)."""
    return ChainRing(spec, g, n)


class ChainRing:
    """O/(pi^n) with canonical coordinates and normalized valuations."""

    def __init__(self, spec: PrimeFieldSpec, g: EisensteinPoly, n: int):
        if n < 1:
            raise ConfigError("level must be >= 1")
        if g.ring.spec != spec:
            raise ConfigError("Eisenstein polynomial over the wrong W")
        self.spec = spec
        self.e = g.e
        self.level = n
        self.work_precision = -(-n // self.e)  # ceil(n/e)
        if g.ring.precision < self.work_precision:
            raise PrecisionExhausted(
                f"need WittScalar precision >= {self.work_precision}, "
                f"have {g.ring.precision}"
            )
        self.witt = g.ring.with_precision(self.work_precision)
        # reduced coefficients are NOT re-validated: at work precision 1 the
        # Eisenstein shape of g_0 is invisible (and irrelevant: pi^e = 0 there)
        self.g_coeffs = tuple(self.witt.scalar(c) for c in g.coeffs)
        self.g = g  # original, at its full precision
        # coordinate i of a canonical element is reduced mod p^caps[i]
        self.caps = tuple(max(0, -(-(n - i) // self.e)) for i in range(self.e))
        self.size = spec.q**n

    # -- element constructors --

    def element(self, coords) -> "ChainRingElem":
        coords = tuple(self.witt.scalar(c) for c in coords)
        if len(coords) != self.e:
            raise ConfigError(f"need {self.e} coordinates")
        return ChainRingElem(self, self._canonical(coords))

    def from_witt(self, w) -> "ChainRingElem":
        return self.element((w,) + (0,) * (self.e - 1))

    def from_int(self, k: int) -> "ChainRingElem":
        return self.from_witt(self.witt.scalar(k))

    def zero(self):
        return self.from_int(0)

    def one(self):
        return self.from_int(1)

    def pi(self):
        if self.e == 1:
            return self.from_witt(-self.g_coeffs[0])
        return self.element((0, 1) + (0,) * (self.e - 2))

    def _canonical(self, coords):
        out = []
        for i, c in enumerate(coords):
            cap = self.caps[i]
            if cap == 0:
                out.append(self.witt.zero())
                continue
            if c.precision < cap:
                raise PrecisionExhausted(
                    f"coordinate {i} needs {cap} digits, has {c.precision}"
                )
            canon = c.reduce(cap)
            out.append(canon.lift_representative(self.work_precision))
        return tuple(out)

    # -- ring ops --

    def _add(self, a, b):
        return ChainRingElem(self, self._canonical(tuple(x + y for x, y in zip(a, b))))

    def _neg(self, a):
        return ChainRingElem(self, self._canonical(tuple(-x for x in a)))

    def _mul(self, a, b):
        e = self.e
        zero = self.witt.zero()
        prod = [zero] * (2 * e - 1)
        for i, x in enumerate(a):
            if not x.is_zero():
                for j, y in enumerate(b):
                    prod[i + j] = prod[i + j] + x * y
        # reduce pi^k, k >= e, via pi^e = -(g_0 + ... + g_{e-1} pi^{e-1})
        for k in range(2 * e - 2, e - 1, -1):
            c = prod[k]
            if not c.is_zero():
                prod[k] = zero
                for j in range(e):
                    prod[k - e + j] = prod[k - e + j] - c * self.g_coeffs[j]
        return ChainRingElem(self, self._canonical(tuple(prod[:e])))

    def reduce_ring(self, m: int) -> "ChainRing":
        if m > self.level:
            raise ConfigError(f"cannot reduce level {self.level} -> {m}")
        if m == self.level:
            return self
        return ChainRing(self.spec, self.g, m)

    def evaluate(self, witt_coeffs, x: "ChainRingElem") -> "ChainRingElem":
        """Horner evaluation at x of a polynomial with W coefficients."""
        acc = self.zero()
        for c in reversed(list(witt_coeffs)):
            acc = acc * x + self.from_witt(self.witt.scalar(c))
        return acc

    def enumerate_elements(self):
        """All canonical elements (size q^n); desk scale only."""
        p, f = self.spec.p, self.spec.f
        ranges = []
        for cap in self.caps:
            ranges.append(p ** (f * cap) if cap > 0 else 1)
        total = 1
        for r in ranges:
            total *= r
        for idx in range(total):
            coords, t = [], idx
            for i, r in enumerate(ranges):
                u = t % r
                t //= r
                cap = self.caps[i]
                if cap == 0:
                    coords.append(self.witt.zero())
                else:
                    pk = p**cap
                    cs = []
                    for _ in range(f):
                        cs.append(u % pk)
                        u //= pk
                    coords.append(self.witt.scalar(cs))
            yield self.element(coords)

    def __eq__(self, other):
        return (
            isinstance(other, ChainRing)
            and self.spec == other.spec
            and self.level == other.level
            and self.e == other.e
            and all(x == y for x, y in zip(self.g_coeffs, other.g_coeffs))
        )

    def __hash__(self):
        return hash((self.spec, self.level, tuple(c.coeffs for c in self.g_coeffs)))

    def __repr__(self):
        return (
            f"ChainRing(p={self.spec.p}, f={self.spec.f}, e={self.e}, "
            f"level={self.level})"
        )


class ChainRingElem:
    """Element of O/(pi^n), canonical coordinates, immutable."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: ChainRing, coords):
        self.ring = ring
        self.coords = coords

    def _coerce(self, other):
        if isinstance(other, int):
            return self.ring.from_int(other)
        if isinstance(other, WittScalar):
            return self.ring.from_witt(self.ring.witt.scalar(other))
        if not isinstance(other, ChainRingElem):
            raise ConfigError(f"cannot coerce {other!r}")
        if other.ring != self.ring:
            if other.ring.spec == self.ring.spec and other.ring.level >= self.ring.level:
                return other.reduce_level(self.ring.level)
            raise ConfigError("elements of different chain rings")
        return other

    def _pair(self, other):
        other = self._coerce(other)
        if other.ring.level < self.ring.level:
            return self.reduce_level(other.ring.level), other
        return self, other

    def __add__(self, other):
        a, b = self._pair(other)
        return a.ring._add(a.coords, b.coords)

    __radd__ = __add__

    def __neg__(self):
        return self.ring._neg(self.coords)

    def __sub__(self, other):
        a, b = self._pair(other)
        return a.ring._add(a.coords, a.ring._neg(b.coords).coords)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._pair(other)
        return a.ring._mul(a.coords, b.coords)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def val(self):
        """Normalized valuation in (1/e)Z; VAL_INF iff zero in O/(pi^n)."""
        e = self.ring.e
        best = VAL_INF
        for i, c in enumerate(self.coords):
            if self.ring.caps[i] == 0:
                continue
            v = c.reduce(self.ring.caps[i]).val()
            if v is not VAL_INF:
                cand = Fraction(int(v) * e + i, e)
                if cand < best:
                    best = cand
        return best

    def is_zero(self):
        return self.val() is VAL_INF

    def is_unit(self):
        return self.val() == 0

    def residue(self):
        return self.coords[0].residue()

    def inverse(self) -> "ChainRingElem":
        if not self.is_unit():
            raise NotAUnit(f"val = {self.val()} != 0")
        ring = self.ring
        res = ring.witt.scalar(self.residue(), 1)
        z0 = res.inverse()  # residue inverse in F_q
        z = ring.from_witt(ring.witt.scalar(z0.coeffs, ring.work_precision))
        two = ring.from_int(2)
        for _ in range(max(1, math.ceil(math.log2(ring.level))) + 2):
            z = z * (two - self * z)
        if not (self * z - 1).is_zero():
            raise NotAUnit("inverse iteration failed to converge")
        return z

    def shift_down(self) -> "ChainRingElem":
        """Exact x/pi as an element of O/(pi^(n-1)); requires val(x) >= 1/e."""
        ring = self.ring
        if ring.level - 1 < 1:
            raise PrecisionExhausted("cannot divide by pi at level 1")
        target = ring.reduce_ring(ring.level - 1)
        if self.is_zero():
            return target.zero()
        if self.val() < Fraction(1, ring.e):
            raise ZeroInput("not divisible by pi")
        e = ring.e
        if e == 1:
            unit = (-ring.g_coeffs[0]).divide_by_p()  # val(g_0) = 1 exactly
            c = self.coords[0].divide_by_p() * unit.inverse()
            return target.from_witt(c)
        # a = pi*b: a_0 = -b_{e-1} g_0, a_j = b_{j-1} - b_{e-1} g_j (j >= 1).
        # b_{e-1} loses one W digit to the g_0 division, but b_{e-1} g_j is
        # still good mod p^Nw because val(g_j) >= 1.
        a = self.coords
        g = ring.g_coeffs
        if a[0].is_zero():
            b_top = ring.witt.zero(max(1, ring.work_precision - 1))
        else:
            g0_unit = g[0].divide_by_p()
            b_top = -(a[0].divide_by_p() * g0_unit.inverse())
        b_top_rep = b_top.lift_representative(ring.work_precision)
        bs = [None] * e
        bs[e - 1] = b_top
        for j in range(1, e):
            bs[j - 1] = a[j] + b_top_rep * g[j]
        return target.element(bs)

    def reduce_level(self, m: int) -> "ChainRingElem":
        if m == self.ring.level:
            return self
        target = self.ring.reduce_ring(m)
        return target.element(
            [c.reduce(min(c.precision, target.work_precision)) for c in self.coords]
        )

    def to_digits(self):
        return [c.reduce(cap).to_digits() if cap >= 1 else []
                for c, cap in zip(self.coords, self.ring.caps)]

    def _canonical_key(self):
        return tuple(
            c.reduce(cap).coeffs if cap >= 1 else ()
            for c, cap in zip(self.coords, self.ring.caps)
        )

    def __eq__(self, other):
        try:
            a, b = self._pair(other)
        except ConfigError:
            return NotImplemented
        return a._canonical_key() == b._canonical_key()

    def __hash__(self):
        return hash((self.ring.level, self._canonical_key()))

    def __repr__(self):
        return f"ChainRingElem({[c.coeffs for c in self.coords]}, level={self.ring.level})"


def divide_exact(x: ChainRingElem, d: ChainRingElem) -> ChainRingElem:
    """Exact x/d in O/(pi^(n-k)) where val(d) = k/e; needs val(x) >= val(d)."""
    vd = d.val()
    if vd is VAL_INF:
        raise ZeroInput("division by zero")
    if x.val() < vd:
        raise ZeroInput(f"val(x)={x.val()} < val(d)={vd}")
    k = int(vd * d.ring.e)
    num, den = x, d
    for _ in range(k):
        num = num.shift_down()
        den = den.shift_down()
    return num * den.inverse()


def teichmuller(spec: PrimeFieldSpec, residue_coeffs, precision: int) -> WittScalar:
    """Teichmuller lift of a nonzero residue-field element, mod p^precision."""
    return WittRing(spec, precision).teichmuller(residue_coeffs)
