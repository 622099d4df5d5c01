"""Polynomials and truncated power series over W(F_{p^f}).

Covers distinguished-polynomial tests, Weierstrass preparation, Newton
polygons, Krasner separation bounds, Hensel root finding in chain rings,
root tracking between a distinguished polynomial and a nearby Eisenstein
polynomial, and orbit-pattern matching for products of irreducibles.

Conventions: valuations are exact Fractions with val(p) = 1; "closer" means
larger valuation; tracking thresholds are explicit numbers, never "large
enough".  Roots are ChainRingElem values in an explicit splitting ring,
never floating approximations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .chainring import (
    VAL_INF,
    ChainRingElem,
    EisensteinPoly,
    PrimeFieldSpec,
    WittRing,
    WittScalar,
    divide_exact,
    make_extension,
)
from .errors import (
    ConfigError,
    DegreeMismatch,
    IndeterminateAtPrecision,
    KrasnerFail,
    NoConvergence,
    PrecisionExhausted,
    RepeatedRoots,
    ZeroInput,
)

# --- plain polynomials over W: tuples of WittScalar, ascending order ---


def wpoly(ring: WittRing, coeffs):
    return tuple(ring.scalar(c) for c in coeffs)


def wpoly_trim(coeffs):
    out = list(coeffs)
    while out and out[-1].is_zero():
        out.pop()
    return tuple(out)


def wpoly_mul(a, b, u_cap=None):
    if not a or not b:
        return ()
    n = len(a) + len(b) - 1
    if u_cap is not None:
        n = min(n, u_cap)
    zero = a[0].ring.zero(min(a[0].precision, b[0].precision))
    out = [zero] * n
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if i + j >= n:
                break
            out[i + j] = out[i + j] + x * y
    return tuple(out)


def wpoly_divmod_monic(a, m):
    """Division by a monic polynomial over W: exact, no precision loss."""
    m = list(m)
    if not m or not (m[-1] - 1).is_zero():
        raise ConfigError("divisor must be monic")
    dm = len(m) - 1
    rem = list(a)
    quo = [None] * max(0, len(rem) - dm)
    for i in range(len(rem) - 1, dm - 1, -1):
        c = rem[i]
        quo[i - dm] = c
        if not c.is_zero():
            for j in range(dm + 1):
                rem[i - dm + j] = rem[i - dm + j] - c * m[j]
    zero = a[0].ring.zero() if a else None
    return (
        tuple(q if q is not None else zero for q in quo),
        tuple(rem[:dm]),
    )


def wpoly_derivative(a):
    return tuple(c.ring.scalar(i) * c for i, c in enumerate(a) if i >= 1)


def wpoly_eval_chain(a, x: ChainRingElem) -> ChainRingElem:
    acc = x.ring.zero()
    for c in reversed(list(a)):
        acc = acc * x + x.ring.from_witt(x.ring.witt.scalar(c))
    return acc


def witt_det(rows):
    """Determinant over W by elimination with minimal-valuation pivoting.

    The pivot has minimal valuation among remaining entries, so the
    eliminating divisions are exact; each division by p^v costs v digits,
    tracked through WittScalar precisions.  A zero-to-precision determinant
    comes back with val VAL_INF.
    """
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        raise ConfigError("empty matrix")
    ring = m[0][0].ring
    min_prec = min(c.precision for r in m for c in r)
    sign = 1
    det = ring.one(min_prec)
    for k in range(n):
        piv_val, piv_pos = VAL_INF, None
        for i in range(k, n):
            for j in range(k, n):
                v = m[i][j].val()
                if v is not VAL_INF and v < piv_val:
                    piv_val, piv_pos = v, (i, j)
        if piv_pos is None:
            return ring.zero(min_prec)
        i0, j0 = piv_pos
        if i0 != k:
            m[i0], m[k] = m[k], m[i0]
            sign = -sign
        if j0 != k:
            for r in m:
                r[j0], r[k] = r[k], r[j0]
            sign = -sign
        piv = m[k][k]
        det = det * piv
        v = int(piv.val())
        unit_inv = (piv.divide_by_p(v) if v else piv).inverse()
        for i in range(k + 1, n):
            a = m[i][k]
            if a.is_zero():
                continue
            factor = (a.divide_by_p(v) if v else a) * unit_inv
            for j in range(k, n):
                m[i][j] = m[i][j] - factor * m[k][j]
    return det if sign == 1 else -det


def wpoly_resultant(a, b):
    """Resultant via the Sylvester determinant over W."""
    a, b = wpoly_trim(a), wpoly_trim(b)
    if not a or not b:
        raise ZeroInput("resultant of zero polynomial")
    da, db = len(a) - 1, len(b) - 1
    ring = a[0].ring
    n = da + db
    rows = []
    for i in range(db):
        row = [ring.zero()] * n
        for j, c in enumerate(reversed(a)):
            row[i + j] = c
        rows.append(row)
    for i in range(da):
        row = [ring.zero()] * n
        for j, c in enumerate(reversed(b)):
            row[i + j] = c
        rows.append(row)
    return witt_det(rows)


def wpoly_disc_val(f):
    """Valuation of disc(f) for monic f (sign dropped); VAL_INF if unseen."""
    return wpoly_resultant(f, wpoly_derivative(f)).val()


# --- truncated series over W ---


class TruncSeries:
    """Element of W(F_{p^f})[[U]] known mod (p^p_cap, U^u_cap)."""

    def __init__(self, ring: WittRing, coeffs, u_cap: int, p_cap: int | None = None):
        if u_cap < 1:
            raise ConfigError("u_cap must be >= 1")
        p_cap = ring.precision if p_cap is None else p_cap
        if p_cap < 1:
            raise PrecisionExhausted("p_cap must be >= 1")
        p_cap = min(p_cap, ring.precision)
        self.ring = ring
        self.coeffs = tuple(ring.scalar(c, p_cap) for c in list(coeffs)[:u_cap])
        self.u_cap = u_cap
        self.p_cap = p_cap

    @staticmethod
    def from_ints(ring, ints, u_cap, p_cap=None):
        return TruncSeries(ring, list(ints), u_cap, p_cap)

    def coeff(self, i: int) -> WittScalar:
        if i < len(self.coeffs):
            return self.coeffs[i]
        return self.ring.zero(self.p_cap)

    def _caps(self, other):
        return min(self.u_cap, other.u_cap), min(self.p_cap, other.p_cap)

    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            return other
        if isinstance(other, (int, WittScalar)):
            return TruncSeries(self.ring, [other], self.u_cap, self.p_cap)
        raise ConfigError(f"cannot coerce {other!r}")

    def __add__(self, other):
        other = self._coerce(other)
        M, P = self._caps(other)
        n = min(M, max(len(self.coeffs), len(other.coeffs)))
        return TruncSeries(
            self.ring, [self.coeff(i) + other.coeff(i) for i in range(n)], M, P
        )

    def __sub__(self, other):
        other = self._coerce(other)
        M, P = self._caps(other)
        n = min(M, max(len(self.coeffs), len(other.coeffs)))
        return TruncSeries(
            self.ring, [self.coeff(i) - other.coeff(i) for i in range(n)], M, P
        )

    def __neg__(self):
        return TruncSeries(self.ring, [-c for c in self.coeffs], self.u_cap, self.p_cap)

    def __mul__(self, other):
        other = self._coerce(other)
        M, P = self._caps(other)
        prod = wpoly_mul(self.coeffs, other.coeffs, u_cap=M)
        return TruncSeries(self.ring, list(prod), M, P)

    def degree(self):
        """Top index with a coefficient nonzero to precision, or None."""
        for i in range(len(self.coeffs) - 1, -1, -1):
            if not self.coeffs[i].is_zero():
                return i
        return None

    def is_zero_to_precision(self):
        return self.degree() is None

    def evaluate(self, x: ChainRingElem) -> ChainRingElem:
        return wpoly_eval_chain(self.coeffs, x)

    def to_dict(self):
        return {
            "p_cap": self.p_cap,
            "u_cap": self.u_cap,
            "coeffs": [c.to_digits() for c in self.coeffs],
        }

    @staticmethod
    def from_dict(ring: WittRing, data):
        coeffs = [
            WittScalar.from_digits(ring, d, precision=data["p_cap"])
            for d in data["coeffs"]
        ]
        return TruncSeries(ring, coeffs, data["u_cap"], data["p_cap"])

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        M, P = self._caps(other)
        return all(
            (self.coeff(i) - other.coeff(i)).reduce(P).is_zero() for i in range(M)
        )

    def __repr__(self):
        vals = [f"{c!r}*U^{i}" for i, c in enumerate(self.coeffs) if not c.is_zero()]
        body = " + ".join(vals) if vals else "0"
        return f"TruncSeries({body}; mod(p^{self.p_cap}, U^{self.u_cap}))"


# --- distinguished polynomials and Weierstrass preparation ---


def is_distinguished(w: TruncSeries):
    """Decide to declared precision whether w is distinguished.

    Returns (verdict, witness_degree): True iff w is monic of some degree
    d < u_cap and all lower coefficients have valuation >= 1.
    """
    d = w.degree()
    if d is None:
        raise ZeroInput("series is zero to declared precision")
    lead = w.coeff(d)
    if not (lead - 1).is_zero():
        if w.p_cap == 1 and lead.is_unit():
            # one digit cannot distinguish "monic" from "unit leading coeff"
            raise IndeterminateAtPrecision(
                "monicity undecidable with a single p-adic digit"
            )
        return False, d
    for i in range(d):
        if w.coeff(i).val() < 1:
            return False, d
    return True, d


def _series_inverse_mod_p(coeffs_res, res_ring, M):
    """Inverse of a unit series mod (p, U^M)."""
    i0 = coeffs_res[0].inverse()
    inv = [i0]
    for m in range(1, M):
        s = res_ring.zero(1)
        for j in range(1, m + 1):
            cj = coeffs_res[j] if j < len(coeffs_res) else res_ring.zero(1)
            s = s + cj * inv[m - j]
        inv.append(-(i0 * s))
    return inv


def weierstrass_prepare(w: TruncSeries):
    """Factor w = p^t * v(U) * u(U), v distinguished, u a unit series.

    Output caps: both factors mod (p^(p_cap - t), U^u_cap).  The
    reconstruction is certified coefficientwise before returning:
    v*u == w/p^t mod the output caps, equivalently p^t*v*u == w mod the
    input caps.
    """
    ring = w.ring
    M, P = w.u_cap, w.p_cap
    vals = [c.val() for c in w.coeffs]
    finite = [v for v in vals if v is not VAL_INF]
    if not finite:
        raise ZeroInput("series is zero to declared precision")
    t = int(min(finite))
    if P - t < 1:
        raise PrecisionExhausted(
            f"content p^{t} cannot be separated from noise at p_cap {P}"
        )
    prec = P - t
    w1 = [(c.divide_by_p(t) if t else c).reduce(prec) for c in w.coeffs]
    d = None
    for i, c in enumerate(w1):
        if c.is_unit():
            d = i
            break
    if d is None:
        raise PrecisionExhausted(
            "no unit coefficient below the U-cap; distinguished degree unseen"
        )
    p = ring.p
    res_ring = ring.with_precision(1)
    w1_res = [res_ring.scalar(c.residue(), 1) for c in w1]
    u_res = [
        w1_res[d + i] if d + i < len(w1_res) else res_ring.zero(1) for i in range(M)
    ]
    u_inv_res = _series_inverse_mod_p(u_res, res_ring, M)

    def res_lift(c_res):
        return ring.scalar(c_res.coeffs, 1).lift_representative(prec)

    v_c = [ring.zero(prec)] * d + [ring.one(prec)]
    u_c = [res_lift(c) for c in u_res]
    for k in range(1, prec):
        vu = wpoly_mul(tuple(v_c), tuple(u_c), u_cap=M)
        err = [
            (w1[i] if i < len(w1) else ring.zero(prec))
            - (vu[i] if i < len(vu) else ring.zero(prec))
            for i in range(M)
        ]
        if all(c.is_zero() for c in err):
            break
        ek = [
            c.divide_by_p(k).reduce(1) if not c.is_zero() else res_ring.zero(1)
            for c in err
        ]
        ek = [res_ring.scalar(c.coeffs, 1) for c in ek]
        # solve dv*u + du*v = ek mod p using v = U^d mod p:
        # c = ek*u^{-1}; dv = low-d part of c; du = u*(c div U^d)
        c_ser = []
        for i in range(M):
            s = res_ring.zero(1)
            for j in range(i + 1):
                s = s + ek[j] * u_inv_res[i - j]
            c_ser.append(s)
        dv_res = c_ser[:d]
        q_res = c_ser[d:]
        du_res = []
        for i in range(M):
            s = res_ring.zero(1)
            for j in range(i + 1):
                if i - j < len(q_res):
                    s = s + u_res[j] * q_res[i - j]
            du_res.append(s)
        pk = p**k
        v_c = [
            v_c[i] + res_lift(dv_res[i]) * pk if i < d else v_c[i]
            for i in range(d + 1)
        ]
        u_c = [u_c[i] + res_lift(du_res[i]) * pk for i in range(M)]
    # certify: v*u == w1 coefficientwise mod (p^prec, U^M)
    recon = wpoly_mul(tuple(v_c), tuple(u_c), u_cap=M)
    for i in range(M):
        lhs = recon[i] if i < len(recon) else ring.zero(prec)
        rhs = w1[i] if i < len(w1) else ring.zero(prec)
        if not (lhs - rhs).is_zero():
            raise PrecisionExhausted("preparation failed to certify round-trip")
    v = TruncSeries(ring, v_c, M, prec)
    u = TruncSeries(ring, u_c, M, prec)
    return t, v, u


def weight_relation(j: TruncSeries, k: int) -> TruncSeries:
    """j(U) - (1+p)^(k-1), the weight-k specialization relation."""
    if k < 2:
        raise ConfigError("weight must be >= 2")
    ring = j.ring
    c = ring.scalar(1 + ring.p) ** (k - 1)
    return j - TruncSeries(ring, [c], j.u_cap, j.p_cap)


# --- Newton polygons ---


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (i, val c_i); slopes as root valuations."""

    vertices: tuple
    slopes: tuple  # ((valuation: Fraction, multiplicity: int), ...)
    zero_root_mult: int

    def slope_multiset(self):
        out = []
        for s, m in self.slopes:
            out.extend([s] * m)
        return out

    def total_degree(self):
        return self.zero_root_mult + sum(m for _, m in self.slopes)

    def to_dict(self):
        return {
            "vertices": [[int(i), str(v)] for i, v in self.vertices],
            "slopes": [[str(s), m] for s, m in self.slopes],
            "zero_root_mult": self.zero_root_mult,
        }


def _as_val(c):
    v = c.val()
    return v if v is VAL_INF else Fraction(v)


def newton_polygon(coeffs) -> NewtonPolygon:
    """Newton polygon of a nonzero polynomial (coefficients ascending).

    Accepts ChainRingElem or WittScalar coefficients.  Roots at zero coming
    from vanishing low-order coefficients are split off into zero_root_mult;
    slopes give the valuations of the remaining roots (negated hull slopes).
    """
    vals = [_as_val(c) for c in coeffs]
    pts = [(i, v) for i, v in enumerate(vals) if v is not VAL_INF]
    if not pts:
        raise ZeroInput("zero polynomial")
    i0 = pts[0][0]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y1 - y2, x2 - x1)  # root valuation = -slope of hull edge
        mult = x2 - x1
        if slopes and slopes[-1][0] == s:
            slopes[-1] = (s, slopes[-1][1] + mult)
        else:
            slopes.append((s, mult))
    return NewtonPolygon(tuple(hull), tuple(slopes), i0)


# --- Krasner bounds ---


@dataclass(frozen=True)
class KrasnerBound:
    """Separation data for the roots of an Eisenstein polynomial.

    separations: multiset {val(pi - pi_j)} over the e-1 conjugate roots;
    bound_val: the max.  An approximation y beats the bound when
    val(g(y)) > bound_val + sum(separations), which forces y to generate
    the same field as one of the roots.
    """

    separations: tuple
    bound_val: Fraction
    sum_separations: Fraction

    def tracking_threshold(self, extra: Fraction = Fraction(0)) -> Fraction:
        return self.sum_separations + max(self.bound_val, extra)

    def implies_containment(self, val_g_y) -> bool:
        if val_g_y is VAL_INF:
            return True
        return val_g_y > self.bound_val + self.sum_separations

    def to_dict(self):
        return {
            "separations": [str(s) for s in self.separations],
            "bound_val": str(self.bound_val),
            "sum_separations": str(self.sum_separations),
        }


def _shift_poly_chain(coeffs, x0: ChainRingElem):
    """Coefficients of f(X + x0) over the chain ring of x0 (Taylor shifts)."""
    ring = x0.ring
    work = [
        c if isinstance(c, ChainRingElem) else ring.from_witt(ring.witt.scalar(c))
        for c in coeffs
    ]
    out = []
    for _ in range(len(work)):
        carry = ring.zero()
        quo = []
        for c in reversed(work):
            carry = carry * x0 + c
            quo.append(carry)
        out.append(quo[-1])
        work = list(reversed(quo[:-1]))
        if not work:
            break
    return out


def krasner_bound(g: EisensteinPoly) -> KrasnerBound:
    """Shift-and-hull: slopes of g(X + pi) over O = W[X]/(g), zero root removed."""
    if g.e < 2:
        raise ConfigError("Krasner bound needs degree >= 2")
    dval = wpoly_disc_val(g.coeffs)
    if dval is VAL_INF:
        raise RepeatedRoots(
            f"gcd(g, g') is not a unit ideal to precision {g.ring.precision}"
        )
    level = max(2 * (int(dval) + 1) * g.e, 4 * g.e)
    needed = -(-level // g.e)
    if g.ring.precision < needed:
        level = g.e * g.ring.precision
    ring = make_extension(g.ring.spec, g, level)
    shifted = _shift_poly_chain(list(g.coeffs), ring.pi())
    np_ = newton_polygon(shifted)
    if np_.zero_root_mult < 1:
        raise RepeatedRoots("g(pi) != 0 in the splitting ring?")
    seps = tuple(sorted(np_.slope_multiset()))
    if len(seps) != g.e - 1:
        raise RepeatedRoots(
            f"expected {g.e - 1} separations, saw {len(seps)}; raise precision"
        )
    return KrasnerBound(seps, max(seps), sum(seps, Fraction(0)))


# --- Hensel root finding in a chain ring ---


def poly_eval_and_derivative(coeffs, x: ChainRingElem):
    ring = x.ring
    acc = ring.zero()
    dacc = ring.zero()
    for c in reversed(list(coeffs)):
        dacc = dacc * x + acc
        cc = c if isinstance(c, ChainRingElem) else ring.from_witt(ring.witt.scalar(c))
        acc = acc * x + cc
    return acc, dacc


def hensel_root(coeffs, y0: ChainRingElem) -> ChainRingElem:
    """Newton iteration from y0; requires val(w(y0)) > 2 val(w'(y0)).

    Returns y with w(y) = 0 at y's level and val(y - y0) > val(w'(y0)).
    Each correction divides by w'(y), which drops the working level by
    e*val(w'(y)) exactly; the level bookkeeping is explicit, never silent.
    """
    y = y0
    coeffs = list(coeffs)
    prev_rv = None
    while True:
        ring = y.ring
        cs = [
            c.reduce_level(ring.level) if isinstance(c, ChainRingElem) else c
            for c in coeffs
        ]
        r, d = poly_eval_and_derivative(cs, y)
        rv, dv = r.val(), d.val()
        if rv is VAL_INF:
            return y
        if prev_rv is not None and rv <= prev_rv:
            raise NoConvergence(f"residual valuation stalled at {rv}")
        if dv is VAL_INF or rv <= 2 * dv:
            raise NoConvergence(
                f"need val(w(y)) > 2*val(w'(y)): {rv} vs 2*{dv}"
            )
        k = int(dv * ring.e)
        if ring.level - k < 1:
            raise PrecisionExhausted(
                "working level exhausted before the residual vanished"
            )
        c = divide_exact(r, d)
        y = y.reduce_level(ring.level - k) - c
        prev_rv = rv


# --- root tracking ---


@dataclass
class RootTrack:
    start_repr: str
    separation: Fraction
    explicit: bool


@dataclass
class RootMatchReport:
    degree: int
    membership_ok: bool
    threshold: Fraction
    depth: int
    bound: KrasnerBound
    tracks: list = field(default_factory=list)
    fields_match: bool = False

    def to_dict(self):
        return {
            "degree": self.degree,
            "membership_ok": self.membership_ok,
            "threshold": str(self.threshold),
            "depth": self.depth,
            "bound": self.bound.to_dict(),
            "tracks": [
                {
                    "start": t.start_repr,
                    "separation": str(t.separation),
                    "explicit": t.explicit,
                }
                for t in self.tracks
            ],
            "fields_match": self.fields_match,
        }


def ideal_membership_pNe(w: TruncSeries, g: EisensteinPoly, N: int, n_pow: int) -> bool:
    """Decide w in (p^N, g, U^n_pow): reduce mod monic g, check the remainder
    against (p^N, U^n_pow) coefficientwise."""
    if w.p_cap < N:
        raise PrecisionExhausted(
            f"membership mod p^{N} needs p_cap >= {N}, have {w.p_cap}"
        )
    _, rem = wpoly_divmod_monic(list(w.coeffs), list(g.coeffs))
    for i, c in enumerate(rem):
        if i >= n_pow:
            break
        v = c.val()
        if v is not VAL_INF and v < N:
            return False
    return True


def _roots_in_own_ring(g: EisensteinPoly, level: int):
    """Roots of g available in O = W[X]/(g) at the given level.

    pi is always a root; for e = 2 the conjugate -g_1 - pi is the other one.
    For e >= 3 only pi is guaranteed to lie in O at desk scale.
    """
    ring = make_extension(g.ring.spec, g, level)
    pi = ring.pi()
    roots = [("pi", pi)]
    if g.e == 2:
        conj = -(ring.from_witt(ring.witt.scalar(g.coeffs[1]))) - pi
        roots.append(("conj(pi)", conj))
    return ring, roots


def track_roots(w: TruncSeries, g: EisensteinPoly, N: int,
                n_level: int | None = None) -> RootMatchReport:
    """Match roots of a distinguished degree-e w against the roots of g.

    Preconditions: w in (p^N, g, U^(Ne)) (checked by monic reduction) and N
    strictly above the Krasner tracking threshold of g (and above the pi^n
    closeness requirement when n_level is given).  Each matched pair's
    separation valuation must exceed bound_val, certifying the field match
    W[1/p](y) = W[1/p](pi).
    """
    ok, d = is_distinguished(w)
    if not ok:
        raise ConfigError("w must be distinguished")
    e = g.e
    if d != e:
        raise DegreeMismatch(f"deg w = {d} != deg g = {e}")
    bound = krasner_bound(g)
    extra = Fraction(n_level, e) if n_level is not None else Fraction(0)
    threshold = bound.tracking_threshold(extra)
    if Fraction(N) <= threshold:
        raise KrasnerFail(
            f"N={N} at or below the tracking threshold {threshold}",
            threshold=threshold,
        )
    if not ideal_membership_pNe(w, g, N, N * e):
        raise ConfigError(f"w not in (p^{N}, g, U^{N * e})")
    level = e * (N + int(bound.sum_separations) + 3)
    needed = -(-level // e)
    avail = min(g.ring.precision, w.p_cap)
    if avail < needed:
        level = e * avail
    ring, roots_of_g = _roots_in_own_ring(g, level)
    report = RootMatchReport(
        degree=e, membership_ok=True, threshold=threshold, depth=N, bound=bound
    )
    for name, x in roots_of_g:
        wx, _ = poly_eval_and_derivative(list(w.coeffs), x)
        vwx = wx.val()
        if vwx is not VAL_INF and vwx < N:
            raise KrasnerFail(f"val(w({name})) = {vwx} < N", threshold=threshold)
        try:
            y = hensel_root(list(w.coeffs), x)
        except NoConvergence as exc:
            raise KrasnerFail(str(exc), threshold=threshold) from exc
        sep = (y - x.reduce_level(y.ring.level)).val()
        if not (sep is VAL_INF or sep > bound.bound_val):
            raise KrasnerFail(
                f"separation {sep} did not exceed bound {bound.bound_val}",
                threshold=threshold,
            )
        if n_level is not None and not (sep is VAL_INF or sep > Fraction(n_level, e)):
            raise KrasnerFail(
                f"separation {sep} not beyond val(pi^{n_level}) = {Fraction(n_level, e)}",
                threshold=threshold,
            )
        report.tracks.append(RootTrack(name, sep, True))
    if e > 2:
        # conjugates outside O: val(w(sigma x)) = val(w(x)) by Galois
        # invariance of W-coefficient polynomials, so the valuation count
        # certifies a bijection without explicit witnesses
        for j in range(e - 1):
            report.tracks.append(
                RootTrack(
                    f"conjugate_{j + 1}",
                    Fraction(N) - bound.sum_separations,
                    False,
                )
            )
    report.fields_match = True
    return report


# --- orbit matching for products of irreducibles ---


@dataclass
class OrbitFactor:
    degree: int
    kind: str  # linear | eisenstein | unramified
    separations: list


@dataclass
class OrbitMatchReport:
    pattern: list
    factors: list
    threshold: Fraction
    depth: int

    def to_dict(self):
        return {
            "pattern": self.pattern,
            "threshold": str(self.threshold),
            "depth": self.depth,
            "factors": [
                {
                    "degree": f.degree,
                    "kind": f.kind,
                    "separations": [str(s) for s in f.separations],
                }
                for f in self.factors
            ],
        }


def _factor_kind(coeffs):
    d = len(coeffs) - 1
    if d == 1:
        return "linear"
    np_ = newton_polygon(coeffs)
    slopes = np_.slope_multiset()
    if len(set(slopes)) != 1:
        raise ConfigError("mixed-slope factors are out of desk scope")
    s = slopes[0]
    if s.denominator == d:
        return "eisenstein"
    if s.denominator == 1:
        return "unramified"
    raise ConfigError(f"slope {s} factors are out of desk scope")


def _int_coeff(c: WittScalar) -> int:
    return int(c.coeffs[0])


def _unramified_factor_roots(ring: WittRing, coeffs, slope: int, prec: int):
    """Roots p^slope * s of an integral-slope factor with squarefree residual.

    sigma(V) = f(p^slope V)/p^(slope*deg) has unit content; its residue roots
    live in F_{p^deg} and lift one digit per Hensel step inside W(F_{p^deg}).
    """
    if ring.f != 1:
        raise ConfigError("unramified factor extraction implemented for f = 1")
    d = len(coeffs) - 1
    p = ring.p
    sigma = []
    for j, c in enumerate(coeffs):
        shift = slope * (d - j)
        if shift == 0:
            sigma.append(c)
        elif c.is_zero():
            sigma.append(ring.zero(max(1, c.precision - shift)))
        else:
            sigma.append(c.divide_by_p(shift))
    spec2 = PrimeFieldSpec(p, d)
    W2 = WittRing(spec2, prec)
    sig2 = [W2.scalar(_int_coeff(c)) for c in sigma]
    roots = []
    for idx in range(spec2.q):
        cs, t = [], idx
        for _ in range(d):
            cs.append(t % p)
            t //= p
        x = W2.scalar(cs, 1)
        acc = W2.zero(1)
        for c in reversed(sig2):
            acc = acc * x + c.reduce(1)
        if acc.is_zero():
            roots.append(cs)
    if len(roots) != d:
        raise ConfigError(
            f"residual polynomial has {len(roots)} roots in F_{p}^{d}, need {d}"
        )
    dsig = wpoly_derivative(tuple(sig2))
    lifted = []
    for cs in roots:
        z = W2.scalar(cs)
        for _ in range(prec + 1):
            fz = W2.zero()
            for c in reversed(sig2):
                fz = fz * z + c
            if fz.is_zero():
                break
            dz = W2.zero()
            for c in reversed(dsig):
                dz = dz * z + c
            z = z - fz * dz.inverse()
        lifted.append(z * (p**slope))
    return W2, lifted


def galois_orbit_match(w: TruncSeries, factors, N: int) -> OrbitMatchReport:
    """Certify that w close to g = prod(factors) preserves the factor pattern.

    ``factors`` are monic distinguished polynomials over W(F_p) (f = 1),
    squarefree and pairwise coprime, given already factored.  Every root of
    every factor is located in its natural splitting ring, the nearby root
    of w is Hensel-tracked, and per-root Krasner exceedance plus the degree
    count certify that w factors with the same degree pattern, each factor
    of w paired with the factor of g its roots approximate.
    """
    ring = w.ring
    if ring.f != 1:
        raise ConfigError("orbit matching implemented over W(F_p) (f = 1)")
    fac = [tuple(ring.scalar(c) for c in f) for f in factors]
    g_total = (ring.one(),)
    for f in fac:
        g_total = wpoly_mul(g_total, f)
    deg = len(g_total) - 1
    if w.degree() != deg:
        raise DegreeMismatch(f"deg w = {w.degree()} != deg g = {deg}")
    for i in range(deg + 1):
        gi = g_total[i] if i < len(g_total) else ring.zero()
        dv = (w.coeff(i) - gi).val()
        if dv is not VAL_INF and dv < N:
            raise ConfigError(f"w != g mod p^{N} at U^{i}")
    prec = min(w.p_cap, ring.precision)
    w_ints = [_int_coeff(c) for c in w.coeffs]

    def eval_other_factors(x: ChainRingElem, exclude: int):
        vals = []
        for j, f in enumerate(fac):
            if j == exclude:
                continue
            fx = wpoly_eval_chain([x.ring.witt.scalar(_int_coeff(c)) for c in f], x)
            v = fx.val()
            vals.append(v if v is not VAL_INF else Fraction(x.ring.level, x.ring.e))
        return vals

    result_factors = []
    thresholds = []
    for idx, f in enumerate(fac):
        kind = _factor_kind(f)
        d = len(f) - 1
        # (name, root elem, within-factor separation list)
        located = []
        if kind == "linear":
            spec = ring.spec
            Whi = WittRing(spec, prec)
            carrier = EisensteinPoly(Whi, [-Whi.p, 1])
            R = make_extension(spec, carrier, prec)
            a = R.from_witt(Whi.scalar(-_int_coeff(f[0])))
            located.append(("root", a, []))
        elif kind == "eisenstein":
            gi = EisensteinPoly(ring.with_precision(prec), [c for c in f])
            kb = krasner_bound(gi)
            level = gi.e * (N + int(kb.sum_separations) + 3)
            if -(-level // gi.e) > prec:
                level = gi.e * prec
            _, roots = _roots_in_own_ring(gi, level)
            if gi.e > 2:
                raise ConfigError(
                    "orbit matching tracks Eisenstein factors of degree <= 2"
                )
            for name, x in roots:
                located.append((name, x, list(kb.separations)))
        else:
            np_f = newton_polygon(f)
            slope = int(np_f.slope_multiset()[0])
            W2, roots = _unramified_factor_roots(ring, f, slope, prec)
            spec2 = W2.spec
            carrier = EisensteinPoly(W2, [-W2.p, 1])
            R2 = make_extension(spec2, carrier, prec)
            elems = [R2.from_witt(r) for r in roots]
            for i, x in enumerate(elems):
                within = [
                    (x - y).val() for j, y in enumerate(elems) if j != i
                ]
                located.append((f"root_{i}", x, within))
        seps = []
        for name, x, within in located:
            cross = eval_other_factors(x, idx)
            b_x = max(within + cross, default=Fraction(0))
            dcoeffs = wpoly_derivative(f)
            dfx = wpoly_eval_chain(
                [x.ring.witt.scalar(_int_coeff(c)) for c in dcoeffs], x
            ).val()
            dfx = dfx if dfx is not VAL_INF else Fraction(0)
            thresholds.append(dfx + sum(cross, Fraction(0)) + b_x)
            try:
                y = hensel_root(
                    [x.ring.witt.scalar(c) for c in w_ints], x
                )
            except NoConvergence as exc:
                raise KrasnerFail(str(exc), threshold=max(thresholds)) from exc
            sep = (y - x.reduce_level(y.ring.level)).val()
            if not (sep is VAL_INF or sep > b_x):
                raise KrasnerFail(
                    f"separation {sep} does not clear the per-root bound {b_x}",
                    threshold=max(thresholds),
                )
            seps.append(sep)
        result_factors.append(OrbitFactor(d, kind, seps))
    threshold = max(thresholds, default=Fraction(0))
    if Fraction(N) <= threshold:
        raise KrasnerFail(f"N={N} at or below threshold {threshold}",
                          threshold=threshold)
    pattern = sorted((f.degree for f in result_factors), reverse=True)
    return OrbitMatchReport(pattern, result_factors, threshold, N)
