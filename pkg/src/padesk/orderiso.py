"""Constructive order isomorphisms Z_p[X]/(f) = Z_p[X]/(g) for g close to f.

The isomorphism witness is a root y of g inside A = W[X]/(f), found by
Newton iteration in the finite algebra; the certificate records both the
residual precision of g(y) = 0 and mod-p surjectivity of the induced map
(the power basis of y stays a basis mod p), which together certify the
exact statement by the usual Nakayama step.

Closeness is quantified two ways and both are reported: the analytic
sufficient depth 2*val(disc f) + 1, and an empirical least depth found by
seeded sampling (the sharp constant is knowingly left open).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .chainring import VAL_INF, PrimeFieldSpec, WittRing, WittScalar
from .errors import (
    ConfigError,
    NoConvergence,
    NotClose,
    NotSquarefree,
    PrecisionExhausted,
)
from .padpoly import (
    witt_det,
    wpoly,
    wpoly_derivative,
    wpoly_disc_val,
    wpoly_divmod_monic,
    wpoly_mul,
    wpoly_trim,
)


class FiniteAlgebra:
    """W[X]/(modulus) as a free W-module of rank n = deg(modulus)."""

    def __init__(self, ring: WittRing, modulus):
        modulus = wpoly(ring, modulus)
        if len(modulus) < 2 or not (modulus[-1] - 1).is_zero():
            raise ConfigError("modulus must be monic of degree >= 1")
        self.ring = ring
        self.modulus = modulus
        self.rank = len(modulus) - 1
        self.precision = ring.precision

    # elements are tuples of WittScalar, length == rank

    def element(self, coeffs):
        cs = [self.ring.scalar(c) for c in coeffs]
        if len(cs) > self.rank:
            _, rem = wpoly_divmod_monic(cs, self.modulus)
            cs = list(rem)
        while len(cs) < self.rank:
            cs.append(self.ring.zero())
        return tuple(cs)

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def generator(self):
        if self.rank == 1:
            # X = -modulus[0] in a rank-1 algebra
            return self.element([-self.modulus[0]])
        return self.element([0, 1])

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def mul(self, a, b):
        prod = wpoly_mul(a, b)
        _, rem = wpoly_divmod_monic(list(prod), self.modulus)
        out = list(rem) + [self.ring.zero()] * self.rank
        return tuple(out[: self.rank])

    def eval_poly(self, coeffs, y):
        acc = self.zero()
        for c in reversed(list(coeffs)):
            acc = self.add(self.mul(acc, y), self.element([c]))
        return acc

    def val(self, a):
        return min((c.val() for c in a), default=VAL_INF)

    def mult_matrix(self, a):
        """Matrix of multiplication-by-a in the power basis."""
        rows = []
        cols = [self.mul(a, self.element([0] * j + [1])) for j in range(self.rank)]
        for i in range(self.rank):
            rows.append([cols[j][i] for j in range(self.rank)])
        return rows

    def power_basis_matrix(self, y):
        cols = [self.one()]
        for _ in range(self.rank - 1):
            cols.append(self.mul(cols[-1], y))
        return [[cols[j][i] for j in range(self.rank)] for i in range(self.rank)]


@dataclass
class AlgebraMap:
    """Witness for Z_p[X]/(g) -> Z_p[X]/(f): X maps to image_of_generator."""

    image_of_generator: tuple
    verified_mod: int
    surjective_mod_p: bool

    def to_dict(self):
        return {
            "image_of_generator": [c.to_digits() for c in self.image_of_generator],
            "verified_mod": self.verified_mod,
            "surjective_mod_p": self.surjective_mod_p,
        }


def _solve_cramer(A: FiniteAlgebra, M, r):
    """Solve M c = r over W by Cramer; only exact divisions by det(M)."""
    n = A.rank
    det = witt_det(M)
    dv = det.val()
    if dv is VAL_INF:
        raise NoConvergence("multiplication-by-derivative matrix is singular")
    dv = int(dv)
    unit_inv = (det.divide_by_p(dv) if dv else det).inverse()
    out = []
    for i in range(n):
        Mi = [[r[k] if j == i else M[k][j] for j in range(n)] for k in range(n)]
        di = witt_det(Mi)
        if di.is_zero():
            out.append(A.ring.zero(max(1, di.precision - dv)))
            continue
        if di.val() < dv:
            raise NoConvergence("Newton correction is not divisible by det")
        out.append((di.divide_by_p(dv) if dv else di) * unit_inv)
    return tuple(out)


def find_root_in_algebra(g_coeffs, A: FiniteAlgebra, target: int | None = None):
    """Newton iteration for a root of g in A, starting from A's generator.

    Precondition (checked each step): val(g(y)) > 2 * val(det mult-by-g'(y)).
    Returns y with g(y) = 0 mod p^target (default: A's full precision).
    """
    ring = A.ring
    g_coeffs = wpoly(ring, g_coeffs)
    dg = wpoly_derivative(g_coeffs)
    target = A.precision if target is None else target
    y = A.generator()
    prev = None
    while True:
        r = A.eval_poly(g_coeffs, y)
        rv = A.val(r)
        if rv is VAL_INF or rv >= target:
            return y
        d = A.eval_poly(dg, y)
        M = A.mult_matrix(d)
        det = witt_det(M)
        dv = det.val()
        if dv is VAL_INF:
            raise NoConvergence("derivative matrix singular to precision")
        if rv <= 2 * dv:
            raise NoConvergence(
                f"val(g(y)) = {rv} must exceed 2*val(det g'(y)) = {2 * int(dv)}"
            )
        if prev is not None and rv <= prev:
            raise NoConvergence(f"residual valuation stalled at {rv}")
        prev = rv
        c = _solve_cramer(A, M, r)
        cp = min(x.precision for x in c)
        y = A.sub(tuple(x.reduce(min(x.precision, cp)) for x in y), c)
        if min(x.precision for x in y) <= 1:
            r2 = A.eval_poly([x.reduce(1) for x in g_coeffs], y)
            if A.val(r2) is VAL_INF:
                return y
            raise PrecisionExhausted(
                "algebra precision exhausted before reaching the target"
            )


def order_isomorphic(f_coeffs, g_coeffs, precision: int, p: int):
    """Certify Z_p[X]/(f) = Z_p[X]/(g) or refuse with a reason.

    Success returns an AlgebraMap: the generator image y satisfies
    g(y) = 0 mod p^precision and the power basis 1, y, ..., y^(n-1) is
    invertible mod p (surjectivity; with finite cokernel this yields the
    isomorphism).  NotClose when Newton cannot converge; NotSquarefree when
    f has repeated roots to precision.
    """
    if precision < 1:
        raise ConfigError("precision must be >= 1")
    spec = PrimeFieldSpec(p)
    probe = WittRing(spec, max(precision, 8))
    dval = wpoly_disc_val(wpoly(probe, f_coeffs))
    if dval is VAL_INF:
        raise NotSquarefree("disc(f) is zero to working precision")
    iters = max(3, math.ceil(math.log2(precision)) + 2)
    work = precision + int(dval) * iters + 2
    ring = WittRing(spec, work)
    A = FiniteAlgebra(ring, f_coeffs)
    try:
        y = find_root_in_algebra(g_coeffs, A, target=precision)
    except NoConvergence as exc:
        raise NotClose(str(exc)) from exc
    res = A.eval_poly(wpoly(ring, g_coeffs), y)
    rv = A.val(res)
    if not (rv is VAL_INF or rv >= precision):
        raise NotClose(f"residual valuation {rv} below requested {precision}")
    pb = A.power_basis_matrix(y)
    det_res = witt_det([[c.reduce(1) for c in row] for row in pb])
    if not det_res.is_unit():
        raise NotClose("power basis of the root degenerates mod p")
    y_out = tuple(c.reduce(min(c.precision, precision)) for c in y)
    return AlgebraMap(y_out, precision, True)


@dataclass
class ClosenessReport:
    analytic_depth: int
    empirical_depth: int
    disc_valuation: int
    samples: int

    def to_dict(self):
        return {
            "analytic_depth": self.analytic_depth,
            "empirical_depth": self.empirical_depth,
            "disc_valuation": self.disc_valuation,
            "samples": self.samples,
        }


def closeness_threshold(f_coeffs, p: int, samples: int = 12, seed: int = 0,
                        precision: int = 24) -> ClosenessReport:
    """Least depth k with Newton convergent on all sampled g = f + p^k * r.

    The analytic sufficient bound 2*val(disc f) + 1 always converges and
    caps the search; the empirical depth is reported next to it.
    """
    spec = PrimeFieldSpec(p)
    ring = WittRing(spec, precision)
    fpoly = wpoly_trim(wpoly(ring, f_coeffs))
    dval = wpoly_disc_val(fpoly)
    if dval is VAL_INF:
        raise NotSquarefree("disc(f) is zero to working precision")
    analytic = 2 * int(dval) + 1
    n = len(fpoly) - 1
    f_ints = [int(c.coeffs[0]) for c in fpoly]
    rng = random.Random(seed)
    empirical = analytic
    for k in range(1, analytic + 1):
        ok = True
        for _ in range(samples):
            pert = [rng.randrange(p**2) for _ in range(n)]
            g = [c + (p**k) * pert[i] if i < n else c for i, c in enumerate(f_ints)]
            try:
                order_isomorphic(f_ints, g, precision=max(2, k + 2), p=p)
            except (NotClose, NoConvergence, NotSquarefree):
                ok = False
                break
        if ok:
            empirical = k
            break
    return ClosenessReport(analytic, empirical, int(dval), samples)
