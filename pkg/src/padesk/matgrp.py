"""2x2 matrix groups over finite chain rings.

Matrices are packed as base-K integer codes over a PackedRing of size K;
closure is a numpy-vectorized BFS over the right Cayley graph against a
K^4 bitmap.  Provides group closure with caps, SL2 fullness tests,
the full-mod-square implies contains-SL2 check, reduction maps, and the
section-existence search for GL2 over length-2 chain rings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, ConfigError, SearchExhausted, VerificationFailed
from .packed import PackedRing

DEFAULT_CAP = 10**6
_BITMAP_MAX = 1 << 26


# --- matrix codes ---


def encode(ring: PackedRing, quad) -> int:
    K = ring.size
    a, b, c, d = quad
    return ((a * K + b) * K + c) * K + d


def decode(ring: PackedRing, code: int):
    K = ring.size
    d = code % K
    code //= K
    c = code % K
    code //= K
    b = code % K
    a = code // K
    return (a, b, c, d)


def identity_code(ring: PackedRing) -> int:
    return encode(ring, (ring.one, ring.zero, ring.zero, ring.one))


def mat_from_ints(ring: PackedRing, entries):
    """Matrix code from ring indices or (zmod rings) plain integers."""
    quad = []
    for x in entries:
        if isinstance(x, int) and getattr(ring, "source", (None,))[0] == "zmod":
            quad.append(x % ring.size)
        else:
            quad.append(int(x))
    return encode(ring, quad)


def det_code(ring: PackedRing, code: int) -> int:
    a, b, c, d = decode(ring, code)
    mul, add, neg = ring.mul_py, ring.add_py, ring.neg_py
    return add[mul[a][d]][neg[mul[b][c]]]


def is_invertible(ring: PackedRing, code: int) -> bool:
    return bool(ring.units[det_code(ring, code)])


def mat_mul_code(ring: PackedRing, x: int, y: int) -> int:
    mul, add = ring.mul_py, ring.add_py
    xa, xb, xc, xd = decode(ring, x)
    ya, yb, yc, yd = decode(ring, y)
    return encode(
        ring,
        (
            add[mul[xa][ya]][mul[xb][yc]],
            add[mul[xa][yb]][mul[xb][yd]],
            add[mul[xc][ya]][mul[xd][yc]],
            add[mul[xc][yb]][mul[xd][yd]],
        ),
    )


def mat_inv_code(ring: PackedRing, x: int) -> int:
    a, b, c, d = decode(ring, x)
    mul, add, neg = ring.mul_py, ring.add_py, ring.neg_py
    det = add[mul[a][d]][neg[mul[b][c]]]
    if not ring.units[det]:
        raise ConfigError("matrix not invertible")
    di = ring.inv_py[det]
    return encode(
        ring,
        (mul[di][d], mul[di][neg[b]], mul[di][neg[c]], mul[di][a]),
    )


def mat_pow_code(ring: PackedRing, x: int, k: int) -> int:
    result = identity_code(ring)
    base = x
    while k:
        if k & 1:
            result = mat_mul_code(ring, result, base)
        base = mat_mul_code(ring, base, base)
        k >>= 1
    return result


def mat_order(ring: PackedRing, x: int, cap: int = 10**6) -> int:
    e = identity_code(ring)
    y, k = x, 1
    while y != e:
        y = mat_mul_code(ring, y, x)
        k += 1
        if k > cap:
            raise CapExceeded("element order exceeds cap")
    return k


def mat_mul_many(ring: PackedRing, codes: np.ndarray, g_quad) -> np.ndarray:
    """Right-multiply an array of matrix codes by a fixed matrix."""
    K = ring.size
    ga, gb, gc, gd = g_quad
    d = codes % K
    t = codes // K
    c = t % K
    t //= K
    b = t % K
    a = t // K
    mul, add = ring.mul, ring.add
    ea = add[mul[a, ga], mul[b, gc]]
    eb = add[mul[a, gb], mul[b, gd]]
    ec = add[mul[c, ga], mul[d, gc]]
    ed = add[mul[c, gb], mul[d, gd]]
    return ((ea.astype(np.int64) * K + eb) * K + ec) * K + ed


def map_codes(ring: PackedRing, codes: np.ndarray, entry_map: np.ndarray,
              target: PackedRing) -> np.ndarray:
    """Apply an entrywise ring map (index array) to an array of codes."""
    K = ring.size
    K2 = target.size
    d = codes % K
    t = codes // K
    c = t % K
    t //= K
    b = t % K
    a = t // K
    em = entry_map
    return (
        (em[a].astype(np.int64) * K2 + em[b]) * K2 + em[c]
    ) * K2 + em[d]


# --- groups ---


@dataclass
class FiniteMatGroup:
    ring: PackedRing
    generators: list
    elements: np.ndarray  # sorted int64 codes
    order: int

    def contains(self, code: int) -> bool:
        i = np.searchsorted(self.elements, code)
        return bool(i < self.elements.size and self.elements[i] == code)

    def contains_all(self, codes) -> bool:
        return all(self.contains(int(c)) for c in codes)

    def reduce_to_level(self, m: int):
        sub, mp = self.ring.reduce_to_level(m)
        gens = [int(map_codes(self.ring, np.array([g]), mp, sub)[0])
                for g in self.generators]
        codes = np.unique(map_codes(self.ring, self.elements, mp, sub))
        return FiniteMatGroup(sub, gens, codes, int(codes.size))

    def residue_mats(self, code: int):
        """Entrywise residue of a matrix, as residue-field indices."""
        mp = self.ring.residue_map
        return tuple(int(mp[x]) for x in decode(self.ring, code))

    def __repr__(self):
        return f"FiniteMatGroup(order={self.order}, ring={self.ring.label})"


def close_generators(ring: PackedRing, gens, cap: int = DEFAULT_CAP) -> FiniteMatGroup:
    """BFS closure of the generated subgroup; CapExceeded carries the count."""
    gen_codes = []
    for g in gens:
        code = g if isinstance(g, int) else encode(ring, g)
        if not is_invertible(ring, code):
            raise ConfigError(f"generator {decode(ring, code)} is not invertible")
        gen_codes.append(code)
    K4 = ring.size**4
    if K4 > _BITMAP_MAX:
        raise CapExceeded(f"code space {K4} too large for the bitmap")
    gen_quads = [decode(ring, g) for g in gen_codes]
    visited = np.zeros(K4, dtype=bool)
    e = identity_code(ring)
    visited[e] = True
    frontier = np.array([e], dtype=np.int64)
    count = 1
    while frontier.size:
        parts = [mat_mul_many(ring, frontier, q) for q in gen_quads]
        cand = np.unique(np.concatenate(parts)) if parts else np.array([], np.int64)
        fresh = cand[~visited[cand]]
        visited[fresh] = True
        count += int(fresh.size)
        if count > cap:
            raise CapExceeded(
                f"closure exceeded cap {cap}", partial_count=count
            )
        frontier = fresh
    return FiniteMatGroup(ring, gen_codes, np.flatnonzero(visited).astype(np.int64),
                          count)


def gl2_order(ring: PackedRing) -> int:
    K, q = ring.size, ring.residue_q
    return K**4 * (q * q - 1) * (q * q - q) // q**4


def sl2_order(ring: PackedRing) -> int:
    K, q = ring.size, ring.residue_q
    return K**3 * (q * q - 1) // q**2


def sl2_generators(ring: PackedRing):
    """Elementary matrices E12(x), E21(x) over an additive basis of R."""
    gens = []
    for b in ring.additive_basis:
        gens.append(encode(ring, (ring.one, b, ring.zero, ring.one)))
        gens.append(encode(ring, (ring.one, ring.zero, b, ring.one)))
    return gens


def gl2_generators(ring: PackedRing):
    gens = list(sl2_generators(ring))
    for u in ring.unit_group_generators():
        gens.append(encode(ring, (u, ring.zero, ring.zero, ring.one)))
    return gens


_SL2_CACHE: dict = {}


def enumerate_sl2(ring: PackedRing, cap: int = DEFAULT_CAP) -> FiniteMatGroup:
    key = id(ring)
    got = _SL2_CACHE.get(key)
    if got is None:
        got = close_generators(ring, sl2_generators(ring), cap)
        expect = sl2_order(ring)
        if got.order != expect:
            raise VerificationFailed(
                f"|SL2| closure {got.order} != formula {expect}"
            )
        _SL2_CACHE[key] = got
    return got


def is_full(group: FiniteMatGroup) -> bool:
    """G contains SL2(R) iff it contains the elementary generators."""
    return group.contains_all(sl2_generators(group.ring))


@dataclass
class BostonReport:
    applicable: bool
    mod_square_full: bool
    contains_sl2: bool
    group_order: int
    sl2_order: int
    counterexample: tuple | None = None

    def to_dict(self):
        return {
            "applicable": self.applicable,
            "mod_square_full": self.mod_square_full,
            "contains_sl2": self.contains_sl2,
            "group_order": self.group_order,
            "sl2_order": self.sl2_order,
            "counterexample": self.counterexample,
        }


def boston_check(ring: PackedRing, gens, cap: int = DEFAULT_CAP) -> BostonReport:
    """Does a full mod-m^2 image force SL2(R) inside the closure?

    Verifies the implication instance by explicit closure and reports a
    counterexample element when the containment fails.  Failures are real
    for ramified chain rings with residue field F_3: SL2(F_3) is not
    perfect, so trace-twisted subgroups with full mod-m^2 image exist.
    """
    if ring.length < 2:
        g = close_generators(ring, gens, cap)
        fullness = is_full(g)
        return BostonReport(True, fullness, fullness, g.order, sl2_order(ring))
    g = close_generators(ring, gens, cap)
    g2 = g.reduce_to_level(2)
    mod2_full = is_full(g2)
    if not mod2_full:
        return BostonReport(False, False, False, g.order, sl2_order(ring))
    if sl2_order(ring) <= cap:
        sl2 = enumerate_sl2(ring, cap)
        missing = None
        # subset check against the enumerated SL2(R)
        idx = np.searchsorted(g.elements, sl2.elements)
        ok = np.all(
            (idx < g.elements.size) & (g.elements[np.minimum(idx, g.elements.size - 1)] == sl2.elements)
        )
        if not ok:
            bad = sl2.elements[
                ~((idx < g.elements.size) & (g.elements[np.minimum(idx, g.elements.size - 1)] == sl2.elements))
            ][0]
            missing = decode(ring, int(bad))
        return BostonReport(True, True, bool(ok), g.order, sl2.order, missing)
    contains = g.contains_all(sl2_generators(ring))
    return BostonReport(True, True, contains, g.order, sl2_order(ring))


# --- random generator sampling (Boston property suite) ---


def random_invertible(ring: PackedRing, rng):
    while True:
        quad = tuple(rng.randrange(ring.size) for _ in range(4))
        code = encode(ring, quad)
        if is_invertible(ring, code):
            return code


def random_full_mod_square_gens(ring: PackedRing, rng, n_gens: int = 2,
                                cap: int = DEFAULT_CAP, tries: int = 200):
    """Random invertible generators whose mod-m^2 image is full."""
    sub, mp = ring.reduce_to_level(min(2, ring.length))
    for _ in range(tries):
        gens = [random_invertible(ring, rng) for _ in range(n_gens)]
        red = [int(map_codes(ring, np.array([g]), mp, sub)[0]) for g in gens]
        try:
            g2 = close_generators(sub, red, cap)
        except CapExceeded:
            continue
        if is_full(g2):
            return gens
    raise SearchExhausted(f"no full-mod-square generator set in {tries} tries")


# --- section existence for GL2(R) -> GL2(k), R of length 2 ---


@dataclass
class SectionWitness:
    kind: str  # "ring-constant" or "generator-lift"
    base_gens: list
    images: list
    base_order: int
    verified_pairs: int

    def to_dict(self):
        return {
            "kind": self.kind,
            "base_gens": self.base_gens,
            "images": self.images,
            "base_order": self.base_order,
            "verified_pairs": self.verified_pairs,
        }


@dataclass
class NonSplitCertificate:
    base_gens: list
    lifts_per_generator: list
    order_filtered: list
    pairs_checked: int

    def to_dict(self):
        return {
            "base_gens": self.base_gens,
            "lifts_per_generator": self.lifts_per_generator,
            "order_filtered": self.order_filtered,
            "pairs_checked": self.pairs_checked,
        }


_GL2_PAIR_CACHE: dict = {}


def generating_pair_gl2(field: PackedRing, cap: int = DEFAULT_CAP):
    """A 2-generator set of GL2(F_q), found by bounded search (cached)."""
    key = id(field)
    if key in _GL2_PAIR_CACHE:
        return _GL2_PAIR_CACHE[key]
    full = close_generators(field, gl2_generators(field), cap)
    target = full.order
    elems = [int(x) for x in full.elements]
    # prefer small search: an element of maximal order with a shear
    shear = encode(field, (field.one, field.one, field.zero, field.one))
    for a in elems:
        try:
            g = close_generators(field, [a, shear], cap=target + 1)
        except CapExceeded:
            continue
        if g.order == target:
            pair = (a, shear)
            _GL2_PAIR_CACHE[key] = (pair, full)
            return pair, full
    for a in elems:
        for b in elems:
            try:
                g = close_generators(field, [a, b], cap=target + 1)
            except CapExceeded:
                continue
            if g.order == target:
                pair = (a, b)
                _GL2_PAIR_CACHE[key] = (pair, full)
                return pair, full
    raise SearchExhausted("no generating pair found (unexpected)")


def _closure_capped_py(ring: PackedRing, gens, cap: int):
    """Small scalar-BFS closure with a hard cap; returns set or None."""
    e = identity_code(ring)
    seen = {e}
    frontier = [e]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = mat_mul_code(ring, x, g)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        return None
                    new.append(y)
        frontier = new
    return seen


def _lifts_of(ring: PackedRing, base_code: int):
    """All invertible preimages of a residue matrix under entrywise reduction."""
    mp = ring.residue_map
    res_ring = ring.residue_ring
    ta, tb, tc, td = decode(res_ring, base_code)
    fibers = [
        [i for i in range(ring.size) if int(mp[i]) == t] for t in (ta, tb, tc, td)
    ]
    out = []
    for a in fibers[0]:
        for b in fibers[1]:
            for c in fibers[2]:
                for d in fibers[3]:
                    code = encode(ring, (a, b, c, d))
                    if is_invertible(ring, code):
                        out.append(code)
    return out


def find_section(ring: PackedRing, allow_slow: bool = False,
                 cap: int = DEFAULT_CAP):
    """Section witness or NonSplit certificate for GL2(R) -> GL2(k).

    R must be a chain ring of length 2.  Truncated-polynomial rings carry
    the constant-coefficient ring splitting, which induces the group
    section (verified as a homomorphism on all |GL2(k)|^2 pairs).  For the
    other rings a generator-lift search runs over all invertible lifts of a
    fixed generating pair, pruned only by the necessary order condition;
    exhausting it yields a complete NonSplit certificate, since any section
    would send the pair to such lifts.
    """
    if ring.length != 2:
        raise ConfigError("section search is for chain rings of length 2")
    res = ring.residue_ring
    pair, base = generating_pair_gl2(res)
    base_elems = [int(x) for x in base.elements]
    if getattr(ring, "source", (None,))[0] == "trunc":
        # constant-coefficient embedding is a ring section
        emb = _constant_embedding(ring)
        images = {x: _apply_entry_map(ring, res, x, emb) for x in base_elems}
        pairs = 0
        for x in base_elems:
            for y in base_elems:
                xy = mat_mul_code(res, x, y)
                if mat_mul_code(ring, images[x], images[y]) != images[xy]:
                    raise VerificationFailed("constant section is not a hom?")
                pairs += 1
        return SectionWitness(
            "ring-constant",
            list(pair),
            [images[pair[0]], images[pair[1]]],
            base.order,
            pairs,
        )
    # generator-lift search
    m0 = mat_order(res, pair[0])
    m1 = mat_order(res, pair[1])
    lifts0 = _lifts_of(ring, pair[0])
    lifts1 = _lifts_of(ring, pair[1])
    e = identity_code(ring)
    good0 = [x for x in lifts0 if mat_pow_code(ring, x, m0) == e]
    good1 = [x for x in lifts1 if mat_pow_code(ring, x, m1) == e]
    est = len(good0) * len(good1)
    if est > 2500 and not allow_slow:
        raise SearchExhausted(
            f"{est} lift pairs to scan; rerun with the slow path enabled"
        )
    m01 = mat_order(res, mat_mul_code(res, pair[0], pair[1]))
    pairs_checked = 0
    for x in good0:
        for y in good1:
            pairs_checked += 1
            if mat_pow_code(ring, mat_mul_code(ring, x, y), m01) != e:
                continue
            closed = _closure_capped_py(ring, [x, y], base.order)
            if closed is not None and len(closed) == base.order:
                # reduces isomorphically: equal order + generators cover base
                return SectionWitness(
                    "generator-lift", list(pair), [x, y], base.order,
                    pairs_checked,
                )
    return NonSplitCertificate(
        list(pair),
        [len(lifts0), len(lifts1)],
        [len(good0), len(good1)],
        pairs_checked,
    )


def _constant_embedding(ring: PackedRing):
    """Residue index -> ring index for the constant-coefficient splitting."""
    res = ring.residue_ring
    spec, ell = ring.source[1], ring.source[2]
    zero_res = tuple([0] * spec.f)
    emb = np.zeros(res.size, dtype=np.int64)
    for i, r in enumerate(res.elements):
        const = r[0]
        elem = tuple([const] + [zero_res] * (ell - 1))
        emb[i] = ring.index_of(elem)
    return emb


def _apply_entry_map(ring_to: PackedRing, ring_from: PackedRing, code: int, emb):
    quad = decode(ring_from, code)
    return encode(ring_to, tuple(int(emb[x]) for x in quad))
