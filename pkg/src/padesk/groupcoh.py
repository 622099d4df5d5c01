"""H^0 and H^1 of finite matrix groups acting on finite F_q-modules.

Cocycles are parameterized by their values on the generators; a BFS over
the group assigns each element a linear expression in those unknowns via
f(xg) = f(x) + x.f(g), and every rediscovery of an element contributes
consistency equations.  Dimensions are over F_{p^f} (native field
elimination, deterministic first-nonzero pivoting).

Module actions factor through the residue representation: the adjoint and
trace-zero adjoint carry the conjugation action of the reduced matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import CapExceeded, ConfigError, VerificationFailed
from .matgrp import (
    FiniteMatGroup,
    close_generators,
    decode,
    encode,
    identity_code,
    mat_inv_code,
    mat_mul_code,
)
from .packed import (
    IncrementalEchelon,
    PackedRing,
    fq_identity,
    fq_mat_inv,
    fq_matmul,
    fq_nullspace,
    fq_rank,
    fq_rref,
    fq_solve,
)

DEFAULT_GROUP_CAP = 200_000


# --- modules ---


class GModule:
    """Finite F_q-module with a group action given elementwise.

    ``act_of(code)`` returns the m x m action matrix (rows of field indices)
    of a group element; for the adjoint-type modules it is conjugation by
    the residue matrix, so it is defined on every element directly.
    """

    def __init__(self, field: PackedRing, dim: int, act_of, label: str):
        self.field = field
        self.dim = dim
        self.act_of = act_of
        self.label = label

    def __repr__(self):
        return f"GModule({self.label}, dim={self.dim} over F_{self.field.residue_q})"


def _mat2_of_residue(group: FiniteMatGroup, code: int):
    return group.residue_mats(code)


def _gl2_basis(field: PackedRing, trace_zero: bool):
    """Basis of 2x2 matrices as length-4 coordinate vectors (a,b,c,d)."""
    one, zero = field.one, field.zero
    neg_one = field.neg_py[one]
    H = (one, zero, zero, neg_one)
    E = (zero, one, zero, zero)
    F = (zero, zero, one, zero)
    I = (one, zero, zero, one)
    return [H, E, F] if trace_zero else [I, H, E, F]


def _conj_4x4(field: PackedRing, quad):
    """Conjugation action M X M^{-1} on gl_2 as a 4x4 matrix over F_q."""
    a, b, c, d = quad
    mul, add, neg = field.mul_py, field.add_py, field.neg_py
    det = add[mul[a][d]][neg[mul[b][c]]]
    di = field.inv_py[det]
    if di < 0:
        raise ConfigError("residue matrix not invertible")
    ia, ib, ic, id_ = mul[di][d], mul[di][neg[b]], mul[di][neg[c]], mul[di][a]
    cols = []
    for (xa, xb, xc, xd) in ((field.one, field.zero, field.zero, field.zero),
                             (field.zero, field.one, field.zero, field.zero),
                             (field.zero, field.zero, field.one, field.zero),
                             (field.zero, field.zero, field.zero, field.one)):
        # M X
        ya = add[mul[a][xa]][mul[b][xc]]
        yb = add[mul[a][xb]][mul[b][xd]]
        yc = add[mul[c][xa]][mul[d][xc]]
        yd = add[mul[c][xb]][mul[d][xd]]
        # (M X) M^{-1}
        za = add[mul[ya][ia]][mul[yb][ic]]
        zb = add[mul[ya][ib]][mul[yb][id_]]
        zc = add[mul[yc][ia]][mul[yd][ic]]
        zd = add[mul[yc][ib]][mul[yd][id_]]
        cols.append((za, zb, zc, zd))
    return [[cols[j][i] for j in range(4)] for i in range(4)]


def _change_of_basis(field: PackedRing, basis):
    """Solve helper: coordinates of length-4 vectors in the given basis."""
    m = len(basis)
    Bmat = [[basis[j][i] for j in range(m)] for i in range(4)]

    def coords(vec4):
        # solve Bmat * x = vec4 (m unknowns, 4 equations)
        aug = [list(Bmat[i]) + [vec4[i]] for i in range(4)]
        rref, pivots = fq_rref(field, aug)
        if m in pivots:
            raise ConfigError("vector not in module span")
        x = [field.zero] * m
        for r, pc in enumerate(pivots):
            x[pc] = rref[r][m]
        return x

    return coords


def adjoint_module(group: FiniteMatGroup, trace_zero: bool = True) -> GModule:
    """Ad (resp. trace-zero Ad) with conjugation through the residue map."""
    fq = group.ring.residue_ring
    basis = _gl2_basis(fq, trace_zero)
    coords = _change_of_basis(fq, basis)

    def act_of(code):
        quad = _mat2_of_residue(group, code)
        big = _conj_4x4(fq, quad)
        cols = []
        for b in basis:
            img = [
                _dot(fq, big[i], b) for i in range(4)
            ]
            cols.append(coords(img))
        return [[cols[j][i] for j in range(len(basis))]
                for i in range(len(basis))]

    label = "Ad0" if trace_zero else "Ad"
    return GModule(fq, len(basis), act_of, label)


def _dot(field, row, vec):
    mul, add = field.mul_py, field.add_py
    s = field.zero
    for x, y in zip(row, vec):
        s = add[s][mul[x][y]]
    return s


def trivial_module(field: PackedRing, dim: int = 1) -> GModule:
    ident = fq_identity(field, dim)
    return GModule(field, dim, lambda code: ident, "trivial")


def scalar_module(group: FiniteMatGroup) -> GModule:
    """Scalars inside Ad: conjugation acts trivially."""
    fq = group.ring.residue_ring
    ident = fq_identity(fq, 1)
    return GModule(fq, 1, lambda code: ident, "scalar")


def submodule(parent: GModule, basis_vectors, label=None) -> GModule:
    """Module structure on an action-stable subspace (stability checked
    lazily: coordinate solving fails loudly on unstable input)."""
    fq = parent.field
    k = len(basis_vectors)
    m = parent.dim
    Bmat = [[basis_vectors[j][i] for j in range(k)] for i in range(m)]

    def coords(vec):
        aug = [list(Bmat[i]) + [vec[i]] for i in range(m)]
        rref, pivots = fq_rref(fq, aug)
        if k in pivots:
            raise ConfigError("subspace not stable under the action")
        x = [fq.zero] * k
        for r, pc in enumerate(pivots):
            x[pc] = rref[r][k]
        return x

    def act_of(code):
        A = parent.act_of(code)
        cols = []
        for j in range(k):
            vec = [_dot(fq, A[i], [basis_vectors[j][t] for t in range(m)])
                   for i in range(m)]
            cols.append(coords(vec))
        return [[cols[j][i] for j in range(k)] for i in range(k)]

    return GModule(fq, k, act_of, label or f"{parent.label}|sub{k}")


def quotient_module(parent: GModule, sub_basis, label=None) -> GModule:
    """Quotient of parent by the span of sub_basis."""
    fq = parent.field
    m = parent.dim
    k = len(sub_basis)
    # rows spanning the annihilator-style projection: complete sub_basis to a
    # basis, use the complementary coordinates
    rows = [list(v) for v in sub_basis]
    rref, pivots = fq_rref(fq, rows)
    free = [c for c in range(m) if c not in pivots]
    # projection: subtract the sub-component, read off free coordinates
    def project(vec):
        v = list(vec)
        mul, add, neg = fq.mul_py, fq.add_py, fq.neg_py
        for r, pc in enumerate(pivots):
            x = v[pc]
            if x != fq.zero:
                v = [add[vi][mul[neg[x]][wi]] for vi, wi in zip(v, rref[r])]
        return [v[c] for c in free]

    def lift(qvec):
        v = [fq.zero] * m
        for c, x in zip(free, qvec):
            v[c] = x
        return v

    def act_of(code):
        A = parent.act_of(code)
        # well-definedness: the subspace must be carried into itself
        for s in sub_basis:
            img = [_dot(fq, A[i], list(s)) for i in range(m)]
            if any(x != fq.zero for x in project(img)):
                raise ConfigError("subspace not stable; quotient undefined")
        cols = []
        for j in range(m - k):
            vec = lift([fq.one if t == j else fq.zero for t in range(m - k)])
            img = [_dot(fq, A[i], vec) for i in range(m)]
            cols.append(project(img))
        return [[cols[j][i] for j in range(m - k)] for i in range(m - k)]

    return GModule(fq, m - k, act_of, label or f"{parent.label}|quot{m-k}")


def check_adjoint_decomposition(group: FiniteMatGroup) -> bool:
    """Trace-zero projection h -> h - (tr h / 2) I is action-equivariant."""
    fq = group.ring.residue_ring
    ad = adjoint_module(group, trace_zero=False)
    mul, add, neg = fq.mul_py, fq.add_py, fq.neg_py
    two_inv = fq.inv_py[add[fq.one][fq.one]]

    def proj(vec):  # coords in basis I,H,E,F -> kill the I part
        return [fq.zero, vec[1], vec[2], vec[3]]

    for g in group.generators:
        A = ad.act_of(g)
        for j in range(4):
            e = [fq.one if t == j else fq.zero for t in range(4)]
            img = [_dot(fq, A[i], e) for i in range(4)]
            lhs = proj(img)
            pe = proj(e)
            rhs = [_dot(fq, A[i], pe) for i in range(4)]
            if lhs != rhs:
                return False
    return True


# --- cohomology ---


@dataclass
class CocycleSpace:
    dim_Z1: int
    dim_B1: int
    dim_H1: int
    basis: list  # Z1 basis vectors (concatenated generator values)
    h1_basis: list = dc_field(default_factory=list)
    group: FiniteMatGroup | None = None
    module: GModule | None = None

    def to_dict(self):
        return {
            "dim_Z1": self.dim_Z1,
            "dim_B1": self.dim_B1,
            "dim_H1": self.dim_H1,
            "basis": [[int(x) for x in b] for b in self.h1_basis],
        }


def h0(group: FiniteMatGroup, module: GModule) -> int:
    """Dimension of the simultaneous fixed space of the generators."""
    fq = module.field
    m = module.dim
    rows = []
    neg = fq.neg_py
    for g in group.generators:
        A = module.act_of(g)
        for i in range(m):
            row = [
                fq.add_py[A[i][j]][neg[fq.one] if i == j else fq.zero]
                for j in range(m)
            ]
            rows.append(row)
    if not rows:
        return m
    return m - fq_rank(fq, rows)


def _bfs_with_words(group: FiniteMatGroup, module: GModule, collect):
    """BFS over the group computing per-element action matrices and linear
    f-expressions; calls collect(expr_lhs, expr_rhs) on each closed edge."""
    fq = module.field
    m = module.dim
    gens = group.generators
    n_unknown = m * len(gens)

    def unknown_block(j):
        # f(gen_j) occupies columns j*m .. j*m+m-1
        rows = []
        for i in range(m):
            row = [fq.zero] * n_unknown
            row[j * m + i] = fq.one
            rows.append(row)
        return rows

    e = identity_code(group.ring)
    ident = fq_identity(fq, m)
    zero_expr = [[fq.zero] * n_unknown for _ in range(m)]
    data = {e: (ident, zero_expr)}
    frontier = [e]
    gen_acts = [module.act_of(g) for g in gens]
    gen_exprs = [unknown_block(j) for j in range(len(gens))]
    add, mul = fq.add_py, fq.mul_py
    while frontier:
        new = []
        for x in frontier:
            act_x, f_x = data[x]
            for j, g in enumerate(gens):
                y = mat_mul_code(group.ring, x, g)
                # f(xg) = f(x) + act(x) f(g)
                contrib = fq_matmul(fq, act_x, gen_exprs[j])
                f_y = [
                    [add[a][b] for a, b in zip(f_x[i], contrib[i])]
                    for i in range(m)
                ]
                if y in data:
                    collect(f_y, data[y][1])
                else:
                    act_y = fq_matmul(fq, act_x, gen_acts[j])
                    data[y] = (act_y, f_y)
                    new.append(y)
        frontier = new
    return data, n_unknown


def h1(group: FiniteMatGroup, module: GModule,
       cap: int = DEFAULT_GROUP_CAP) -> CocycleSpace:
    """dim H^1(G, M) with an explicit cocycle space.

    Unknowns are the values on the generators; the BFS harvests all
    consistency equations; coboundaries are subtracted at the end.
    """
    if group.order > cap:
        raise CapExceeded(f"|G| = {group.order} exceeds cap {cap}")
    fq = module.field
    m = module.dim
    n_unknown = m * len(group.generators)
    ech = IncrementalEchelon(fq, n_unknown)
    neg = fq.neg_py

    def collect(lhs, rhs):
        for i in range(m):
            row = [fq.add_py[a][neg[b]] for a, b in zip(lhs[i], rhs[i])]
            if any(x != fq.zero for x in row):
                ech.insert(row)

    _bfs_with_words(group, module, collect)
    dim_Z1 = n_unknown - ech.rank
    z1_basis = fq_nullspace(fq, ech.rows() or [[fq.zero] * n_unknown],
                            ncols=n_unknown)
    # coboundaries: (db)(g) = g.b - b
    cob_ech = IncrementalEchelon(fq, n_unknown)
    dim_B1 = 0
    for t in range(m):
        b = [fq.one if i == t else fq.zero for i in range(m)]
        vec = []
        for g in group.generators:
            A = module.act_of(g)
            gb = [_dot(fq, A[i], b) for i in range(m)]
            vec.extend(fq.add_py[x][neg[y]] for x, y in zip(gb, b))
        if cob_ech.insert(vec):
            dim_B1 += 1
    expected_b1 = m - h0(group, module)
    if dim_B1 != expected_b1:
        raise VerificationFailed(
            f"dim B1 = {dim_B1} but m - h0 = {expected_b1}"
        )
    h1_basis = []
    for z in z1_basis:
        if cob_ech.insert(z):
            h1_basis.append(z)
    dim_H1 = dim_Z1 - dim_B1
    if len(h1_basis) != dim_H1:
        raise VerificationFailed("H1 basis extraction inconsistent")
    return CocycleSpace(dim_Z1, dim_B1, dim_H1, z1_basis, h1_basis,
                        group, module)


def extend_cocycle(group: FiniteMatGroup, module: GModule, gen_values):
    """Values of the cocycle on every element, from its generator values.

    gen_values: concatenated vector (value on gen_0, value on gen_1, ...).
    Returns {code: value vector}; verifies consistency on closed edges.
    """
    fq = module.field
    m = module.dim
    vals = {}
    bad = []

    def collect(lhs, rhs):
        if lhs_val(lhs) != lhs_val(rhs):
            bad.append(True)

    def lhs_val(expr):
        out = []
        for i in range(m):
            s = fq.zero
            for c, u in zip(expr[i], gen_values):
                s = fq.add_py[s][fq.mul_py[c][u]]
            out.append(s)
        return out

    data, _ = _bfs_with_words(group, module, collect)
    if bad:
        raise VerificationFailed("generator values do not define a cocycle")
    for code, (_, expr) in data.items():
        vals[code] = lhs_val(expr)
    return vals


def cocycle_identity_holds(group, module, values, pairs):
    """Check f(gh) = f(g) + g f(h) on explicit element pairs."""
    fq = module.field
    m = module.dim
    for g, h in pairs:
        gh = mat_mul_code(group.ring, g, h)
        act_g = module.act_of(g)
        rhs = [
            fq.add_py[values[g][i]][_dot(fq, act_g[i], values[h])]
            for i in range(m)
        ]
        if values[gh] != rhs:
            return False
    return True


# --- derived reports ---


@dataclass
class ChaseReport:
    dims: dict

    def to_dict(self):
        return {k: int(v) for k, v in self.dims.items()}


def borel_subgroup(field: PackedRing, cap: int = DEFAULT_GROUP_CAP):
    """Upper-triangular Borel of GL2(F_q) as a closed group."""
    gens = []
    for u in field.unit_group_generators():
        gens.append(encode(field, (u, field.zero, field.zero, field.one)))
        gens.append(encode(field, (field.one, field.zero, field.zero, u)))
    for b in field.additive_basis:
        gens.append(encode(field, (field.one, b, field.zero, field.one)))
    return close_generators(field, gens, cap)


def unipotent_subgroup(field: PackedRing):
    gens = [encode(field, (field.one, b, field.zero, field.one))
            for b in field.additive_basis]
    return close_generators(field, gens)


def h1_invariants_dim(sub: FiniteMatGroup, module: GModule, torus_codes):
    """dim of the torus-conjugation invariants of H^1(N, M).

    The torus acts on classes by (t.f)(n) = t.f(t^{-1} n t); computed on
    explicit cocycle values and projected to the H^1 quotient.
    """
    fq = module.field
    m = module.dim
    space = h1(sub, module)
    if space.dim_H1 == 0:
        return 0, space
    # coordinates on H1: reduce a cocycle's generator values against the
    # coboundary echelon, then express in the h1 basis via a joint echelon
    n_unknown = m * len(sub.generators)
    neg = fq.neg_py

    cob = IncrementalEchelon(fq, n_unknown)
    for t in range(m):
        b = [fq.one if i == t else fq.zero for i in range(m)]
        vec = []
        for g in sub.generators:
            A = module.act_of(g)
            gb = [_dot(fq, A[i], b) for i in range(m)]
            vec.extend(fq.add_py[x][neg[y]] for x, y in zip(gb, b))
        cob.insert(vec)

    def reduce_mod_cob(vec):
        row = list(vec)
        for c in sorted(cob.pivot_rows):
            x = row[c]
            if x != fq.zero:
                piv = cob.pivot_rows[c]
                row = [fq.add_py[v][fq.mul_py[neg[x]][w]]
                       for v, w in zip(row, piv)]
        return row

    basis_red = [reduce_mod_cob(z) for z in space.h1_basis]

    def h1_coords(vec):
        red = reduce_mod_cob(vec)
        aug_rows = [[basis_red[j][i] for j in range(len(basis_red))] + [red[i]]
                    for i in range(n_unknown)]
        rref, pivots = fq_rref(fq, aug_rows)
        k = len(basis_red)
        if k in pivots:
            raise VerificationFailed("twisted cocycle left the H1 span")
        x = [fq.zero] * k
        for r, pc in enumerate(pivots):
            x[pc] = rref[r][k]
        return x

    k = len(space.h1_basis)
    rows = []
    for t in torus_codes:
        ti = mat_inv_code(sub.ring, t)
        act_t = module.act_of(t)
        for z in space.h1_basis:
            values = extend_cocycle(sub, module, z)
            tw_gen_vals = []
            for g in sub.generators:
                n_conj = mat_mul_code(sub.ring, mat_mul_code(sub.ring, ti, g), t)
                fv = values[n_conj]
                tw_gen_vals.extend(_dot(fq, act_t[i], fv) for i in range(m))
            coords = h1_coords(tw_gen_vals)
            rows.append(coords)
    # invariants: simultaneous kernel of (T_t - id)
    inv_dim = k
    all_rows = []
    idx = 0
    for t in torus_codes:
        T = [rows[idx + j] for j in range(k)]
        idx += k
        # columns of T are images of basis vectors; build T - I rows
        for i in range(k):
            row = [fq.add_py[T[j][i]][neg[fq.one] if j == i else fq.zero]
                   for j in range(k)]
            all_rows.append(row)
    if all_rows:
        inv_dim = k - fq_rank(fq, all_rows)
    return inv_dim, space


def restriction_dim_chase(group: FiniteMatGroup, borel: FiniteMatGroup,
                          module: GModule) -> ChaseReport:
    """Dimensions in the restriction-to-Borel chase, checked numerically.

    Covers dim H^1(G), dim H^1(B), restriction injectivity (index prime to
    p), and the Borel-module chain (upper nilpotent inside upper trace-zero
    inside the full module).
    """
    fq = module.field
    p = fq.p
    dims = {}
    dims["h1_G"] = h1(group, module).dim_H1
    dims["h1_B"] = h1(borel, module).dim_H1
    index = group.order // borel.order
    dims["index_G_B"] = index
    if index % p != 0 and dims["h1_G"] > dims["h1_B"]:
        raise VerificationFailed(
            "restriction cannot inject: dim H1(G) > dim H1(B)"
        )
    # chain U0 (upper nilpotent) < U1 (upper triangular trace zero) in Ad0
    one, zero = fq.one, fq.zero
    U0 = [(zero, one, zero)]            # E basis coords in (H, E, F)
    U1 = [(one, zero, zero), (zero, one, zero)]
    ad0 = module
    m_u0 = submodule(ad0, U0, "U0")
    m_u1 = submodule(ad0, U1, "U1")
    # in m_u1's coordinates (H first, E second) the U0 line is (0, 1)
    m_u1q = quotient_module(m_u1, [(fq.zero, fq.one)], "U1/U0")
    dims["h1_B_U0"] = h1(borel, m_u0).dim_H1
    dims["h1_B_U1"] = h1(borel, m_u1).dim_H1
    dims["h1_B_U1_mod_U0"] = h1(borel, m_u1q).dim_H1
    dims["h1_B_ad0_mod_U1"] = h1(borel, quotient_module(ad0, U1, "Ad0/U1")).dim_H1
    return ChaseReport(dims)


def h1_bounded(group: FiniteMatGroup, levels=None,
               cap: int = DEFAULT_GROUP_CAP):
    """dim H^1 of the truncations of a chain-ring matrix group per level."""
    ring = group.ring
    if levels is None:
        levels = list(range(1, ring.length + 1))
    out = {}
    for r in levels:
        gr = group.reduce_to_level(r) if r < ring.length else group
        module = adjoint_module(gr, trace_zero=True)
        out[r] = h1(gr, module, cap).dim_H1
    return out


def has_strong_diagonal(group: FiniteMatGroup):
    """Find diag(r, s) in a residue-field group with r/s != s/r."""
    ring = group.ring
    fq = ring.residue_ring
    if ring is not fq:
        raise ConfigError("search is over residue-field groups")
    mul, inv = fq.mul_py, fq.inv_py
    for code in group.elements:
        a, b, c, d = decode(ring, int(code))
        if b == fq.zero and c == fq.zero:
            rs = mul[a][inv[d]]
            sr = mul[d][inv[a]]
            if rs != sr:
                return (a, d)
    return None


# --- abelianization cross-check (small groups) ---


def commutator_subgroup(group: FiniteMatGroup, cap: int = 50_000):
    """[G, G] as a closed subgroup: normal closure of generator commutators."""
    ring = group.ring
    gens = group.generators
    comms = []
    for i, g in enumerate(gens):
        for h in gens[i:]:
            c = mat_mul_code(
                ring,
                mat_mul_code(ring, g, h),
                mat_inv_code(ring, mat_mul_code(ring, h, g)),
            )
            comms.append(c)
    # normal closure: conjugate by generators until stable
    current = set(comms)
    while True:
        new = set()
        for x in current:
            for g in gens:
                y = mat_mul_code(ring, mat_mul_code(ring, g, x),
                                 mat_inv_code(ring, g))
                if y not in current:
                    new.add(y)
        if not new:
            break
        current |= new
        if len(current) > cap:
            raise CapExceeded("commutator closure exceeded cap")
    return close_generators(ring, sorted(current), cap)


def hom_to_vector_group_dim(group: FiniteMatGroup, field: PackedRing,
                            module_dim: int) -> int:
    """dim_{F_q} Hom(G, M) for M = F_q^module_dim with trivial action.

    Computed through the abelianization: Hom(G^{ab}/p, F_p)-rank times the
    module dimension, divided into F_q-dimensions.
    """
    ring = group.ring
    K = commutator_subgroup(group)
    ksize = K.order
    ab_order = group.order // ksize
    # p-rank of G^{ab}: count cosets of K.(pth powers)
    p = field.p
    kset = set(int(x) for x in K.elements)
    # subgroup generated by K and p-th powers of generators
    pgens = [pow_code(ring, g, p) for g in group.generators]
    Kp = close_generators(ring, sorted(kset | set(pgens)), 100_000)
    quot = group.order // Kp.order
    # quot = p^rank
    rank = 0
    while quot > 1:
        quot //= p
        rank += 1
    f = field.residue_q
    # dim over F_q of Hom(G^ab, F_q^d) = rank * d  (each F_q summand is
    # (F_p)^f as a target, contributing f*rank F_p-dims = rank F_q-dims)
    return rank * module_dim


def pow_code(ring, x, k):
    from .matgrp import mat_pow_code

    return mat_pow_code(ring, x, k)
