"""Integer-packed finite chain rings: dense op tables for fast enumeration.

A PackedRing indexes the K elements of a finite chain ring by 0..K-1 and
precomputes K x K multiplication/addition tables (numpy for vector ops,
nested tuples for scalar ops).  Three sources:

* from_chain_ring: O/(pi^n) built by the exact chainring arithmetic;
* truncated_poly: F_q[U]/(U^ell), the equal-characteristic chain rings;
* zmod: Z/p^k (= W(F_p)/p^k).

Desk-scale only: table construction is O(K^2) and gated at K <= 256.
"""

from __future__ import annotations

import numpy as np

from .chainring import ChainRing, PrimeFieldSpec
from .errors import CapExceeded, ConfigError

_TABLE_CAP = 256
_CACHE: dict = {}


class PackedRing:
    """Finite chain ring with integer-indexed elements and dense tables."""

    def __init__(self, label, p, residue_q, length, elements, mul_fn, add_fn,
                 repr_fn=None):
        K = len(elements)
        if K > _TABLE_CAP:
            raise CapExceeded(f"packed ring size {K} exceeds table cap {_TABLE_CAP}")
        self.label = label
        self.p = p
        self.residue_q = residue_q
        self.length = length
        self.size = K
        self.elements = list(elements)
        index = {self._key(e): i for i, e in enumerate(self.elements)}
        self._index = index
        mul = np.zeros((K, K), dtype=np.int32)
        add = np.zeros((K, K), dtype=np.int32)
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                mul[i, j] = index[self._key(mul_fn(a, b))]
                add[i, j] = index[self._key(add_fn(a, b))]
        self.mul = mul
        self.add = add
        self.mul_py = tuple(tuple(int(x) for x in row) for row in mul)
        self.add_py = tuple(tuple(int(x) for x in row) for row in add)
        self.zero = self._find_zero()
        self.one = self._find_one()
        self.neg = np.array(
            [self._neg_of(i) for i in range(K)], dtype=np.int32
        )
        self.neg_py = tuple(int(x) for x in self.neg)
        self.units = np.zeros(K, dtype=bool)
        self.inv = np.full(K, -1, dtype=np.int32)
        for i in range(K):
            row = self.mul_py[i]
            for j in range(K):
                if row[j] == self.one:
                    self.units[i] = True
                    self.inv[i] = j
                    break
        self.inv_py = tuple(int(x) for x in self.inv)
        self._repr_fn = repr_fn or (lambda e: repr(e))
        self.residue_ring = None  # set by constructors when length > 1
        self.residue_map = None
        self.additive_basis = ()

    @staticmethod
    def _key(e):
        return e if not hasattr(e, "_canonical_key") else e._canonical_key()

    def _find_zero(self):
        for i in range(self.size):
            if all(self.add_py[i][j] == j for j in range(self.size)):
                return i
        raise ConfigError("no additive identity?")

    def _find_one(self):
        for i in range(self.size):
            if all(self.mul_py[i][j] == j for j in range(self.size)):
                return i
        raise ConfigError("no multiplicative identity?")

    def _neg_of(self, i):
        for j in range(self.size):
            if self.add_py[i][j] == self.zero:
                return j
        raise ConfigError("no additive inverse?")

    def index_of(self, element):
        return self._index[self._key(element)]

    def repr_of(self, i):
        return self._repr_fn(self.elements[i])

    def order_of_unit(self, i):
        if not self.units[i]:
            raise ConfigError("not a unit")
        k, x = 1, i
        while x != self.one:
            x = self.mul_py[x][i]
            k += 1
        return k

    def unit_group_generators(self):
        """Generators of R^*: a Teichmueller-type unit plus 1 + (ideal basis)."""
        gens = []
        target = self.residue_q - 1
        res = self.residue_ring
        for i in range(self.size):
            if self.units[i] and res.order_of_unit(int(self.residue_map[i])) == target:
                gens.append(i)
                break
        for b in self.additive_basis:
            if not self.units[b]:  # b lies in the maximal ideal
                gens.append(self.add_py[self.one][b])
        return gens

    # --- constructors (cached: table building is the expensive part) ---

    @staticmethod
    def from_chain_ring(ring: ChainRing) -> "PackedRing":
        cached = _CACHE.get(("chain", ring))
        if cached is not None:
            return cached
        if ring.size > _TABLE_CAP:
            raise CapExceeded(f"|O/(pi^n)| = {ring.size} exceeds table cap")
        elems = list(ring.enumerate_elements())
        pr = PackedRing(
            f"chain(p={ring.spec.p},f={ring.spec.f},e={ring.e},n={ring.level})",
            ring.spec.p,
            ring.spec.q,
            ring.level,
            elems,
            lambda a, b: a * b,
            lambda a, b: a + b,
            repr_fn=lambda e: str(e.to_digits()),
        )
        pr.source = ("chain", ring)
        # additive basis: pi^i * p^j * (W-basis vectors), one per digit slot
        basis = []
        for i in range(ring.e):
            cap = ring.caps[i]
            for j in range(cap):
                x = (ring.pi() ** i) * (ring.from_int(ring.spec.p) ** j)
                for t in range(ring.spec.f):
                    if t == 0:
                        basis.append(pr.index_of(x))
                    else:
                        w = ring.witt.scalar(tuple(1 if s == t else 0
                                                   for s in range(ring.spec.f)))
                        basis.append(pr.index_of(x * ring.from_witt(w)))
        pr.additive_basis = tuple(dict.fromkeys(basis))
        pr_res = PackedRing.field(ring.spec)
        pr.residue_ring = pr_res
        pr.residue_map = np.array(
            [pr_res.index_of((e.residue(),)) for e in elems], dtype=np.int32
        )
        _CACHE[("chain", ring)] = pr
        return pr

    def reduce_to_level(self, m: int):
        """Quotient packed ring at chain level m plus the index map."""
        kind = getattr(self, "source", (None,))[0]
        if kind == "chain":
            ring = self.source[1]
            sub = PackedRing.from_chain_ring(ring.reduce_ring(m))
            mp = np.array(
                [sub.index_of(e.reduce_level(m)) for e in ring.enumerate_elements()],
                dtype=np.int32,
            )
            return sub, mp
        if kind == "trunc":
            spec, ell = self.source[1], self.source[2]
            sub = PackedRing.truncated_poly(spec, m)
            mp = np.array(
                [sub.index_of(e[:m]) for e in self.elements], dtype=np.int32
            )
            return sub, mp
        if kind == "zmod":
            p, k = self.source[1], self.source[2]
            sub = PackedRing.zmod(p, m)
            mp = np.array([e % (p**m) for e in self.elements], dtype=np.int32)
            return sub, mp
        raise ConfigError("ring has no reduction structure")

    @staticmethod
    def field(spec: PrimeFieldSpec) -> "PackedRing":
        return PackedRing.truncated_poly(spec, 1)

    @staticmethod
    def truncated_poly(spec: PrimeFieldSpec, ell: int) -> "PackedRing":
        """F_q[U]/(U^ell); elements are ell-tuples of residue tuples."""
        cached = _CACHE.get(("trunc", spec, ell))
        if cached is not None:
            return cached
        p, f, q = spec.p, spec.f, spec.q
        if q**ell > _TABLE_CAP:
            raise CapExceeded(f"q^ell = {q**ell} exceeds table cap")
        # residue elements as f-tuples of ints mod p
        res = []
        for idx in range(q):
            cs, t = [], idx
            for _ in range(f):
                cs.append(t % p)
                t //= p
            res.append(tuple(cs))
        mod = spec.modulus

        def fq_add(a, b):
            return tuple((x + y) % p for x, y in zip(a, b))

        def fq_mul(a, b):
            prod = [0] * (2 * f - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        prod[i + j] = (prod[i + j] + x * y) % p
            for i in range(2 * f - 2, f - 1, -1):
                c = prod[i]
                if c:
                    prod[i] = 0
                    for j in range(f):
                        prod[i - f + j] = (prod[i - f + j] - c * mod[j]) % p
            return tuple(prod[:f])

        elems = []

        def rec(k, acc):
            if k == ell:
                elems.append(tuple(acc))
                return
            for r in res:
                rec(k + 1, acc + [r])

        rec(0, [])

        def t_add(a, b):
            return tuple(fq_add(x, y) for x, y in zip(a, b))

        def t_mul(a, b):
            out = [tuple([0] * f) for _ in range(ell)]
            for i in range(ell):
                if any(a[i]):
                    for j in range(ell - i):
                        out[i + j] = fq_add(out[i + j], fq_mul(a[i], b[j]))
            return tuple(out)

        pr = PackedRing(
            f"trunc(q={q},ell={ell})", p, q, ell, elems, t_mul, t_add,
            repr_fn=lambda e: str([list(c) for c in e]),
        )
        pr.source = ("trunc", spec, ell)
        zero_res = tuple([0] * f)
        basis = []
        for i in range(ell):
            for t in range(f):
                r = tuple(1 if s == t else 0 for s in range(f))
                el = tuple(r if j == i else zero_res for j in range(ell))
                basis.append(pr.index_of(el))
        pr.additive_basis = tuple(basis)
        if ell > 1:
            pr_res = PackedRing.truncated_poly(spec, 1)
            pr.residue_ring = pr_res
            pr.residue_map = np.array(
                [pr_res.index_of(e[:1]) for e in elems], dtype=np.int32
            )
        else:
            pr.residue_ring = pr
            pr.residue_map = np.arange(pr.size, dtype=np.int32)
        _CACHE[("trunc", spec, ell)] = pr
        return pr

    @staticmethod
    def zmod(p: int, k: int) -> "PackedRing":
        """Z/p^k = W(F_p)/(p^k)."""
        cached = _CACHE.get(("zmod", p, k))
        if cached is not None:
            return cached
        K = p**k
        if K > _TABLE_CAP:
            raise CapExceeded(f"p^k = {K} exceeds table cap")
        elems = list(range(K))
        pr = PackedRing(
            f"zmod({p}^{k})", p, p, k, elems,
            lambda a, b: (a * b) % K,
            lambda a, b: (a + b) % K,
            repr_fn=str,
        )
        pr.source = ("zmod", p, k)
        pr.additive_basis = tuple(p**j % K for j in range(k))
        pr_res = PackedRing.field(PrimeFieldSpec(p))
        pr.residue_ring = pr_res
        pr.residue_map = np.array(
            [pr_res.index_of(((e % p,),)) for e in elems], dtype=np.int32
        )
        _CACHE[("zmod", p, k)] = pr
        return pr

    def __repr__(self):
        return f"PackedRing({self.label}, size={self.size})"


# --- F_q linear algebra on packed field indices ---


def fq_matmul(field: PackedRing, A, B):
    n, m = len(A), len(B[0])
    k = len(B)
    mul, add = field.mul_py, field.add_py
    out = []
    for i in range(n):
        row = []
        Ai = A[i]
        for j in range(m):
            s = field.zero
            for t in range(k):
                s = add[s][mul[Ai[t]][B[t][j]]]
            row.append(s)
        out.append(row)
    return out


def fq_identity(field: PackedRing, n):
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


def fq_mat_add(field: PackedRing, A, B):
    add = field.add_py
    return [[add[x][y] for x, y in zip(ra, rb)] for ra, rb in zip(A, B)]


def fq_mat_neg(field: PackedRing, A):
    neg = field.neg_py
    return [[neg[x] for x in row] for row in A]


def fq_rref(field: PackedRing, rows):
    """Row echelon (in place on a copy); returns (rref_rows, pivot_cols)."""
    mul, add, neg, inv = field.mul_py, field.add_py, field.neg_py, field.inv_py
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != field.zero:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        iv = inv[rows[r][c]]
        rows[r] = [mul[iv][x] for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != field.zero:
                factor = rows[i][c]
                rows[i] = [
                    add[x][mul[neg[factor]][y]] for x, y in zip(rows[i], rows[r])
                ]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def fq_rank(field: PackedRing, rows):
    return len(fq_rref(field, rows)[0])


def fq_nullspace(field: PackedRing, rows, ncols=None):
    """Basis of the right nullspace of the matrix given by rows."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    rref, pivots = fq_rref(field, rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    neg = field.neg_py
    for fcol in free:
        vec = [field.zero] * ncols
        vec[fcol] = field.one
        for r, pc in enumerate(pivots):
            vec[pc] = neg[rref[r][fcol]]
        basis.append(vec)
    return basis


def fq_mat_inv(field: PackedRing, A):
    n = len(A)
    aug = [list(A[i]) + list(fq_identity(field, n)[i]) for i in range(n)]
    rref, pivots = fq_rref(field, aug)
    if pivots[:n] != list(range(n)):
        raise ConfigError("matrix not invertible over F_q")
    return [row[n:] for row in rref[:n]]


def fq_solve(field: PackedRing, A, b):
    """One solution x of A x = b, or None."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    rref, pivots = fq_rref(field, aug)
    ncols = len(A[0])
    if ncols in pivots:
        return None
    x = [field.zero] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = rref[r][ncols]
    return x


class IncrementalEchelon:
    """Incremental row-space over F_q: insert rows, track the rank."""

    def __init__(self, field: PackedRing, width: int):
        self.field = field
        self.width = width
        self.pivot_rows = {}  # col -> normalized row

    def insert(self, row):
        """Reduce row against the basis; returns True if rank grew."""
        f = self.field
        mul, add, neg, inv = f.mul_py, f.add_py, f.neg_py, f.inv_py
        row = list(row)
        for c in range(self.width):
            x = row[c]
            if x == f.zero:
                continue
            piv = self.pivot_rows.get(c)
            if piv is None:
                iv = inv[x]
                self.pivot_rows[c] = [mul[iv][v] for v in row]
                return True
            row = [add[v][mul[neg[x]][w]] for v, w in zip(row, piv)]
        return False

    @property
    def rank(self):
        return len(self.pivot_rows)

    def rows(self):
        return [self.pivot_rows[c] for c in sorted(self.pivot_rows)]
