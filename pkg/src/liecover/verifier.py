"""Brute-force theorem engine over explicitly enumerated finite groups.

A group is held as an indexed element table (matrix tuples or permutation
image tuples); subsets are sorted index arrays and set products go through
a dense index-multiplication table in blocks.  Everything is exact: a
search that runs out of room reports a budget outcome instead of guessing,
and a failed search is reported as not-found, never as a counterexample.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from itertools import permutations

import numpy as np

from .chevgrp import (
    CompositeAutomorphism,
    GroupContext,
    SpecialLinearContext,
    SpecialUnitaryContext,
    build_group,
    mat_identity,
    mat_inv,
    mat_mul,
    mat_scale,
    twisted_param_group,
)
from .gf import BudgetExceeded, FieldAutomorphism, FiniteField, make_field
from .solver import (
    NoCertificate,
    SurSpec,
    choose_h,
    is_surjective,
    meets_thresholds_a,
    meets_thresholds_b,
    proper_from_g0,
    solve_a,
    solve_b,
    validate_solution,
)


@dataclass(frozen=True)
class Budget:
    """Work limits for enumeration and set products.

    max_product bounds the cell count |A|*|B| of a single product step,
    table_limit the group order up to which a dense index table is built.
    """

    max_elements: int = 250_000
    max_product: int = 64_000_000
    max_seconds: float | None = None
    table_limit: int = 6500


DEFAULT_BUDGET = Budget()

# cells gathered per numpy block inside one product step
_BLOCK_CELLS = 4_000_000


class ContextMismatch(ValueError):
    pass


class _Stopwatch:
    def __init__(self, max_seconds):
        self.start = time.monotonic()
        self.max_seconds = max_seconds

    def check(self):
        if self.max_seconds is not None and time.monotonic() - self.start > self.max_seconds:
            raise BudgetExceeded("time budget exceeded")


# -- group tables


def _perm_mul(a, b):
    return tuple(a[x] for x in b)


def _perm_inv(a):
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


class FiniteGroupTable:
    """A finite group as an explicit indexed element list.

    Elements are canonical hashable encodings.  Bulk set operations need
    the dense index table (available while the order stays within the
    budget's table limit); elementwise operations never do.
    """

    def __init__(self, name, elements, mul_fn, inv_fn, identity, gens=None,
                 flavor="perm", budget=DEFAULT_BUDGET, meta=None):
        self.name = name
        self.flavor = flavor
        self.budget = budget
        self.elements = list(elements)
        self.size = len(self.elements)
        if self.size == 0:
            raise ValueError("empty element list")
        if self.size > budget.max_elements:
            raise BudgetExceeded(f"{self.size} elements exceeds the enumeration budget")
        self.index = {el: i for i, el in enumerate(self.elements)}
        if len(self.index) != self.size:
            raise ValueError("duplicate elements in universe")
        self._mul_fn = mul_fn
        self._inv_fn = inv_fn
        if identity not in self.index:
            raise ValueError("identity not in universe")
        self.identity_index = self.index[identity]
        self._gens = None
        if gens is not None:
            self._gens = sorted({self.index[g] for g in gens})
        self._table = None
        self._inv = None
        self._classes = None
        self.meta = dict(meta or {})

    # elementwise index arithmetic

    def mul(self, i, j):
        if self._table is not None:
            return int(self._table[i, j])
        return self.index[self._mul_fn(self.elements[i], self.elements[j])]

    def inv(self, i):
        if self._inv is not None:
            return int(self._inv[i])
        return self.index[self._inv_fn(self.elements[i])]

    def conj(self, i, j):
        """i conjugated by j in the ascending convention: j^-1 i j."""
        return self.mul(self.mul(self.inv(j), i), j)

    def power(self, i, n):
        if n < 0:
            return self.power(self.inv(i), -n)
        acc = self.identity_index
        base = i
        while n:
            if n & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            n >>= 1
        return acc

    # dense table

    def has_table(self):
        return self.size <= self.budget.table_limit

    def require_table(self):
        if self._table is None:
            if not self.has_table():
                raise BudgetExceeded(
                    f"group of order {self.size} exceeds the index-table limit"
                )
            self._table = self._build_table()
            eye = self.identity_index
            self._inv = np.argmax(self._table == eye, axis=1).astype(np.int32)
        return self._table

    def _build_table(self):
        # left-multiplication rows composed along a right-multiplication
        # breadth first search: row(a*g) = row(a)[row(g)]
        size = self.size
        gens = self.generating_indices()
        rows = np.full((size, size), -1, dtype=np.int32)
        rows[self.identity_index] = np.arange(size, dtype=np.int32)
        for g in gens:
            ge = self.elements[g]
            rows[g] = np.fromiter(
                (self.index[self._mul_fn(ge, e)] for e in self.elements),
                dtype=np.int32,
                count=size,
            )
        done = {self.identity_index}
        done.update(gens)
        queue = [self.identity_index] + list(gens)
        while queue:
            a = queue.pop()
            row_a = rows[a]
            for g in gens:
                c = int(row_a[g])
                if c not in done:
                    rows[c] = row_a[rows[g]]
                    done.add(c)
                    queue.append(c)
        if len(done) != size:
            raise ValueError("generators do not reach the whole universe")
        return rows

    def inverse_array(self):
        self.require_table()
        return self._inv

    def generating_indices(self):
        """A small generating set, found greedily if none was supplied."""
        if self._gens is None:
            closure = {self.identity_index}
            gens = []
            for i in range(self.size):
                if i in closure:
                    continue
                gens.append(i)
                frontier = list(closure)
                closure.add(i)
                frontier.append(i)
                while frontier:
                    a = frontier.pop()
                    for g in gens:
                        for c in (self.mul(a, g), self.mul(g, a)):
                            if c not in closure:
                                closure.add(c)
                                frontier.append(c)
                if len(closure) == self.size:
                    break
            self._gens = sorted(gens)
        return self._gens

    def conjugacy_classes(self):
        """Conjugation orbits, each a sorted index array; discovery order."""
        if self._classes is None:
            gens = self.generating_indices()
            gens = [g for g in gens] + [self.inv(g) for g in gens]
            seen = np.zeros(self.size, dtype=bool)
            classes = []
            for i in range(self.size):
                if seen[i]:
                    continue
                orbit = {i}
                frontier = [i]
                seen[i] = True
                while frontier:
                    x = frontier.pop()
                    for g in gens:
                        c = self.conj(x, g)
                        if c not in orbit:
                            orbit.add(c)
                            seen[c] = True
                            frontier.append(c)
                classes.append(np.array(sorted(orbit), dtype=np.int32))
            self._classes = classes
        return self._classes

    # sets and automorphisms

    def whole(self):
        return ElementSet(self, np.arange(self.size, dtype=np.int32))

    def subset(self, items):
        idx = [x if isinstance(x, (int, np.integer)) else self.index[x] for x in items]
        return ElementSet(self, np.array(idx, dtype=np.int32))

    def identity_set(self):
        return ElementSet(self, np.array([self.identity_index], dtype=np.int32))

    def aut_identity(self):
        return AutMap(self, np.arange(self.size, dtype=np.int32), "id", validate=False)

    def inner(self, i):
        if isinstance(i, (int, np.integer)):
            gi = int(i)
        else:
            gi = self.index[i]
        g = self.elements[gi]
        ginv = self._inv_fn(g)
        arr = np.fromiter(
            (self.index[self._mul_fn(self._mul_fn(ginv, e), g)] for e in self.elements),
            dtype=np.int32,
            count=self.size,
        )
        return AutMap(self, arr, f"inner[{gi}]", validate=False)

    def aut_from_function(self, fn, label="aut", validate=True):
        arr = np.fromiter(
            (self.index[fn(e)] for e in self.elements), dtype=np.int32, count=self.size
        )
        return AutMap(self, arr, label, validate=validate)


class ElementSet:
    """Subset of a group table: a sorted unique int32 index array."""

    __slots__ = ("group", "indices")

    def __init__(self, group, indices):
        arr = np.unique(np.asarray(indices, dtype=np.int32))
        if arr.size and (arr[0] < 0 or arr[-1] >= group.size):
            raise ValueError("index out of range")
        self.group = group
        self.indices = arr

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        return (
            isinstance(other, ElementSet)
            and self.group is other.group
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((id(self.group), self.indices.tobytes()))

    def __contains__(self, i):
        pos = int(np.searchsorted(self.indices, i))
        return pos < self.indices.size and int(self.indices[pos]) == int(i)

    def is_whole(self):
        return self.indices.size == self.group.size

    def union(self, other):
        _require_same_group(self, other)
        return ElementSet(self.group, np.union1d(self.indices, other.indices))

    def issubset(self, other):
        _require_same_group(self, other)
        return bool(np.isin(self.indices, other.indices, assume_unique=True).all())

    def decode(self):
        return [self.group.elements[int(i)] for i in self.indices]


class AutMap:
    """Automorphism of a group table as an index permutation."""

    __slots__ = ("group", "arr", "label")

    def __init__(self, group, arr, label="aut", validate=True):
        arr = np.asarray(arr, dtype=np.int32)
        if arr.shape != (group.size,):
            raise ValueError("automorphism array has wrong length")
        self.group = group
        self.arr = arr
        self.label = label
        if validate:
            self._validate()

    def _validate(self):
        g = self.group
        counts = np.bincount(self.arr, minlength=g.size)
        if not (counts == 1).all():
            raise ValueError("not a bijection")
        if int(self.arr[g.identity_index]) != g.identity_index:
            raise ValueError("identity not fixed")
        if g.has_table():
            table = g.require_table()
            if not np.array_equal(self.arr[table], table[np.ix_(self.arr, self.arr)]):
                raise ValueError("not a homomorphism")
        else:
            rng = np.random.default_rng(0)
            for _ in range(256):
                i = int(rng.integers(g.size))
                j = int(rng.integers(g.size))
                if int(self.arr[g.mul(i, j)]) != g.mul(int(self.arr[i]), int(self.arr[j])):
                    raise ValueError("not a homomorphism")

    def __call__(self, i):
        return int(self.arr[i])

    def then(self, other):
        """Apply self first, then other (left-to-right composition)."""
        if self.group is not other.group:
            raise ContextMismatch("automorphisms of different groups")
        return AutMap(self.group, other.arr[self.arr], f"{self.label};{other.label}",
                      validate=False)

    def inverse(self):
        inv = np.empty_like(self.arr)
        inv[self.arr] = np.arange(self.group.size, dtype=np.int32)
        return AutMap(self.group, inv, f"{self.label}^-1", validate=False)

    def power(self, n):
        if n < 0:
            return self.inverse().power(-n)
        out = self.group.aut_identity()
        base = self
        while n:
            if n & 1:
                out = out.then(base)
            base = base.then(base)
            n >>= 1
        return AutMap(self.group, out.arr, f"{self.label}^{n}", validate=False)

    def is_identity(self):
        return bool(np.array_equal(self.arr, np.arange(self.group.size, dtype=np.int32)))


def _require_same_group(a, b):
    if a.group is not b.group:
        raise ContextMismatch("operands live in different group contexts")


# -- set operations


def set_product(A: ElementSet, B: ElementSet, jobs: int = 1) -> ElementSet:
    """Exact product set {a*b}; left factor partitioned across workers."""
    _require_same_group(A, B)
    g = A.group
    if len(A) == 0 or len(B) == 0:
        return ElementSet(g, np.empty(0, dtype=np.int32))
    table = g.require_table()
    cells = len(A) * len(B)
    if cells > g.budget.max_product:
        raise BudgetExceeded(f"product of {len(A)}x{len(B)} exceeds the work budget")
    bix = B.indices

    def one_chunk(ix):
        if ix.size == 0:
            return np.empty(0, dtype=np.int32)
        rows = max(1, _BLOCK_CELLS // max(1, bix.size))
        acc = None
        for s in range(0, ix.size, rows):
            blk = np.unique(table[np.ix_(ix[s:s + rows], bix)])
            acc = blk if acc is None else np.union1d(acc, blk)
        return acc

    jobs = max(1, min(int(jobs), len(A)))
    if jobs == 1:
        merged = one_chunk(A.indices)
    else:
        parts = np.array_split(A.indices, jobs)
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(one_chunk, parts))
        merged = reduce(np.union1d, results)
    return ElementSet(g, merged)


def set_power(X: ElementSet, n: int, jobs: int = 1) -> ElementSet:
    """X^{*n}; stops early once the running product stabilizes."""
    if n < 1:
        raise ValueError("power must be at least 1")
    P = X
    for _ in range(n - 1):
        nxt = set_product(P, X, jobs=jobs)
        if nxt == P:
            return P
        P = nxt
    return P


def commutator_set(G: FiniteGroupTable, alpha: AutMap, domain: ElementSet | None = None) -> ElementSet:
    """{x^-1 * x^alpha : x in domain}, domain defaulting to the whole group."""
    if alpha.group is not G:
        raise ContextMismatch("automorphism of a different group")
    idx = np.arange(G.size, dtype=np.int32) if domain is None else domain.indices
    if G.has_table():
        table = G.require_table()
        inv = G.inverse_array()
        return ElementSet(G, table[inv[idx], alpha.arr[idx]])
    out = {G.mul(G.inv(int(i)), int(alpha.arr[i])) for i in idx}
    return ElementSet(G, np.array(sorted(out), dtype=np.int32))


def twisted_set(G: FiniteGroupTable, alpha: AutMap, beta: AutMap, jobs: int = 1) -> ElementSet:
    """{T_{alpha,beta}(x,y) = x^-1 y^-1 x^alpha y^beta : x, y in G}."""
    for a in (alpha, beta):
        if a.group is not G:
            raise ContextMismatch("automorphism of a different group")
    table = G.require_table()
    inv = G.inverse_array()
    cells = G.size * G.size
    if cells > G.budget.max_product:
        raise BudgetExceeded("pair grid exceeds the work budget")
    xs = np.arange(G.size, dtype=np.int32)

    def one_chunk(chunk):
        t1 = table[np.ix_(inv[chunk], inv)]
        t2 = table[t1, alpha.arr[chunk][:, None]]
        t3 = table[t2, beta.arr[None, :]]
        return np.unique(t3)

    jobs = max(1, min(int(jobs), G.size))
    rows = max(1, _BLOCK_CELLS // G.size)
    parts = [xs[s:s + rows] for s in range(0, G.size, rows)]
    if jobs == 1:
        merged = reduce(np.union1d, (one_chunk(c) for c in parts))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            merged = reduce(np.union1d, ex.map(one_chunk, parts))
    return ElementSet(G, merged)


class TwistedCommutatorMap:
    """The word map (x, y) -> x^-1 y^-1 x^alpha y^beta for a fixed pair."""

    def __init__(self, group: FiniteGroupTable, alpha: AutMap, beta: AutMap):
        for a in (alpha, beta):
            if a.group is not group:
                raise ContextMismatch("automorphism of a different group")
        self.group = group
        self.alpha = alpha
        self.beta = beta

    def apply(self, x: int, y: int) -> int:
        g = self.group
        return g.mul(g.mul(g.mul(g.inv(x), g.inv(y)), self.alpha(x)), self.beta(y))

    def image(self, jobs: int = 1) -> ElementSet:
        return twisted_set(self.group, self.alpha, self.beta, jobs=jobs)

    def audit(self, samples: int = 64, seed: int = 0) -> bool:
        """Spot check the definition against an element-level recomputation."""
        g = self.group
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            x = int(rng.integers(g.size))
            y = int(rng.integers(g.size))
            ex = g.elements[x]
            ey = g.elements[y]
            raw = g._mul_fn(
                g._mul_fn(
                    g._mul_fn(g._inv_fn(ex), g._inv_fn(ey)),
                    g.elements[self.alpha(x)],
                ),
                g.elements[self.beta(y)],
            )
            if g.index[raw] != self.apply(x, y):
                return False
        return True


def subgroup_closure(G: FiniteGroupTable, seed_indices) -> ElementSet:
    """The subgroup generated by the given elements."""
    frontier = [G.identity_index] + [int(i) for i in seed_indices]
    gens = [int(i) for i in seed_indices]
    closure = set(frontier)
    while frontier:
        a = frontier.pop()
        for g in gens:
            c = G.mul(a, g)
            if c not in closure:
                closure.add(c)
                frontier.append(c)
    return ElementSet(G, np.array(sorted(closure), dtype=np.int32))


def covering_number(G: FiniteGroupTable, X: ElementSet, jobs: int = 1):
    """Least n with X^{*n} = G, or None when no power of X covers."""
    if len(X) == 0:
        raise ValueError("covering number needs a nonempty set")
    if not subgroup_closure(G, X.indices).is_whole():
        return None
    watch = _Stopwatch(G.budget.max_seconds)
    P = X
    n = 1
    while not P.is_whole():
        if n > G.size:
            return None
        watch.check()
        P = set_product(P, X, jobs=jobs)
        n += 1
    return n


# -- ready-made groups


def group_from_context(ctx: GroupContext, budget: Budget = DEFAULT_BUDGET,
                       modulo_center: bool = False, name: str | None = None) -> FiniteGroupTable:
    """Wrap a realized matrix group (optionally modulo its center)."""
    field = ctx.field
    elems = ctx.enumerate_group()
    if name is None:
        name = context_name(ctx, modulo_center)

    if modulo_center:
        def rep(mat):
            return ctx.canonical_coset_rep(ctx.element(mat)).mat

        universe = sorted({rep(e.mat) for e in elems})

        def mul_fn(a, b):
            return rep(mat_mul(field, a, b))

        def inv_fn(a):
            return rep(mat_inv(field, a))
    else:
        universe = sorted(e.mat for e in elems)

        def mul_fn(a, b):
            return mat_mul(field, a, b)

        def inv_fn(a):
            return mat_inv(field, a)

    gens = [g.mat for g in ctx.generators()]
    if modulo_center:
        gens = [rep(g) for g in gens]
    return FiniteGroupTable(
        name, universe, mul_fn, inv_fn, mat_identity(field, ctx.n),
        gens=gens, flavor="matrix", budget=budget,
        meta={"ctx": ctx, "modulo_center": modulo_center},
    )


def context_name(ctx: GroupContext, modulo_center: bool = False) -> str:
    q = ctx.field.q
    if ctx.kind == "A":
        base = f"SL{ctx.n}({q})"
    elif ctx.kind == "2A":
        q0 = ctx.field.p ** (ctx.field.f // 2)
        base = f"SU{ctx.n}({q0})"
    elif ctx.kind == "C":
        base = f"Sp{ctx.n}({q})"
    else:
        base = f"{ctx.kind}{ctx.rank}({q})"
    return ("P" + base) if modulo_center else base


def cyclic_group(n: int, budget: Budget = DEFAULT_BUDGET) -> FiniteGroupTable:
    if n < 1:
        raise ValueError("order must be positive")
    elems = [tuple((i + k) % n for i in range(n)) for k in range(n)]
    gens = [elems[1]] if n > 1 else None
    return FiniteGroupTable(f"C{n}", sorted(elems), _perm_mul, _perm_inv,
                            tuple(range(n)), gens=gens, budget=budget)


def dihedral_group(n: int, budget: Budget = DEFAULT_BUDGET) -> FiniteGroupTable:
    """Symmetries of the n-gon on n points, order 2n."""
    if n < 3:
        raise ValueError("need at least 3 points")
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    elems = {tuple(range(n))}
    frontier = [tuple(range(n))]
    while frontier:
        a = frontier.pop()
        for g in (rot, ref):
            c = _perm_mul(a, g)
            if c not in elems:
                elems.add(c)
                frontier.append(c)
    return FiniteGroupTable(f"D{n}", sorted(elems), _perm_mul, _perm_inv,
                            tuple(range(n)), gens=[rot, ref], budget=budget)


def _perm_parity(p):
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def alternating_group(k: int, budget: Budget = DEFAULT_BUDGET) -> FiniteGroupTable:
    if k < 3 or k > 9:
        raise ValueError("supported degrees are 3..9")
    elems = [p for p in permutations(range(k)) if _perm_parity(p) == 0]
    gens = [(1, 2, 0) + tuple(range(3, k))]
    if k > 3:
        if k % 2 == 1:
            gens.append(tuple(range(1, k)) + (0,))
        else:
            gens.append((0,) + tuple(range(2, k)) + (1,))
    return FiniteGroupTable(f"Alt({k})", sorted(elems), _perm_mul, _perm_inv,
                            tuple(range(k)), gens=gens, budget=budget)


# -- report plumbing


def _record(check: str, verdict: str, **details) -> dict:
    rec = {"check": check, "verdict": verdict}
    rec.update(details)
    return rec


# -- combinatorial lemma checks


def check_lemma_31(G: FiniteGroupTable, seq=None, X: ElementSet | None = None,
                   seed: int = 0, jobs: int = 1) -> dict:
    """Pigeonhole on prefix products, and covering by the |G|-th power of
    a generating set containing the identity."""
    rng = np.random.default_rng(seed)
    if seq is None:
        seq = [int(rng.integers(G.size)) for _ in range(G.size)]
    seq = [int(s) for s in seq]
    if len(seq) < G.size:
        raise ValueError("part (i) needs at least |G| factors")
    prefix = {G.identity_index: 0}
    acc = G.identity_index
    witness = None
    for pos, s in enumerate(seq, start=1):
        acc = G.mul(acc, s)
        if acc in prefix:
            witness = (prefix[acc] + 1, pos)
            break
        prefix[acc] = pos
    if witness is None:
        return _record("lemma-3.1", "violated", part="i")
    i, j = witness
    prod = G.identity_index
    for s in seq[i - 1:j]:
        prod = G.mul(prod, s)
    if prod != G.identity_index:
        return _record("lemma-3.1", "violated", part="i", witness=[i, j])

    if X is None:
        X = G.subset([G.identity_index] + G.generating_indices())
    if G.identity_index not in X:
        raise ValueError("part (ii) needs the identity in X")
    if not subgroup_closure(G, X.indices).is_whole():
        raise ValueError("part (ii) needs X to generate the group")
    covered = set_power(X, G.size, jobs=jobs).is_whole()
    verdict = "pass" if covered else "violated"
    return _record("lemma-3.1", verdict, witness=[i, j], set_size=len(X))


def _mod_p_rank(p: int, cols) -> int:
    """Rank over GF(p) of the matrix whose columns are the given vectors."""
    if not cols:
        return 0
    mat = [list(c) for c in cols]
    d = len(mat[0])
    rank = 0
    pivots = []
    work = [[x % p for x in c] for c in mat]
    for c in work:
        vec = c[:]
        for prow, pcol in pivots:
            factor = vec[prow]
            if factor:
                vec = [(vec[r] - factor * pcol[r]) % p for r in range(d)]
        nz = next((r for r in range(d) if vec[r]), None)
        if nz is None:
            continue
        inv = pow(vec[nz], -1, p)
        vec = [(x * inv) % p for x in vec]
        pivots.append((nz, vec))
        rank += 1
        if rank == d:
            break
    return rank


def _mat_pow_mod(p, m, e):
    d = len(m)
    acc = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    base = [row[:] for row in m]
    while e:
        if e & 1:
            acc = [[sum(acc[i][k] * base[k][j] for k in range(d)) % p for j in range(d)]
                   for i in range(d)]
        base = [[sum(base[i][k] * base[k][j] for k in range(d)) % p for j in range(d)]
                for i in range(d)]
        e >>= 1
    return acc


def check_lemma_32(p: int, mats, exps) -> dict:
    """Module augmentation collapse on an elementary abelian layer: if the
    twisted-power images of g_i - 1 fill the module then the plain images
    already do."""
    if len(mats) != len(exps):
        raise ValueError("matrix and exponent lists disagree")
    if not mats:
        raise ValueError("need at least one acting element")
    d = len(mats[0])
    hyp_cols = []
    con_cols = []
    for m, e in zip(mats, exps):
        if e < 1:
            raise ValueError("exponents must be positive")
        me = _mat_pow_mod(p, m, e)
        for j in range(d):
            hyp_cols.append([(me[i][j] - (1 if i == j else 0)) % p for i in range(d)])
            con_cols.append([(m[i][j] - (1 if i == j else 0)) % p for i in range(d)])
    if _mod_p_rank(p, hyp_cols) < d:
        return _record("lemma-3.2", "vacuous", dim=d, p=p)
    ok = _mod_p_rank(p, con_cols) == d
    return _record("lemma-3.2", "pass" if ok else "violated", dim=d, p=p)


def check_lemma_33(G: FiniteGroupTable, auts, jobs: int = 1) -> dict:
    """[G, a1 a2 ... am] inside the product of the single commutator sets."""
    if not auts:
        raise ValueError("need at least one automorphism")
    composed = reduce(lambda a, b: a.then(b), auts)
    lhs = commutator_set(G, composed)
    rhs = commutator_set(G, auts[0])
    for a in auts[1:]:
        rhs = set_product(rhs, commutator_set(G, a), jobs=jobs)
    ok = lhs.issubset(rhs)
    return _record("lemma-3.3", "pass" if ok else "violated",
                   m=len(auts), lhs_size=len(lhs), rhs_size=len(rhs))


def check_lemma_34(G: FiniteGroupTable, X: ElementSet, jobs: int = 1) -> dict:
    """Hamidoune covering: generating X with 1 and |G| <= m|X| give X^{*2m} = G."""
    if G.identity_index not in X:
        raise ValueError("needs the identity in X")
    if not subgroup_closure(G, X.indices).is_whole():
        raise ValueError("needs X to generate the group")
    m = -(-G.size // len(X))
    covered = set_power(X, 2 * m, jobs=jobs).is_whole()
    return _record("lemma-3.4", "pass" if covered else "violated",
                   m=m, set_size=len(X))


def check_lemma_3x(G: FiniteGroupTable, inputs: dict) -> dict:
    """Dispatcher over the four combinatorial lemma checks."""
    which = inputs.get("lemma")
    if which == "3.1":
        return check_lemma_31(G, seq=inputs.get("seq"), X=inputs.get("X"),
                              seed=inputs.get("seed", 0), jobs=inputs.get("jobs", 1))
    if which == "3.2":
        return check_lemma_32(inputs["p"], inputs["mats"], inputs["exps"])
    if which == "3.3":
        return check_lemma_33(G, inputs["auts"], jobs=inputs.get("jobs", 1))
    if which == "3.4":
        return check_lemma_34(G, inputs["X"], jobs=inputs.get("jobs", 1))
    raise ValueError(f"unknown lemma {which!r}")


# -- twisted commutator checks


def audit_identity_laws(G: FiniteGroupTable, alpha: AutMap, beta: AutMap,
                        exhaustive: bool | None = None, samples: int = 4096,
                        seed: int = 0) -> dict:
    """The two rewriting identities behind the twisted covering argument:
    T_{a,b}(h^{-a^-1}, z^h) = [h^-1, a^-1]^-1 [z, hbar b]  and
    a [x a, b] = [x, b] a^b."""
    size = G.size
    if exhaustive is None:
        exhaustive = size * size <= G.budget.max_product and G.has_table()
    ainv = alpha.inverse()
    tmap = TwistedCommutatorMap(G, alpha, beta)

    def identity_one(h, z):
        hm = ainv(G.inv(h))
        zh = G.conj(z, h)
        lhs = tmap.apply(hm, zh)
        # [h^-1, a^-1] = h * (h^-1)^(a^-1)
        c1 = G.mul(h, ainv(G.inv(h)))
        rhs = G.mul(G.inv(c1), G.mul(G.inv(z), beta(G.conj(z, h))))
        return lhs == rhs

    def identity_two(a, x):
        xa = G.mul(x, a)
        lhs = G.mul(a, G.mul(G.inv(xa), beta(xa)))
        rhs = G.mul(G.mul(G.inv(x), beta(x)), beta(a))
        return lhs == rhs

    if exhaustive:
        pairs = ((h, z) for h in range(size) for z in range(size))
        count = size * size
    else:
        rng = np.random.default_rng(seed)
        pairs = [(int(rng.integers(size)), int(rng.integers(size))) for _ in range(samples)]
        count = samples
    for h, z in pairs:
        if not identity_one(h, z) or not identity_two(h, z):
            return _record("lemma-4.1", "violated", pair=[h, z])
    if not tmap.audit():
        return _record("lemma-4.1", "violated", reason="definition audit")
    return _record("lemma-4.1", "pass", pairs=count,
                   mode="exhaustive" if exhaustive else "sampled")


def check_theorem_twisted(G: FiniteGroupTable, pairs, jobs: int = 1,
                          audit_samples: int = 32) -> dict:
    """Cover the group by a product of twisted commutator images; records
    the minimal number of factors that suffices."""
    if not pairs:
        raise ValueError("need at least one automorphism pair")
    P = None
    minimal = None
    sizes = []
    for i, (alpha, beta) in enumerate(pairs, start=1):
        tmap = TwistedCommutatorMap(G, alpha, beta)
        if not tmap.audit(samples=audit_samples):
            return _record("thm-1.1", "violated", reason="definition audit", factor=i)
        img = tmap.image(jobs=jobs)
        sizes.append(len(img))
        P = img if P is None else set_product(P, img, jobs=jobs)
        if P.is_whole():
            minimal = i
            break
    verdict = "pass" if minimal is not None else "not-found"
    return _record("thm-1.1", verdict, minimal_d=minimal, tried=len(sizes),
                   factor_sizes=sizes)


# -- inner twisting theorem


def _beta_to_autmap(G: FiniteGroupTable, beta):
    if isinstance(beta, AutMap):
        return beta
    ctx = G.meta.get("ctx")
    if ctx is None or not isinstance(beta, CompositeAutomorphism):
        raise ValueError("cannot interpret the automorphism for this group")
    if G.meta.get("modulo_center"):
        def fn(mat):
            return ctx.canonical_coset_rep(ctx.element(beta.apply_mat(mat))).mat
    else:
        def fn(mat):
            return beta.apply_mat(mat)
    return G.aut_from_function(fn, label=str(beta.describe()))


def _class_representatives(G: FiniteGroupTable):
    return [int(c[0]) for c in G.conjugacy_classes()]


def check_theorem_autos(G: FiniteGroupTable, betas, qs, M: int | None = None,
                        strategy: str = "exhaustive-small", seed: int = 0,
                        jobs: int = 1, sample_size: int = 24) -> dict:
    """Find inner twists making the product of commutator sets cover.

    exhaustive-small: greedy, each factor's inner part chosen over all
    conjugacy class representatives.  randomized: same with a seeded
    sample of candidates.  proof-recipe: the constructive route through
    the unipotent radicals, driven by the torus recipe solver; its output
    is audited by a direct set product and never trusted.
    """
    if len(betas) != len(qs):
        raise ValueError("automorphism and repeat lists disagree")
    if M is None:
        M = len(betas)
    if M > len(betas):
        raise ValueError("more factors requested than automorphisms given")
    if strategy == "proof-recipe":
        return _autos_proof_recipe(G, betas, qs, M, jobs=jobs)
    if strategy not in ("exhaustive-small", "randomized"):
        raise ValueError(f"unknown strategy {strategy!r}")

    beta_maps = [_beta_to_autmap(G, b) for b in betas]
    watch = _Stopwatch(G.budget.max_seconds)
    if strategy == "exhaustive-small":
        candidates = _class_representatives(G)
    else:
        rng = np.random.default_rng(seed)
        candidates = sorted({int(x) for x in rng.integers(G.size, size=sample_size)})
    inner_maps = {c: G.inner(c) for c in candidates}

    P = G.identity_set()
    chosen = []
    minimal = None
    for i in range(M):
        watch.check()
        # candidate commutator sets, largest first: the first full cover
        # wins outright, which keeps the greedy pass cheap
        sets = []
        for c in candidates:
            aut = inner_maps[c].then(beta_maps[i]).power(qs[i])
            sets.append((c, commutator_set(G, aut)))
        sets.sort(key=lambda t: (-len(t[1]), t[0]))
        best = None
        for c, C in sets:
            trial = set_product(P, C, jobs=jobs)
            score = (len(trial), -c)
            if best is None or score > best[0]:
                best = (score, c, trial)
            if trial.is_whole():
                break
        _, c, P = best
        chosen.append(c)
        if minimal is None and P.is_whole():
            minimal = i + 1
            break
    if minimal is None and P.is_whole():
        minimal = M
    verdict = "pass" if minimal is not None else "not-found"
    return _record("thm-1.2", verdict, strategy=strategy, minimal_m=minimal,
                   m_budget=M, inner_witnesses=chosen,
                   covered=int(len(P)))


def _upper_unitriangular_indices(G: FiniteGroupTable, lower: bool = False):
    out = []
    for i, mat in enumerate(G.elements):
        n = len(mat)
        ok = all(mat[a][a] == 1 for a in range(n))
        if ok:
            for a in range(n):
                for b in range(n):
                    if (b < a if not lower else b > a) and mat[a][b] != 0:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            out.append(i)
    return np.array(out, dtype=np.int32)


def _diag_conj_matrix(h):
    """The conjugating diagonal of a pure torus automorphism."""
    if not isinstance(h, CompositeAutomorphism) or h.e != 0 or h.k != 0:
        raise ValueError("expected a diagonal automorphism")
    return h.conj


def _inner_torus_realization(ctx, dmat):
    """A group element inducing the same conjugation as the diagonal dmat,
    found by a central rescale; None when no rescale lands in the group."""
    field = ctx.field
    for s in sorted(field.units()):
        cand = mat_scale(field, s, dmat)
        if ctx.contains_mat(cand):
            return cand
    return None


def _autos_proof_recipe(G: FiniteGroupTable, betas, qs, M: int, jobs: int = 1) -> dict:
    """The constructive unipotent route: cover each layer of U+ and U- by
    recipe-solved torus twists, splice the factors into the sandwich
    decomposition, and re-verify everything by direct set products."""
    ctx = G.meta.get("ctx")
    if ctx is None or G.meta.get("modulo_center"):
        raise ValueError("proof-recipe needs a realized matrix group")
    if not isinstance(ctx, SpecialLinearContext) or isinstance(ctx, SpecialUnitaryContext):
        raise ValueError("proof-recipe runs on the linear contexts")
    for b in betas:
        if not isinstance(b, CompositeAutomorphism):
            raise ValueError("proof-recipe needs normal-form automorphisms")
        n = len(b.conj)
        if any(b.conj[i][j] for i in range(n) for j in range(n) if i != j):
            raise ValueError("proof-recipe needs diagonally normalized automorphisms")
    gamma = betas[0]
    q = qs[0]
    if any(q2 != q for q2 in qs) or any(not b.equals(gamma) for b in betas[1:]):
        raise ValueError("proof-recipe needs a uniform automorphism list")

    r = ctx.rank
    if r > 3:
        raise ValueError("proof-recipe layer plan covers ranks up to 3")
    plan = [("SL-first-two-layers", 1, 1)]
    if r >= 2:
        plan.append(("SL-first-two-layers", 2, 1))
    if r == 3:
        plan.append(("SL-odd-layers", 3, 2))

    # per recipe factor the certified action is that of beta^(2q); the
    # commutator-product inclusion [U, b^(2q)] <= [U, b^q][U, b^q] splits
    # each into two factors of the theorem's shape
    try:
        side_plan = []
        for kind, target, nfac in plan:
            recipe = choose_h(kind, ctx, [gamma] * nfac, [q] * nfac, target=target)
            side_plan.append((recipe, nfac))
    except NoCertificate as stuck:
        return _record("thm-1.2", "not-found", strategy="proof-recipe",
                       reason=f"recipe refused: {stuck}")

    up = ElementSet(G, _upper_unitriangular_indices(G))
    um = ElementSet(G, _upper_unitriangular_indices(G, lower=True))
    C = set_product(up, um, jobs=jobs)
    kmin = None
    P = C
    for k in range(1, 13):
        if set_product(P, up, jobs=jobs).is_whole():
            kmin = k
            break
        P = set_product(P, C, jobs=jobs)
    if kmin is None:
        return _record("thm-1.2", "not-found", strategy="proof-recipe",
                       reason="no 12-step sandwich cover")

    blocks = 2 * kmin + 1
    per_side = 2 * sum(nfac for _, nfac in side_plan)
    need = blocks * per_side
    if need > M:
        return _record("thm-1.2", "not-found", strategy="proof-recipe",
                       m_budget=M, m_needed=need)

    # build the two per-side factor lists once, then splice per block
    side_factors = {}
    inner_flags = []
    for negative in (False, True):
        factors = []
        for recipe, nfac in side_plan:
            for j in range(nfac):
                dmat = _diag_conj_matrix(recipe.hs[j])
                if negative:
                    dmat = mat_inv(ctx.field, dmat)
                witness = _inner_torus_realization(ctx, dmat)
                inner_flags.append(witness is not None)
                comp = CompositeAutomorphism(ctx, conj=dmat).compose(gamma).power(q)
                factors.append((comp, witness))
        side_factors[negative] = factors
    all_inner = all(inner_flags)

    # per-side audit: the factor commutators taken inside U cover U
    side_ok = {}
    for negative, dom in ((False, up), (True, um)):
        PU = G.identity_set()
        for comp, _w in side_factors[negative]:
            aut = _beta_to_autmap(G, comp)
            CU = commutator_set(G, aut, domain=dom)
            PU = set_product(PU, CU, jobs=jobs)
            PU = set_product(PU, CU, jobs=jobs)
        side_ok[negative] = dom.issubset(PU)

    P = G.identity_set()
    used = 0
    for b in range(blocks):
        negative = (b % 2 == 1)
        for comp, _w in side_factors[negative]:
            aut = _beta_to_autmap(G, comp)
            CS = commutator_set(G, aut)
            P = set_product(P, CS, jobs=jobs)
            P = set_product(P, CS, jobs=jobs)
            used += 2
    covered = P.is_whole()
    verdict = "pass" if (covered and all_inner) else "not-found"
    witnesses = [
        (w if w is None else [list(row) for row in w])
        for _c, w in side_factors[False] + side_factors[True]
    ]
    return _record("thm-1.2", verdict, strategy="proof-recipe",
                   minimal_m=used if covered else None, m_budget=M, kmin=kmin,
                   covered=covered, all_inner=all_inner,
                   u_plus_covered=side_ok[False], u_minus_covered=side_ok[True],
                   torus_witnesses=witnesses,
                   recipes=[rec.to_record() for rec, _n in side_plan])


# -- sandwich decomposition


def check_liebeck_pyber(G: FiniteGroupTable, jobs: int = 1, max_k: int = 12) -> dict:
    """(U+ U-)^{*k} U+ covers the group for some k <= 12; the minimal such
    k is recorded."""
    if G.flavor != "matrix" or G.meta.get("modulo_center"):
        raise ValueError("needs a realized matrix group")
    up = ElementSet(G, _upper_unitriangular_indices(G))
    um = ElementSet(G, _upper_unitriangular_indices(G, lower=True))
    C = set_product(up, um, jobs=jobs)
    P = C
    kmin = None
    for k in range(1, max_k + 1):
        if set_product(P, up, jobs=jobs).is_whole():
            kmin = k
            break
        P = set_product(P, C, jobs=jobs)
    verdict = "pass" if kmin is not None else "violated"
    return _record("liebeck-pyber", verdict, minimal_k=kmin,
                   u_plus=len(up), u_minus=len(um))


# -- unitriangular layer maps


def _field_basis(field: FiniteField):
    return [field.p ** m for m in range(field.f)]


def _field_digits(field: FiniteField, x: int):
    out = []
    for _ in range(field.f):
        out.append(x % field.p)
        x //= field.p
    return out


def check_layer_maps(ctx, g_mat) -> dict:
    """Induced maps between consecutive layers of the unitriangular group
    under commutation with g: surjective on every layer when g is proper."""
    if not isinstance(ctx, SpecialLinearContext) or isinstance(ctx, SpecialUnitaryContext):
        raise ValueError("layer maps live on the linear contexts")
    field = ctx.field
    n = ctx.n
    for a in range(n):
        if g_mat[a][a] != 1:
            raise ValueError("g must be unitriangular")
        for b in range(a):
            if g_mat[a][b] != 0:
                raise ValueError("g must be unitriangular")
    proper = all(g_mat[a][a + 1] != 0 for a in range(n - 1))
    r = ctx.rank
    g_inv = mat_inv(field, g_mat)
    basis = _field_basis(field)

    def height_positions(k):
        return [(a, a + k) for a in range(n - k)]

    layers = []
    for k in range(1, r):
        src = height_positions(k)
        tgt = height_positions(k + 1)
        cols = []
        for (a, b) in src:
            for scalar in basis:
                x = tuple(
                    tuple(
                        (1 if i == j else 0) if (i, j) != (a, b) else scalar
                        for j in range(n)
                    )
                    for i in range(n)
                )
                x_inv = mat_inv(field, x)
                comm = mat_mul(field, mat_mul(field, x_inv, g_inv), mat_mul(field, x, g_mat))
                vec = []
                for (c, d) in tgt:
                    vec.extend(_field_digits(field, comm[c][d]))
                cols.append(vec)
        dim_tgt = len(tgt) * field.f
        rank = _mod_p_rank(field.p, cols)
        layers.append({"k": k, "surjective": rank == dim_tgt, "rank": rank,
                       "target_dim": dim_tgt})
    if proper:
        ok = all(L["surjective"] for L in layers)
        verdict = "pass" if ok else "violated"
    else:
        verdict = "pass"
    return _record("linmap", verdict, proper=proper, layers=layers)


def check_lemma_91(ctx, q0_values=(1, 2), include_graph: bool = True) -> dict:
    """Proper witness construction swept over the field-graph twists."""
    if not isinstance(ctx, SpecialLinearContext) or isinstance(ctx, SpecialUnitaryContext):
        raise ValueError("the witness construction lives on the linear contexts")
    field = ctx.field
    gammas = [CompositeAutomorphism(ctx, e=e) for e in range(field.f)]
    if include_graph and ctx.rank >= 2:
        gammas += [CompositeAutomorphism(ctx, e=e, k=1) for e in range(field.f)]
    tried = 0
    for gamma in gammas:
        for q0 in q0_values:
            if field.q <= (q0 + 1) ** q0:
                continue
            u, eta, g = proper_from_g0(ctx, gamma, q0)
            tried += 1
            if not all(g.mat[a][a + 1] != 0 for a in range(ctx.n - 1)):
                return _record("lemma-9.1", "violated", e=gamma.e, k=gamma.k, q0=q0)
            if not ctx.contains_mat(u.mat):
                return _record("lemma-9.1", "violated", e=gamma.e, k=gamma.k, q0=q0,
                               reason="witness left the group")
    return _record("lemma-9.1", "pass", cases=tried)


# -- class census


def class_covering_census(G: FiniteGroupTable, q: int, jobs: int = 1,
                          top: int = 3) -> dict:
    """Large conjugacy classes of q-th powers and their covering numbers."""
    if q < 1:
        raise ValueError("power must be positive")
    classes = G.conjugacy_classes()
    if q == 1:
        is_power = np.ones(G.size, dtype=bool)
    else:
        is_power = np.zeros(G.size, dtype=bool)
        for i in range(G.size):
            is_power[G.power(i, q)] = True
    eligible = []
    for c in classes:
        if int(c[0]) == G.identity_index and len(c) == 1:
            continue
        if is_power[c].any():
            eligible.append(c)
    eligible.sort(key=lambda c: (-len(c), int(c[0])))
    log_g = math.log(G.size)
    best_ratio = max((math.log(len(c)) / log_g for c in eligible), default=0.0)
    rows = []
    for c in eligible[:top]:
        entry = {"rep": int(c[0]), "size": int(len(c)),
                 "ratio": round(math.log(len(c)) / log_g, 6)}
        try:
            entry["covering_number"] = covering_number(G, ElementSet(G, c), jobs=jobs)
        except BudgetExceeded:
            entry["covering_number"] = "budget"
        rows.append(entry)
    return _record("class-census", "pass", q=q, eligible_classes=len(eligible),
                   max_ratio=round(best_ratio, 6), table=rows)


# -- order formulas, automorphism laws, twisted rules


def check_order_formulas(specs) -> dict:
    """Enumerated orders against the closed-form count, per context."""
    rows = []
    ok = True
    for kind, rank, p, f in specs:
        ctx = build_group(kind, rank, make_field(p, f))
        enum = ctx.order()
        formula = ctx.order_formula()
        rows.append({"group": context_name(ctx), "enumerated": enum, "formula": formula})
        ok = ok and enum == formula
    return _record("order-formulas", "pass" if ok else "violated", table=rows)


def check_aut_laws(ctx, seed: int = 0) -> dict:
    """Composition, inverse and power laws of the normal-form automorphisms,
    witnessed on the generators."""
    field = ctx.field
    pool = [CompositeAutomorphism.identity(ctx)]
    for e in range(1, field.f):
        pool.append(CompositeAutomorphism(ctx, e=e))
    if ctx.kind == "A" and ctx.rank >= 2:
        pool.append(CompositeAutomorphism(ctx, k=1))
    w0 = ctx.rs.fundamental_roots()[0]
    pool.append(CompositeAutomorphism.inner(ctx, ctx.root_element(w0, 1)))
    if field.q > 2:
        pool.append(CompositeAutomorphism.inner(ctx, ctx.diag_element(w0, field.generator)))
    gens = [g.mat for g in ctx.generators()]
    checked = 0
    for a in pool:
        inv = a.inverse()
        for g in gens:
            if a.apply_mat(inv.apply_mat(g)) != g:
                return _record("aut-laws", "violated", law="inverse")
        if not a.compose(inv).is_identity():
            return _record("aut-laws", "violated", law="inverse-normal-form")
        for b in pool:
            # compose is left-to-right: a then b
            ab = a.compose(b)
            for g in gens:
                if ab.apply_mat(g) != b.apply_mat(a.apply_mat(g)):
                    return _record("aut-laws", "violated", law="compose")
                checked += 1
        two = a.power(2)
        for g in gens:
            if two.apply_mat(g) != a.apply_mat(a.apply_mat(g)):
                return _record("aut-laws", "violated", law="power")
    return _record("aut-laws", "pass", pool=len(pool), checked=checked)


def check_twisted_rules() -> dict:
    """Doubled-class product rule against matrix multiplication, plus the
    abstract folded parameter groups' axioms, all exhaustive."""
    rows = []
    for p, f in ((2, 2), (3, 2)):
        field = make_field(p, f)
        ctx = build_group("2A", 2, field)
        (omega,) = ctx.classes
        pts = ctx.a2_variety()
        for t, u in pts:
            for t2, u2 in pts:
                prod = ctx.y_element(omega, t, u) * ctx.y_element(omega, t2, u2)
                t3 = field.add(t, t2)
                u3 = field.add(field.add(u, u2), field.mul(ctx.phi_scalar(t), t2))
                if prod != ctx.y_element(omega, t3, u3):
                    return _record("twisted-mult-rules", "violated",
                                   group=context_name(ctx), pair=[[t, u], [t2, u2]])
        rows.append({"group": context_name(ctx), "variety_points": len(pts)})
        tpg = twisted_param_group("A2", field, ctx.f0)
        if not tpg.check_group():
            return _record("twisted-mult-rules", "violated", case="A2", q=field.q)
    for case, p, f, phi_exp in (("B2", 2, 1, 0), ("B2", 2, 3, 1), ("G2", 3, 1, 0)):
        tpg = twisted_param_group(case, make_field(p, f), phi_exp)
        if not tpg.check_group():
            return _record("twisted-mult-rules", "violated", case=case, q=p ** f)
        rows.append({"group": f"{case} parameter group over GF({p ** f})",
                     "elements": len(tpg.elements())})
    return _record("twisted-mult-rules", "pass", table=rows)


# -- solver family checks


_FIELD_POOL = ((2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 3),
               (11, 1), (13, 1), (2, 4), (17, 1), (19, 1), (23, 1), (3, 3),
               (5, 2), (29, 1), (31, 1), (2, 5), (37, 1), (41, 1), (43, 1),
               (47, 1), (7, 2), (53, 1), (59, 1), (61, 1), (2, 6), (67, 1),
               (71, 1), (73, 1), (79, 1), (3, 4))


def _random_spec(rng, part: str):
    p, f = _FIELD_POOL[int(rng.integers(len(_FIELD_POOL)))]
    if part == "b" and f % 2 != 0:
        f = 2 * f
        if p ** f > 81:
            p, f = 3, 2
    field = make_field(p, f)
    m = int(rng.integers(1, 7))
    q_bound = int(rng.choice([1, 1, 2, 3, 4, 6]))
    divisors = [d for d in range(1, q_bound + 1) if q_bound % d == 0]
    phi = tuple(FieldAutomorphism(field, int(rng.integers(f))) for _ in range(m))
    mu = tuple(int(rng.integers(1, field.q)) for _ in range(m))
    q_exp = tuple(int(rng.choice(divisors)) for _ in range(m))
    c_exp = tuple(int(rng.integers(1, 4)) for _ in range(m))
    half = None
    if part == "b":
        from .solver import fixed_field

        half = fixed_field(field, FieldAutomorphism(field, f // 2))
    return SurSpec(field, phi, mu, q_exp, c_exp, q_bound, half=half)


def _random_threshold_spec(rng, part: str):
    """A random family at q = c = 1 sized above the certified threshold."""
    meets = meets_thresholds_a if part == "a" else meets_thresholds_b
    while True:
        pool = [(p, f) for p, f in _FIELD_POOL if part == "a" or f % 2 == 0]
        p, f = pool[int(rng.integers(len(pool)))]
        field = make_field(p, f)
        mb = 2 if part == "a" else 6
        m = mb + 1 + int(rng.integers(4))
        phi = tuple(FieldAutomorphism(field, int(rng.integers(f))) for _ in range(m))
        mu = tuple(int(rng.integers(1, field.q)) for _ in range(m))
        half = None
        if part == "b":
            from .solver import fixed_field

            half = fixed_field(field, FieldAutomorphism(field, f // 2))
        spec = SurSpec(field, phi, mu, (1,) * m, (1,) * m, 1, half=half)
        if meets(spec):
            return spec


def _exhaustive_refusal_holds(spec) -> bool:
    """Directly confirm that no lambda vector certifies, when the search
    space is small enough to enumerate; None-like True if too large."""
    units = (
        list(spec.field.units()) if spec.half is None
        else [u for u in spec.field.units() if u in spec.half]
    )
    total = len(units) ** spec.m
    if total > 4096:
        return True
    import itertools as _it

    for lam in _it.product(units, repeat=spec.m):
        if is_surjective(spec, lam):
            return False
    return True


def check_lemma_71(part: str = "a", seed: int = 0, sweep: int = 400,
                   threshold_count: int = 1000) -> dict:
    """Random family sweep: every certificate is brute-checked surjective,
    every refusal is cross-examined, and families above the paper's
    size threshold at q = c = 1 always certify."""
    if part not in ("a", "b"):
        raise ValueError("part must be 'a' or 'b'")
    solve = solve_a if part == "a" else solve_b
    rng = np.random.default_rng(seed)
    certified = 0
    refused = 0
    for _ in range(sweep):
        spec = _random_spec(rng, part)
        try:
            sol = solve(spec)
        except NoCertificate:
            refused += 1
            if not _exhaustive_refusal_holds(spec):
                return _record(f"lemma-7.1{part}", "violated",
                               reason="refusal with existing certificate",
                               spec=spec.to_record())
            continue
        if not validate_solution(spec, sol):
            return _record(f"lemma-7.1{part}", "violated",
                           reason="certificate fails shape validation",
                           spec=spec.to_record())
        if not is_surjective(spec, sol.lam, sol.J):
            return _record(f"lemma-7.1{part}", "violated",
                           reason="certificate not surjective",
                           spec=spec.to_record())
        certified += 1

    above = 0
    while above < threshold_count:
        spec = _random_threshold_spec(rng, part)
        above += 1
        try:
            sol = solve(spec)
        except NoCertificate:
            return _record(f"lemma-7.1{part}", "violated",
                           reason="threshold family refused",
                           spec=spec.to_record())
        if not is_surjective(spec, sol.lam, sol.J):
            return _record(f"lemma-7.1{part}", "violated",
                           reason="threshold certificate not surjective",
                           spec=spec.to_record())
    return _record(f"lemma-7.1{part}", "pass", certified=certified,
                   refused=refused, threshold_families=above)
