"""Root systems of the classical families in their standard integer realizations.

Type A_r lives in the sum-zero sublattice of Z^(r+1) with fundamentals
e_i - e_{i+1}; types B_r, C_r, D_r live in Z^r.  Roots are integer
coordinate vectors; every root also carries its (integer) expansion over
the fundamentals and its height.  The pairing <w, v> = 2(w,v)/(v,v) is
exact integer arithmetic throughout.

Diagram symmetries are permutations of the fundamentals extended linearly.
Folding a symmetry tau of order d produces the partition of the positive
roots into twisted classes: u ~ v iff the projections onto the tau-fixed
subspace are positive rational multiples of each other.  Projections are
kept as exact Fractions; no floating point enters the classification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

CLASS_TYPES = ("A1", "A1xA1", "A1xA1xA1", "A2", "B2", "G2")


@dataclass(frozen=True)
class Root:
    index: int
    coords: tuple
    coeffs: tuple  # expansion over the fundamentals, integers
    height: int

    @property
    def positive(self) -> bool:
        return self.height > 0

    def len2(self) -> int:
        return sum(c * c for c in self.coords)

    def __repr__(self):
        return f"Root({self.coeffs})"


def _ambient_dim(kind: str, rank: int) -> int:
    return rank + 1 if kind == "A" else rank


def _fundamentals(kind: str, rank: int):
    dim = _ambient_dim(kind, rank)

    def e(i):  # 1-based unit vector
        v = [0] * dim
        v[i - 1] = 1
        return v

    def sub(a, b):
        return tuple(x - y for x, y in zip(a, b))

    def add(a, b):
        return tuple(x + y for x, y in zip(a, b))

    out = []
    for i in range(1, rank):
        out.append(sub(e(i), e(i + 1)))
    if kind == "A":
        out.append(sub(e(rank), e(rank + 1)))
    elif kind == "B":
        out.append(tuple(e(rank)))
    elif kind == "C":
        out.append(tuple(2 * x for x in e(rank)))
    elif kind == "D":
        if rank == 1:
            out = []
        out.append(add(e(rank - 1), e(rank)))
    return out


def _positive_coords(kind: str, rank: int):
    dim = _ambient_dim(kind, rank)

    def vec(pairs):
        v = [0] * dim
        for idx, val in pairs:
            v[idx - 1] += val
        return tuple(v)

    out = []
    if kind == "A":
        for i in range(1, rank + 1):
            for j in range(i + 1, rank + 2):
                out.append(vec([(i, 1), (j, -1)]))
        return out
    for i in range(1, rank + 1):
        for j in range(i + 1, rank + 1):
            out.append(vec([(i, 1), (j, -1)]))
            if kind in ("B", "C", "D"):
                out.append(vec([(i, 1), (j, 1)]))
    if kind == "B":
        for i in range(1, rank + 1):
            out.append(vec([(i, 1)]))
    elif kind == "C":
        for i in range(1, rank + 1):
            out.append(vec([(i, 2)]))
    return out


def _solve_coeffs(fund, target):
    """Exact expansion of target over the fundamentals (Gaussian elimination)."""
    rows = len(target)
    cols = len(fund)
    a = [[Fraction(fund[c][r]) for c in range(cols)] + [Fraction(target[r])] for r in range(rows)]
    pivots = []
    pr = 0
    for pc in range(cols):
        piv = next((r for r in range(pr, rows) if a[r][pc] != 0), None)
        if piv is None:
            continue
        a[pr], a[piv] = a[piv], a[pr]
        a[pr] = [x / a[pr][pc] for x in a[pr]]
        for r in range(rows):
            if r != pr and a[r][pc] != 0:
                fac = a[r][pc]
                a[r] = [x - fac * y for x, y in zip(a[r], a[pr])]
        pivots.append(pc)
        pr += 1
    sol = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        sol[pc] = a[r][cols]
    for r in range(pr, rows):
        if a[r][cols] != 0:
            raise ValueError("target outside the fundamental span")
    out = []
    for x in sol:
        if x.denominator != 1:
            raise ValueError("non-integral expansion")
        out.append(int(x))
    return tuple(out)


class RootSystem:
    """A classical root system with integer realization and exact pairings."""

    def __init__(self, kind: str, rank: int):
        if kind not in ("A", "B", "C", "D"):
            raise ValueError(f"unsupported type {kind!r}")
        limits = {"A": 1, "B": 2, "C": 2, "D": 4}
        if rank < limits[kind]:
            raise ValueError(f"rank {rank} invalid for type {kind}")
        self.kind = kind
        self.rank = rank
        self.fundamentals_coords = [tuple(v) for v in _fundamentals(kind, rank)]
        pos = _positive_coords(kind, rank)
        roots = []
        coord_index = {}
        for coords in pos:
            coeffs = _solve_coeffs(self.fundamentals_coords, coords)
            assert all(c >= 0 for c in coeffs)
            roots.append((coords, coeffs))
        # order: positive roots by (height, coeffs), then their negatives
        roots.sort(key=lambda rc: (sum(rc[1]), rc[1]))
        self.roots = []
        for coords, coeffs in roots:
            idx = len(self.roots)
            self.roots.append(Root(idx, coords, coeffs, sum(coeffs)))
            coord_index[coords] = idx
        n_pos = len(self.roots)
        for k in range(n_pos):
            r = self.roots[k]
            coords = tuple(-c for c in r.coords)
            coeffs = tuple(-c for c in r.coeffs)
            idx = len(self.roots)
            self.roots.append(Root(idx, coords, coeffs, -r.height))
            coord_index[coords] = idx
        self.n_positive = n_pos
        self._coord_index = coord_index
        self._fund_idx = [coord_index[c] for c in self.fundamentals_coords]

    # -- basic queries

    def positive(self):
        return self.roots[: self.n_positive]

    def fundamental_roots(self):
        return [self.roots[i] for i in self._fund_idx]

    def fundamental_index(self, k: int) -> int:
        """Root index of the k-th fundamental (0-based k)."""
        return self._fund_idx[k]

    def root_from_coords(self, coords) -> Optional[Root]:
        idx = self._coord_index.get(tuple(coords))
        return None if idx is None else self.roots[idx]

    def negative_of(self, r: Root) -> Root:
        return self.root_from_coords(tuple(-c for c in r.coords))

    def inner(self, u: Root, v: Root) -> int:
        return sum(a * b for a, b in zip(u.coords, v.coords))

    def pairing(self, u: Root, v: Root) -> int:
        """<u, v> = 2(u,v)/(v,v); always an integer."""
        num = 2 * self.inner(u, v)
        den = v.len2()
        assert num % den == 0
        return num // den

    def sum_root(self, u: Root, v: Root) -> Optional[Root]:
        return self.root_from_coords(tuple(a + b for a, b in zip(u.coords, v.coords)))

    def highest_root(self) -> Root:
        return max(self.positive(), key=lambda r: r.height)

    # -- diagram symmetries (permutations of the fundamentals)

    def identity_symmetry(self):
        return tuple(range(self.rank))

    def flip_symmetry(self):
        """The order-2 diagram symmetry, where the diagram has one."""
        if self.kind == "A":
            return tuple(self.rank - 1 - i for i in range(self.rank))
        if self.kind == "D":
            perm = list(range(self.rank))
            perm[-2], perm[-1] = perm[-1], perm[-2]
            return tuple(perm)
        raise ValueError(f"type {self.kind} has no nontrivial diagram flip")

    def triality_symmetry(self):
        if (self.kind, self.rank) != ("D", 4):
            raise ValueError("triality exists only for D4")
        # outer nodes 1 -> 3 -> 4 -> 1 (1-based), center fixed
        return (2, 1, 3, 0)

    def apply_symmetry(self, perm, r: Root) -> Root:
        new_coeffs = [0] * self.rank
        for i, c in enumerate(r.coeffs):
            new_coeffs[perm[i]] += c
        coords = [0] * len(r.coords)
        for i, c in enumerate(new_coeffs):
            for k, x in enumerate(self.fundamentals_coords[i]):
                coords[k] += c * x
        img = self.root_from_coords(coords)
        if img is None:
            raise ValueError("permutation is not a symmetry of the system")
        return img

    def symmetry_order(self, perm) -> int:
        out = 1
        cur = perm
        ident = tuple(range(self.rank))
        while tuple(cur) != ident:
            cur = tuple(perm[i] for i in cur)
            out += 1
            if out > 6:
                raise ValueError("not a small symmetry")
        return out

    def check_symmetry(self, perm) -> bool:
        try:
            for r in self.roots:
                self.apply_symmetry(perm, r)
        except ValueError:
            return False
        return True

    # -- distinguished fundamental subsets

    def delta_set(self):
        """Fundamentals used to generate the diagonal-character collapse:
        the two ends for A, the long end root for B and C, the swapped
        pair for D."""
        if self.kind == "A":
            return (0, self.rank - 1) if self.rank > 1 else (0,)
        if self.kind == "B":
            return (0,)
        if self.kind == "C":
            return (self.rank - 1,)
        return (self.rank - 2, self.rank - 1)

    def pi0_set(self):
        delta = set(self.delta_set())
        return tuple(i for i in range(self.rank) if i not in delta)

    def pi0_chain(self):
        """Order Pi0 as nu_1..nu_k with <nu_i, nu_{i+1}> = -1, ending next
        to some w in Delta with <nu_k, w> = -1, all other pairs orthogonal.
        Returns (ordered fundamental indices, the chosen w)."""
        pi0 = list(self.pi0_set())
        if not pi0:
            w = self.delta_set()[0]
            return (), w
        fund = self.fundamental_roots()

        def pair(i, j):
            return self.pairing(fund[i], fund[j])

        for w in self.delta_set():
            for order in self._chain_orders(pi0, pair):
                if pair(order[-1], w) != -1:
                    continue
                full = list(order) + [w]
                ok = True
                for a in range(len(full)):
                    for b in range(a + 1, len(full)):
                        expected = -1 if b == a + 1 else 0
                        if b == a + 1 and pair(full[a], full[b]) != expected:
                            ok = False
                        if b > a + 1 and pair(full[a], full[b]) != 0:
                            ok = False
                if ok:
                    return tuple(order), w
        raise ValueError("no admissible ordering of Pi0")

    def _chain_orders(self, pi0, pair):
        # DFS over orderings; diagram paths keep this tiny
        def extend(chain, remaining):
            if not remaining:
                yield list(chain)
                return
            for nxt in sorted(remaining):
                if pair(chain[-1], nxt) == -1:
                    yield from extend(chain + [nxt], remaining - {nxt})

        for start in sorted(pi0):
            yield from extend([start], set(pi0) - {start})

    def __repr__(self):
        return f"RootSystem({self.kind}{self.rank})"


@lru_cache(maxsize=None)
def build_root_system(kind: str, rank: int) -> RootSystem:
    return RootSystem(kind, rank)


# -- twisted classes


@dataclass(frozen=True)
class TwistedClass:
    """One equivalence class of positive roots under projection-folding."""

    members: tuple  # root indices, sorted by (height, index)
    orbit: tuple  # the tau-orbit generating the class
    class_type: str
    projection: tuple  # exact Fractions: projection of the lowest member
    doubled: bool  # A2 classes project onto {u+v, (u+v)/2}

    def size(self) -> int:
        return len(self.members)


def twisted_classes(rs: RootSystem, perm) -> tuple:
    """Partition the positive roots by positive-proportional projections
    onto the fixed space of the symmetry `perm`."""
    if not rs.check_symmetry(perm):
        raise ValueError("not a symmetry of this system")
    d = rs.symmetry_order(perm)

    def project(r: Root):
        acc = [Fraction(0)] * len(r.coords)
        cur = r
        for _ in range(d):
            acc = [a + c for a, c in zip(acc, cur.coords)]
            cur = rs.apply_symmetry(perm, cur)
        assert cur.index == r.index
        return tuple(a / d for a in acc)

    def direction(proj):
        lead = next((x for x in proj if x != 0), None)
        assert lead is not None
        scale = abs(lead)
        return tuple(x / scale for x in proj)

    buckets = {}
    for r in rs.positive():
        buckets.setdefault(direction(project(r)), []).append(r)

    classes = []
    for _, members in sorted(buckets.items(), key=lambda kv: min((m.height, m.index) for m in kv[1])):
        members.sort(key=lambda m: (m.height, m.index))
        lowest = members[0]
        orbit = []
        cur = lowest
        while cur.index not in [o.index for o in orbit]:
            orbit.append(cur)
            cur = rs.apply_symmetry(perm, cur)
        size = len(members)
        if size == 1:
            ctype = "A1"
        elif size == 2:
            assert rs.pairing(members[0], members[1]) == 0
            ctype = "A1xA1"
        elif size == 3:
            pairwise = [
                rs.pairing(members[a], members[b]) for a in range(3) for b in range(3) if a != b
            ]
            ctype = "A1xA1xA1" if all(x == 0 for x in pairwise) else "A2"
        else:
            raise ValueError(f"unexpected twisted class of size {size}")
        classes.append(
            TwistedClass(
                members=tuple(m.index for m in members),
                orbit=tuple(o.index for o in orbit),
                class_type=ctype,
                projection=project(lowest),
                doubled=(ctype == "A2"),
            )
        )
    total = sum(c.size() for c in classes)
    assert total == rs.n_positive
    return tuple(classes)


# -- lattice characters


class LatticeCharacter:
    """A multiplicative character of the root lattice with unit values.

    Determined by its values on the fundamentals; evaluation on any root
    uses the integer expansion, so chi(u + v) = chi(u) chi(v) holds by
    construction.
    """

    def __init__(self, rs: RootSystem, field, values):
        if len(values) != rs.rank:
            raise ValueError("need one unit value per fundamental")
        for v in values:
            if v % field.q == 0:
                raise ValueError("character values must be units")
        self.rs = rs
        self.field = field
        self.values = tuple(v % field.q for v in values)

    def eval(self, r: Root) -> int:
        out = 1
        for v, c in zip(self.values, r.coeffs):
            if c:
                out = self.field.mul(out, self.field.pow(v, c))
        return out

    def __mul__(self, other: "LatticeCharacter") -> "LatticeCharacter":
        assert self.rs is other.rs and self.field == other.field
        vals = tuple(self.field.mul(a, b) for a, b in zip(self.values, other.values))
        return LatticeCharacter(self.rs, self.field, vals)

    def inverse(self) -> "LatticeCharacter":
        return LatticeCharacter(self.rs, self.field, tuple(self.field.inv(v) for v in self.values))

    def is_trivial_on(self, fund_indices) -> bool:
        return all(self.values[i] == 1 for i in fund_indices)

    def __eq__(self, other):
        return (
            isinstance(other, LatticeCharacter)
            and self.rs is other.rs
            and self.field == other.field
            and self.values == other.values
        )

    def __hash__(self):
        return hash((id(self.rs), self.field.p, self.field.f, self.values))

    def __repr__(self):
        return f"LatticeCharacter{self.values}"


def character_from_assignment(rs: RootSystem, field, assignment: dict) -> LatticeCharacter:
    """Character equal to the given unit on the listed fundamentals, 1 elsewhere."""
    values = [1] * rs.rank
    for k, v in assignment.items():
        values[k] = v
    return LatticeCharacter(rs, field, values)


# -- the distinct-length split used by the residual-product subgroups


@dataclass(frozen=True)
class SigmaSplit:
    """Positive roots labeled by total multiplicity of the distinguished
    fundamental(s); label 0 cuts out a type-A subsystem."""

    delta: int  # fundamental index
    delta2: int  # equal to delta unless two roots are distinguished
    t_label: tuple  # one entry per positive root index
    sigma_prime_pos: tuple  # indices of positive roots with label 0
    levi_rank: int


def sigma_prime_split(rs: RootSystem, twisted: bool = False) -> SigmaSplit:
    if rs.kind == "A":
        if not twisted:
            raise ValueError("no split for untwisted type A")
        m = (rs.rank + 1) // 2
        if rs.rank % 2 == 1:  # odd rank: single middle node
            delta = delta2 = m - 1
        else:
            delta, delta2 = m - 1, m
    elif rs.kind in ("B", "C"):
        delta = delta2 = rs.rank - 1  # the unique root of distinct length
    else:  # D, twisted or not: the swapped pair
        delta, delta2 = rs.rank - 2, rs.rank - 1
    labels = []
    for r in rs.positive():
        t = r.coeffs[delta] + (r.coeffs[delta2] if delta2 != delta else 0)
        labels.append(t)
    assert all(0 <= t <= 2 for t in labels)
    prime = tuple(i for i, t in enumerate(labels) if t == 0)
    expected_s = {
        "A": (rs.rank + 1) // 2 - 1,
        "B": rs.rank - 1,
        "C": rs.rank - 1,
        "D": rs.rank - 2,
    }[rs.kind]
    # label-0 positive roots form a type-A positive system: one chain of
    # rank s, except twisted type A where the fold swaps two such chains
    chains = 2 if rs.kind == "A" else 1
    assert len(prime) == chains * expected_s * (expected_s + 1) // 2, (len(prime), expected_s)
    return SigmaSplit(delta, delta2, tuple(labels), prime, expected_s)


# -- serialization


def serialize_table(rs: RootSystem, perm=None) -> str:
    """Stable text table of the positive roots, for golden-file comparison."""
    lines = [f"# {rs.kind}{rs.rank}"]
    class_of = {}
    if perm is not None:
        for ci, cls in enumerate(twisted_classes(rs, perm)):
            for m in cls.members:
                class_of[m] = ci
    for r in rs.positive():
        parts = [
            f"coeffs={','.join(map(str, r.coeffs))}",
            f"coords={','.join(map(str, r.coords))}",
            f"ht={r.height}",
            f"len2={r.len2()}",
        ]
        if perm is not None:
            parts.append(f"class={class_of[r.index]}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
