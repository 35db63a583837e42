"""Matrix groups of types SL, SU and Sp over small finite fields.

Realizations:
  * type "A": SL_{r+1}(F), upper-triangular Borel, root element
    I + t E_ij for e_i - e_j.
  * type "2A": SU_{r+1}, the fixed points of sigma = gamma o phi inside
    SL_{r+1}(L) where |L| = p^{2f}, phi is the entrywise p^f Frobenius
    and gamma is inverse-transpose twisted by the signed antidiagonal A,
    A[k, n+1-k] = (-1)^k.  The signs make the graph symmetry act with
    coefficient +1 on every fundamental root subgroup; the Hermitian
    form is the signed antidiagonal matrix (equivalent to the unsigned
    one, and the Borel stays upper triangular).
  * type "C": Sp_{2r}(F) for the form J[i, 2r+1-i] = +1 when i <= r,
    -1 above.

All structure constants (graph coefficients, nilpotent root bases,
torus action laws) are solved from the matrices at construction time
and re-checked by assertion; nothing is imposed by convention that the
realization can decide.

Element encoding: a matrix is a tuple of row tuples of field encodings;
its canonical integer key is the base-q digit string read row-major.
"""

from __future__ import annotations

import itertools
from collections import deque
from functools import lru_cache

from .gf import BudgetExceeded, FiniteField, make_field
from .roots import (
    LatticeCharacter,
    Root,
    RootSystem,
    TwistedClass,
    build_root_system,
    character_from_assignment,
    sigma_prime_split,
    twisted_classes,
)

DEFAULT_ENUM_BUDGET = 2 * 10**7


# -- matrix helpers over a FiniteField (plain int encodings)


def mat_identity(field: FiniteField, n: int):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(field: FiniteField, a, b):
    bt = tuple(zip(*b))
    if field._dense:
        addt = field._add_t
        mult = field._mul_t
        out = []
        for row in a:
            orow = []
            for col in bt:
                acc = 0
                for x, y in zip(row, col):
                    if x and y:
                        acc = addt[acc][mult[x][y]]
                orow.append(acc)
            out.append(tuple(orow))
        return tuple(out)
    add = field.add
    mul = field.mul
    out = []
    for row in a:
        orow = []
        for col in bt:
            acc = 0
            for x, y in zip(row, col):
                if x and y:
                    acc = add(acc, mul(x, y))
            orow.append(acc)
        out.append(tuple(orow))
    return tuple(out)


def mat_transpose(a):
    return tuple(zip(*a))


def mat_frob(field: FiniteField, a, e: int = 1):
    return tuple(tuple(field.frob(x, e) for x in row) for row in a)


def mat_scale(field: FiniteField, c: int, a):
    return tuple(tuple(field.mul(c, x) for x in row) for row in a)


def mat_inv(field: FiniteField, a):
    n = len(a)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = field.inv(aug[col][col])
        aug[col] = [field.mul(inv, x) for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                fac = aug[r][col]
                aug[r] = [field.sub(x, field.mul(fac, y)) for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def mat_det(field: FiniteField, a):
    n = len(a)
    m = [list(row) for row in a]
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = field.neg(det)
        det = field.mul(det, m[col][col])
        inv = field.inv(m[col][col])
        for r in range(col + 1, n):
            if m[r][col]:
                fac = field.mul(inv, m[r][col])
                m[r] = [field.sub(x, field.mul(fac, y)) for x, y in zip(m[r], m[col])]
    return det


def encode_mat(field: FiniteField, a) -> int:
    key = 0
    q = field.q
    for row in a:
        for x in row:
            key = key * q + x
    return key


class GroupElement:
    """An n x n matrix over the context field, hashable by integer key."""

    __slots__ = ("ctx", "mat", "key")

    def __init__(self, ctx, mat, key=None):
        self.ctx = ctx
        self.mat = mat
        self.key = encode_mat(ctx.field, mat) if key is None else key

    def __mul__(self, other):
        assert self.ctx is other.ctx
        return GroupElement(self.ctx, mat_mul(self.ctx.field, self.mat, other.mat))

    def inverse(self):
        return GroupElement(self.ctx, mat_inv(self.ctx.field, self.mat))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.ctx.identity()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def commutator(self, other):
        return self.inverse() * other.inverse() * self * other

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement) and self.ctx is other.ctx and self.key == other.key
        )

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"GroupElement({self.mat})"


class GroupContext:
    """Base class for the three matrix families; immutable once built."""

    kind = "?"
    form_name = "none"

    def __init__(self, rank: int, field: FiniteField, budget: int = DEFAULT_ENUM_BUDGET):
        self.rank = rank
        self.field = field
        self.budget = budget
        self._enum = None
        self._center = None

    def identity(self):
        return GroupElement(self, mat_identity(self.field, self.n))

    def element(self, mat, check: bool = False):
        if check and not self.contains_mat(mat):
            raise ValueError("matrix not in group")
        return GroupElement(self, mat)

    def contains_mat(self, mat) -> bool:
        return mat_det(self.field, mat) == 1

    def describe(self) -> dict:
        return {
            "type": self.kind,
            "rank": self.rank,
            "p": self.field.p,
            "f": self.field.f,
            "form": self.form_name,
        }

    def enumerate_group(self, budget: int | None = None):
        """Breadth-first closure of the generators, sorted by key; cached."""
        if self._enum is not None:
            return self._enum
        cap = self.budget if budget is None else budget
        field = self.field
        gens = [g.mat for g in self.generators()]
        start = mat_identity(field, self.n)
        seen = {encode_mat(field, start): start}
        queue = deque([start])
        while queue:
            m = queue.popleft()
            for g in gens:
                prod = mat_mul(field, m, g)
                key = encode_mat(field, prod)
                if key not in seen:
                    if len(seen) >= cap:
                        raise BudgetExceeded(f"group closure exceeds {cap} elements")
                    seen[key] = prod
                    queue.append(prod)
        self._enum = [GroupElement(self, seen[k], k) for k in sorted(seen)]
        return self._enum

    def order(self) -> int:
        return len(self.enumerate_group())

    def center(self):
        """The scalar matrices lying in the group."""
        if self._center is None:
            out = []
            for z in self.field.units():
                mat = tuple(
                    tuple(z if i == j else 0 for j in range(self.n)) for i in range(self.n)
                )
                if self.contains_mat(mat):
                    out.append(GroupElement(self, mat))
            self._center = out
        return self._center

    def canonical_coset_rep(self, elem: GroupElement) -> GroupElement:
        """Deterministic representative of elem modulo the center: scale
        the first nonzero entry to 1 when a central scalar does it, else
        take the least-key central multiple."""
        first = next(x for row in elem.mat for x in row if x)
        inv = self.field.inv(first)
        scalars = [z.mat[0][0] for z in self.center()]
        if inv in scalars:
            return GroupElement(self, mat_scale(self.field, inv, elem.mat))
        best = min(
            (mat_scale(self.field, z, elem.mat) for z in scalars),
            key=lambda m: encode_mat(self.field, m),
        )
        return GroupElement(self, best)


def _product_set(ctx, factors):
    """All products f1 f2 ... fk with fi drawn from the i-th factor list
    of matrices; returns GroupElements, deduplicated."""
    out = [mat_identity(ctx.field, ctx.n)]
    for factor in factors:
        nxt = {}
        for m in out:
            for g in factor:
                prod = mat_mul(ctx.field, m, g)
                nxt[encode_mat(ctx.field, prod)] = prod
        out = list(nxt.values())
    return [GroupElement(ctx, m) for m in out]


def _diag_matrix(field, diag):
    n = len(diag)
    return tuple(tuple(diag[i] if i == j else 0 for j in range(n)) for i in range(n))


# -- type A


class SpecialLinearContext(GroupContext):
    kind = "A"
    form_name = "none"

    def __init__(self, rank, field, budget=DEFAULT_ENUM_BUDGET):
        super().__init__(rank, field, budget)
        self.n = rank + 1
        self.rs = build_root_system("A", rank)
        self.field0 = field
        self._gamma_A = self._build_gamma_matrix()
        self._gamma_A_inv = mat_inv(field, self._gamma_A)
        self._eps = self._solve_graph_signs()

    def _build_gamma_matrix(self):
        n = self.n
        mat = [[0] * n for _ in range(n)]
        for k in range(1, n + 1):
            mat[k - 1][n - k] = 1 if k % 2 == 0 else self.field.neg(1)
        return tuple(tuple(row) for row in mat)

    def root_positions(self, w: Root):
        return w.coords.index(1), w.coords.index(-1)

    def param_slot(self, w: Root):
        """Matrix position carrying the parameter of root_matrix(w, t)."""
        return self.root_positions(w)

    def root_matrix(self, w: Root, t: int):
        i, j = self.root_positions(w)
        mat = [list(row) for row in mat_identity(self.field, self.n)]
        mat[i][j] = t
        return tuple(tuple(row) for row in mat)

    def root_element(self, w: Root, t: int) -> GroupElement:
        if not isinstance(w, Root):
            raise TypeError("root elements of this type take a Root")
        return GroupElement(self, self.root_matrix(w, t % self.field.q))

    def coroot_diag(self, v: Root, lam: int):
        """Diagonal of h_v(lambda) under x^h = h^{-1} x h: entry
        lambda^{-c_k} at the coroot coordinate c_k."""
        coroot = tuple(2 * c // v.len2() for c in v.coords)
        return _diag_matrix(self.field, [self.field.pow(lam, -c) for c in coroot])

    def diag_element(self, v: Root, lam: int) -> GroupElement:
        lam %= self.field.q
        if lam == 0:
            raise ValueError("lambda must be a unit")
        mat = self.coroot_diag(v, lam)
        hinv = mat_inv(self.field, mat)
        for w in self.rs.fundamental_roots():
            got = mat_mul(self.field, hinv, mat_mul(self.field, self.root_matrix(w, 1), mat))
            want = self.root_matrix(w, self.field.pow(lam, self.rs.pairing(w, v)))
            assert got == want
        return GroupElement(self, mat)

    def torus_matrix(self, chi: LatticeCharacter):
        """GL diagonal realizing chi: conjugation sends X_w(t) to
        X_w(chi(w) t) for every root w.  Checked before returning."""
        d = [1] * self.n
        for j in range(1, self.n):
            coords = [0] * self.n
            coords[0] = 1
            coords[j] = -1
            d[j] = chi.eval(self.rs.root_from_coords(tuple(coords)))
        dmat = _diag_matrix(self.field, d)
        dinv = mat_inv(self.field, dmat)
        for w in self.rs.roots:
            got = mat_mul(self.field, dinv, mat_mul(self.field, self.root_matrix(w, 1), dmat))
            assert got == self.root_matrix(w, chi.eval(w))
        return dmat

    # graph twist

    def gamma_mat(self, mat):
        """Inverse-transpose twisted by the signed antidiagonal."""
        inv_t = mat_transpose(mat_inv(self.field, mat))
        return mat_mul(self.field, self._gamma_A, mat_mul(self.field, inv_t, self._gamma_A_inv))

    def graph_flip(self):
        return self.rs.flip_symmetry() if self.rank > 1 else self.rs.identity_symmetry()

    def _solve_graph_signs(self):
        flip = self.graph_flip()
        eps = {}
        for w in self.rs.roots:
            img = self.gamma_mat(self.root_matrix(w, 1))
            target = self.rs.apply_symmetry(flip, w)
            i, j = self.root_positions(target)
            coeff = img[i][j]
            assert img == self.root_matrix(target, coeff)
            assert coeff in (1, self.field.neg(1))
            eps[w.index] = coeff
        for wf in self.rs.fundamental_roots():
            assert eps[wf.index] == 1
        return eps

    def epsilon(self, w: Root) -> int:
        """Graph coefficient of w, solved from the realization."""
        return self._eps[w.index]

    def generators(self):
        out = []
        basis = [self.field.p**k for k in range(self.field.f)]
        for w in self.rs.fundamental_roots():
            for t in basis:
                out.append(self.root_element(w, t))
                out.append(self.root_element(self.rs.negative_of(w), t))
        return out

    def order_formula(self) -> int:
        q = self.field.q
        n = self.n
        out = q ** (n * (n - 1) // 2)
        for i in range(2, n + 1):
            out *= q**i - 1
        return out

    def special_subgroup(self, kind: str, k: int = 1, omega=None):
        return _special_subgroup_sl(self, kind, k, omega)


def _unitriangular(ctx, min_level: int, region=None, sign: int = +1):
    """Unitriangular matrices (upper for sign +1, lower otherwise) with
    support restricted to region and to diagonals at distance >= min_level."""
    slots = []
    for i in range(ctx.n):
        for j in range(ctx.n):
            lev = (j - i) if sign > 0 else (i - j)
            if lev >= min_level and (region is None or (i, j) in region):
                slots.append((i, j))
    elems = []
    for values in itertools.product(range(ctx.field.q), repeat=len(slots)):
        mat = [list(row) for row in mat_identity(ctx.field, ctx.n)]
        for (i, j), v in zip(slots, values):
            mat[i][j] = v
        elems.append(GroupElement(ctx, tuple(tuple(row) for row in mat)))
    return elems


def _v_region(n: int, level: int):
    """Support region of the level-th layer of the hook subgroup: first
    row from column level on, last column down to row n-1-level."""
    return {(0, j) for j in range(level, n)} | {(i, n - 1) for i in range(n - level)}


def _special_subgroup_sl(ctx, kind, k=1, omega=None):
    n = ctx.n
    if kind == "U+":
        return _unitriangular(ctx, 1)
    if kind == "U-":
        return _unitriangular(ctx, 1, sign=-1)
    if kind == "U_k":
        return _unitriangular(ctx, k)
    if kind == "V":
        return _unitriangular(ctx, 1, region=_v_region(n, 1))
    if kind == "V_k":
        return _unitriangular(ctx, 1, region=_v_region(n, k))
    if kind == "W_omega":
        members = (
            [ctx.rs.roots[i] for i in omega.members] if isinstance(omega, TwistedClass) else [omega]
        )
        factors = [[ctx.root_matrix(w, t) for t in range(ctx.field.q)] for w in members]
        return _product_set(ctx, factors)
    if kind == "H":
        out = []
        for values in itertools.product(ctx.field.units(), repeat=n - 1):
            det = 1
            for v in values:
                det = ctx.field.mul(det, v)
            out.append(
                GroupElement(ctx, _diag_matrix(ctx.field, list(values) + [ctx.field.inv(det)]))
            )
        return out
    if kind == "D0-reps":
        gen = ctx.field.generator
        out = []
        for d in ctx.rs.delta_set():
            chi = character_from_assignment(ctx.rs, ctx.field, {d: gen})
            out.append(GroupElement(ctx, ctx.torus_matrix(chi)))
        return out
    raise ValueError(f"unsupported subgroup kind {kind!r} for type {ctx.kind}")


# -- type 2A


class SpecialUnitaryContext(SpecialLinearContext):
    kind = "2A"
    form_name = "signed-antidiag"

    def __init__(self, rank, field, budget=DEFAULT_ENUM_BUDGET):
        if rank < 2:
            raise ValueError("twisted type A needs rank at least 2")
        if field.f % 2 != 0:
            raise ValueError("twisted type A needs a field of even degree")
        super().__init__(rank, field, budget)
        self.f0 = field.f // 2
        self.q0 = field.p**self.f0
        self.field0 = make_field(field.p, self.f0)
        self.tau = self.rs.flip_symmetry()
        self.classes = twisted_classes(self.rs, self.tau)
        self._class_cache = {}

    # sigma machinery

    def phi_mat(self, mat):
        return mat_frob(self.field, mat, self.f0)

    def phi_scalar(self, t: int) -> int:
        return self.field.frob(t, self.f0)

    def sigma(self, mat):
        return self.gamma_mat(self.phi_mat(mat))

    def contains_mat(self, mat) -> bool:
        return mat_det(self.field, mat) == 1 and self.sigma(mat) == mat

    def trace_zero_line(self):
        """Solutions of t + t^phi = 0 in the big field."""
        return [t for t in range(self.field.q) if self.field.add(t, self.phi_scalar(t)) == 0]

    def norm_value(self, t: int) -> int:
        return self.field.mul(t, self.phi_scalar(t))

    # twisted root elements

    def class_of_root(self, w: Root) -> TwistedClass:
        idx = w.index if w.positive else self.rs.negative_of(w).index
        for cls in self.classes:
            if idx in cls.members:
                return cls
        raise ValueError("root not covered by any twisted class")

    def _class_legs(self, omega: TwistedClass, negative: bool):
        """(v, w, top) for a doubled class; v is the leg meeting the
        middle basis vector from the left."""
        members = [self.rs.roots[i] for i in omega.members]
        if negative:
            members = [self.rs.negative_of(m) for m in members]
        top = max(members, key=lambda m: abs(m.height))
        legs = [m for m in members if m is not top]
        mid = self.n // 2  # 0-based middle position, n odd here
        side = 1 if negative else -1
        v = next(m for m in legs if m.coords.index(side) == mid)
        w = next(m for m in legs if m is not v)
        return v, w, top

    def root_element(self, omega, *params) -> GroupElement:
        """Twisted one-parameter element of the class omega.

        Arity by class type: singleton (t) with t on the fixed line
        t = eps t^phi; pair (t) with t in the big field; doubled (t, u)
        on the variety t^{1+phi} = u + u^phi.  A plain Root gives the
        ambient untwisted element instead."""
        if isinstance(omega, Root):
            return super().root_element(omega, *params)
        return self.y_element(omega, *params)

    def y_element(self, omega: TwistedClass, *params, negative: bool = False) -> GroupElement:
        q = self.field.q
        if omega.class_type == "A2":
            if len(params) != 2:
                raise ValueError("doubled class takes parameters (t, u)")
            t, u = (x % q for x in params)
            if self.norm_value(t) != self.field.add(u, self.phi_scalar(u)):
                raise ValueError("parameters violate t^{1+phi} = u + u^phi")
            v, w, top = self._class_legs(omega, negative)
            eps1 = self.epsilon(v)
            mat = [list(row) for row in mat_identity(self.field, self.n)]
            vi, vj = self.root_positions(v)
            wi, wj = self.root_positions(w)
            ti, tj = self.root_positions(top)
            mat[vi][vj] = t
            mat[wi][wj] = self.field.mul(eps1, self.phi_scalar(t))
            mat[ti][tj] = self.field.mul(eps1, self.phi_scalar(u))
            out = tuple(tuple(row) for row in mat)
        elif omega.class_type in ("A1xA1", "A1xA1xA1"):
            if len(params) != 1:
                raise ValueError("orbit class takes one parameter")
            cur = params[0] % q
            out = mat_identity(self.field, self.n)
            for idx in omega.orbit:
                w = self.rs.roots[idx]
                if negative:
                    w = self.rs.negative_of(w)
                out = mat_mul(self.field, out, self.root_matrix(w, cur))
                cur = self.field.mul(self.epsilon(w), self.phi_scalar(cur))
        else:  # singleton
            if len(params) != 1:
                raise ValueError("singleton class takes one parameter")
            t = params[0] % q
            w = self.rs.roots[omega.members[0]]
            if negative:
                w = self.rs.negative_of(w)
            if self.field.mul(self.epsilon(w), self.phi_scalar(t)) != t:
                raise ValueError("parameter off the fixed line of the singleton class")
            out = self.root_matrix(w, t)
        assert self.sigma(out) == out
        return GroupElement(self, out)

    def singleton_params(self, omega: TwistedClass, negative: bool = False):
        w = self.rs.roots[omega.members[0]]
        if negative:
            w = self.rs.negative_of(w)
        eps = self.epsilon(w)
        return [t for t in range(self.field.q) if self.field.mul(eps, self.phi_scalar(t)) == t]

    def class_params(self, omega: TwistedClass, mat, negative: bool = False) -> tuple:
        """Invert y_element: read the parameter tuple back off a matrix.

        The matrix must be an exact element of the class subgroup; this
        is re-asserted by rebuilding it from the parameters read."""
        if omega.class_type == "A2":
            v, w, top = self._class_legs(omega, negative)
            vi, vj = self.root_positions(v)
            ti, tj = self.root_positions(top)
            eps1 = self.epsilon(v)
            t = mat[vi][vj]
            u = self.phi_scalar(self.field.mul(self.field.inv(eps1), mat[ti][tj]))
            params = (t, u)
        else:
            if omega.class_type in ("A1xA1", "A1xA1xA1"):
                w = self.rs.roots[omega.orbit[0]]
            else:
                w = self.rs.roots[omega.members[0]]
            if negative:
                w = self.rs.negative_of(w)
            wi, wj = self.root_positions(w)
            params = (mat[wi][wj],)
        assert self.y_element(omega, *params, negative=negative).mat == mat
        return params

    def a2_variety(self):
        """All (t, u) with t^{1+phi} = u + u^phi."""
        out = []
        for t in range(self.field.q):
            tgt = self.norm_value(t)
            for u in range(self.field.q):
                if self.field.add(u, self.phi_scalar(u)) == tgt:
                    out.append((t, u))
        return out

    def class_subgroup(self, omega: TwistedClass, negative: bool = False):
        """All fixed elements supported on the class: the one-parameter
        (or two-parameter) twisted root subgroup."""
        key = (omega.members, negative)
        if key not in self._class_cache:
            if omega.class_type == "A2":
                elems = [
                    self.y_element(omega, t, u, negative=negative) for t, u in self.a2_variety()
                ]
            elif omega.class_type in ("A1xA1", "A1xA1xA1"):
                elems = [
                    self.y_element(omega, t, negative=negative) for t in range(self.field.q)
                ]
            else:
                elems = [
                    self.y_element(omega, t, negative=negative)
                    for t in self.singleton_params(omega, negative)
                ]
            self._class_cache[key] = elems
        return self._class_cache[key]

    def positive_classes_by_height(self):
        return sorted(self.classes, key=lambda c: (self.rs.roots[c.members[0]].height, c.members))

    def generators(self):
        out = []
        for cls in self.positive_classes_by_height():
            if any(self.rs.roots[i].height == 1 for i in cls.members):
                out.extend(self.class_subgroup(cls))
                out.extend(self.class_subgroup(cls, negative=True))
        ident = self.identity().key
        return [g for g in out if g.key != ident]

    def order_formula(self) -> int:
        q0 = self.q0
        n = self.n
        out = q0 ** (n * (n - 1) // 2)
        for i in range(2, n + 1):
            out *= q0**i - (-1) ** i
        return out

    def special_subgroup(self, kind: str, k: int = 1, omega=None):
        return _special_subgroup_su(self, kind, k, omega)


def _sigma_filter(ctx, elems):
    return [e for e in elems if ctx.sigma(e.mat) == e.mat]


def _special_subgroup_su(ctx, kind, k=1, omega=None):
    if kind in ("U+", "U-"):
        neg = kind == "U-"
        factors = [
            [e.mat for e in ctx.class_subgroup(c, negative=neg)]
            for c in ctx.positive_classes_by_height()
        ]
        out = _product_set(ctx, factors)
        assert len(out) == ctx.q0**ctx.rs.n_positive
        return out
    if kind == "U_k":
        out = []
        for e in _special_subgroup_su(ctx, "U+"):
            if all(e.mat[i][i + lev] == 0 for lev in range(1, k) for i in range(ctx.n - lev)):
                out.append(e)
        return out
    if kind == "Y_omega":
        assert isinstance(omega, TwistedClass)
        return ctx.class_subgroup(omega)
    if kind == "W_omega":
        assert isinstance(omega, TwistedClass)
        members = [ctx.rs.roots[i] for i in omega.members]
        factors = [[ctx.root_matrix(w, t) for t in range(ctx.field.q)] for w in members]
        return _product_set(ctx, factors)
    if kind == "V":
        # ambient hook subgroup over the big field, unfiltered
        return _unitriangular(ctx, 1, region=_v_region(ctx.n, 1))
    if kind in ("V*", "V_k"):
        lvl = k if kind == "V_k" else 1
        return _sigma_filter(ctx, _unitriangular(ctx, 1, region=_v_region(ctx.n, lvl)))
    if kind in ("P", "P2"):
        split = sigma_prime_split(ctx.rs, twisted=True)
        chosen = [
            c
            for c in ctx.positive_classes_by_height()
            if min(split.t_label[i] for i in c.members) >= 1
        ]
        out = _product_set(ctx, [[e.mat for e in ctx.class_subgroup(c)] for c in chosen])
        if kind == "P2":
            ones = [
                ctx.root_positions(ctx.rs.roots[i])
                for i, t in enumerate(split.t_label)
                if t == 1
            ]
            out = [e for e in out if all(e.mat[i][j] == 0 for i, j in ones)]
        return out
    if kind == "H":
        return _su_torus(ctx)
    if kind == "U1":
        split = sigma_prime_split(ctx.rs, twisted=True)
        chosen = [
            c
            for c in ctx.positive_classes_by_height()
            if max(split.t_label[i] for i in c.members) == 0
        ]
        return _product_set(ctx, [[e.mat for e in ctx.class_subgroup(c)] for c in chosen])
    if kind == "D0-reps":
        gen = ctx.field.generator
        delta = ctx.rs.delta_set()
        chi = character_from_assignment(
            ctx.rs, ctx.field, {delta[0]: gen, delta[-1]: ctx.phi_scalar(gen)}
        )
        return [GroupElement(ctx, ctx.torus_matrix(chi))]
    raise ValueError(f"unsupported subgroup kind {kind!r} for type {ctx.kind}")


def _su_torus(ctx):
    n = ctx.n
    field = ctx.field
    m = n // 2
    out = []
    if n % 2 == 1:
        for values in itertools.product(field.units(), repeat=m):
            diag = [0] * n
            mid = 1
            for i, v in enumerate(values):
                diag[i] = v
                diag[n - 1 - i] = field.inv(ctx.phi_scalar(v))
                mid = field.mul(mid, field.mul(field.inv(v), ctx.phi_scalar(v)))
            diag[m] = mid
            mat = _diag_matrix(field, diag)
            assert ctx.contains_mat(mat)
            out.append(GroupElement(ctx, mat))
    else:
        for values in itertools.product(field.units(), repeat=m - 1):
            c = 1
            for v in values:
                c = field.mul(c, field.mul(ctx.phi_scalar(v), field.inv(v)))
            for last in field.units():
                if field.mul(last, field.inv(ctx.phi_scalar(last))) != c:
                    continue
                diag = [0] * n
                for i, v in enumerate(values):
                    diag[i] = v
                    diag[n - 1 - i] = field.inv(ctx.phi_scalar(v))
                diag[m - 1] = last
                diag[m] = field.inv(ctx.phi_scalar(last))
                mat = _diag_matrix(field, diag)
                if ctx.contains_mat(mat):
                    out.append(GroupElement(ctx, mat))
    return out


# -- type C


class SymplecticContext(GroupContext):
    kind = "C"
    form_name = "split-antidiag"

    def __init__(self, rank, field, budget=DEFAULT_ENUM_BUDGET):
        if rank < 2:
            raise ValueError("symplectic rank starts at 2")
        super().__init__(rank, field, budget)
        self.n = 2 * rank
        self.rs = build_root_system("C", rank)
        self.field0 = field
        self.J = self._form_matrix()
        self._root_mats = {w.index: self._solve_root_matrix(w) for w in self.rs.roots}

    def _form_matrix(self):
        n = self.n
        mat = [[0] * n for _ in range(n)]
        for i in range(1, n + 1):
            mat[i - 1][n - i] = 1 if i <= self.rank else self.field.neg(1)
        return tuple(tuple(row) for row in mat)

    def contains_mat(self, mat) -> bool:
        jt = mat_mul(self.field, mat_transpose(mat), mat_mul(self.field, self.J, mat))
        return jt == self.J and mat_det(self.field, mat) == 1

    def _positions_for(self, w: Root):
        n = self.n
        plus = [i for i, c in enumerate(w.coords) if c > 0]
        minus = [i for i, c in enumerate(w.coords) if c < 0]
        if len(plus) == 1 and len(minus) == 1:
            i, j = plus[0], minus[0]
            return [(i, j), (n - 1 - j, n - 1 - i)]
        if len(plus) == 2:
            i, j = plus
            return [(i, n - 1 - j), (j, n - 1 - i)]
        if len(minus) == 2:
            i, j = minus
            return [(n - 1 - j, i), (n - 1 - i, j)]
        if len(plus) == 1:
            (i,) = plus
            return [(i, n - 1 - i)]
        (i,) = minus
        return [(n - 1 - i, i)]

    def _solve_root_matrix(self, w: Root):
        """Nilpotent basis element: coefficient 1 in the first slot, the
        second slot sign solved from M^T J + J M = 0."""
        field = self.field
        positions = self._positions_for(w)
        zero = tuple(tuple(0 for _ in range(self.n)) for _ in range(self.n))
        for sign in (1, field.neg(1)):
            mat = [[0] * self.n for _ in range(self.n)]
            mat[positions[0][0]][positions[0][1]] = 1
            if len(positions) > 1:
                mat[positions[1][0]][positions[1][1]] = sign
            m = tuple(tuple(row) for row in mat)
            mt_j = mat_mul(field, mat_transpose(m), self.J)
            j_m = mat_mul(field, self.J, m)
            total = tuple(
                tuple(field.add(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(mt_j, j_m)
            )
            if total == zero:
                assert mat_mul(field, m, m) == zero
                assert mat_mul(field, mat_transpose(m), j_m) == zero
                return m
            if len(positions) == 1:
                break
        raise AssertionError("no symplectic root basis sign works")

    def param_slot(self, w: Root):
        # first slot of the nilpotent basis element has coefficient 1
        return self._positions_for(w)[0]

    def root_matrix(self, w: Root, t: int):
        base = self._root_mats[w.index]
        mat = [list(row) for row in mat_identity(self.field, self.n)]
        for i in range(self.n):
            for j in range(self.n):
                if base[i][j]:
                    mat[i][j] = self.field.add(mat[i][j], self.field.mul(t, base[i][j]))
        return tuple(tuple(row) for row in mat)

    def root_element(self, w: Root, t: int) -> GroupElement:
        if not isinstance(w, Root):
            raise TypeError("root elements of this type take a Root")
        out = self.root_matrix(w, t % self.field.q)
        assert self.contains_mat(out)
        return GroupElement(self, out)

    def coroot_diag(self, v: Root, lam: int):
        coroot = tuple(2 * c // v.len2() for c in v.coords)
        diag = [0] * self.n
        for k in range(self.rank):
            diag[k] = self.field.pow(lam, -coroot[k])
            diag[self.n - 1 - k] = self.field.pow(lam, coroot[k])
        return _diag_matrix(self.field, diag)

    def diag_element(self, v: Root, lam: int) -> GroupElement:
        lam %= self.field.q
        if lam == 0:
            raise ValueError("lambda must be a unit")
        mat = self.coroot_diag(v, lam)
        assert self.contains_mat(mat)
        hinv = mat_inv(self.field, mat)
        for w in self.rs.fundamental_roots():
            got = mat_mul(self.field, hinv, mat_mul(self.field, self.root_matrix(w, 1), mat))
            want = self.root_matrix(w, self.field.pow(lam, self.rs.pairing(w, v)))
            assert got == want
        return GroupElement(self, mat)

    def torus_matrix(self, chi: LatticeCharacter):
        """Similitude diagonal realizing chi; the similitude factor is
        chi evaluated on the doubled first coordinate.  Checked."""
        field = self.field
        c = chi.eval(self.rs.root_from_coords(tuple([2] + [0] * (self.rank - 1))))
        d = [1] * self.rank
        for j in range(1, self.rank):
            coords = [0] * self.rank
            coords[0] = 1
            coords[j] = -1
            d[j] = chi.eval(self.rs.root_from_coords(tuple(coords)))
        diag = [0] * self.n
        for i in range(self.rank):
            diag[i] = d[i]
            diag[self.n - 1 - i] = field.mul(c, field.inv(d[i]))
        dmat = _diag_matrix(field, diag)
        dinv = mat_inv(field, dmat)
        for w in self.rs.roots:
            got = mat_mul(field, dinv, mat_mul(field, self.root_matrix(w, 1), dmat))
            assert got == self.root_matrix(w, chi.eval(w))
        return dmat

    def generators(self):
        out = []
        basis = [self.field.p**k for k in range(self.field.f)]
        for w in self.rs.fundamental_roots():
            for t in basis:
                out.append(self.root_element(w, t))
                out.append(self.root_element(self.rs.negative_of(w), t))
        return out

    def order_formula(self) -> int:
        q = self.field.q
        r = self.rank
        out = q ** (r * r)
        for i in range(1, r + 1):
            out *= q ** (2 * i) - 1
        return out

    def special_subgroup(self, kind: str, k: int = 1, omega=None):
        return _special_subgroup_sp(self, kind, k, omega)


def _special_subgroup_sp(ctx, kind, k=1, omega=None):
    field = ctx.field
    if kind in ("U+", "U-", "U_k"):
        lvl = k if kind == "U_k" else 1
        neg = kind == "U-"
        roots = [ctx.rs.negative_of(w) if neg else w for w in ctx.rs.positive()]
        roots = [w for w in roots if abs(w.height) >= lvl]
        out = _product_set(ctx, [[ctx.root_matrix(w, t) for t in range(field.q)] for w in roots])
        if kind == "U+":
            assert len(out) == field.q ** (ctx.rank**2)
        return out
    if kind in ("P", "P2"):
        split = sigma_prime_split(ctx.rs)
        want = (lambda t: t >= 1) if kind == "P" else (lambda t: t == 2)
        roots = [ctx.rs.roots[i] for i, t in enumerate(split.t_label) if want(t)]
        return _product_set(ctx, [[ctx.root_matrix(w, t) for t in range(field.q)] for w in roots])
    if kind == "U1":
        split = sigma_prime_split(ctx.rs)
        roots = [ctx.rs.roots[i] for i in split.sigma_prime_pos]
        return _product_set(ctx, [[ctx.root_matrix(w, t) for t in range(field.q)] for w in roots])
    if kind == "W_omega":
        members = (
            [ctx.rs.roots[i] for i in omega.members] if isinstance(omega, TwistedClass) else [omega]
        )
        return _product_set(ctx, [[ctx.root_matrix(w, t) for t in range(field.q)] for w in members])
    if kind == "H":
        out = []
        for values in itertools.product(field.units(), repeat=ctx.rank):
            diag = [0] * ctx.n
            for i, v in enumerate(values):
                diag[i] = v
                diag[ctx.n - 1 - i] = field.inv(v)
            mat = _diag_matrix(field, diag)
            assert ctx.contains_mat(mat)
            out.append(GroupElement(ctx, mat))
        return out
    if kind == "D0-reps":
        gen = field.generator
        out = []
        for d in ctx.rs.delta_set():
            chi = character_from_assignment(ctx.rs, field, {d: gen})
            out.append(GroupElement(ctx, ctx.torus_matrix(chi)))
        return out
    raise ValueError(f"unsupported subgroup kind {kind!r} for type {ctx.kind}")


# -- public constructors


@lru_cache(maxsize=None)
def _cached_group(kind: str, rank: int, p: int, f: int):
    field = make_field(p, f)
    if kind == "A":
        if rank < 1:
            raise ValueError("rank must be at least 1")
        return SpecialLinearContext(rank, field)
    if kind == "2A":
        return SpecialUnitaryContext(rank, field)
    if kind == "C":
        if not 2 <= rank <= 4:
            raise ValueError("symplectic contexts support ranks 2..4")
        return SymplecticContext(rank, field)
    raise ValueError(f"unsupported group type {kind!r}")


def build_group(kind: str, rank: int, field: FiniteField) -> GroupContext:
    """Context for (type, rank) over the given field.

    "A" gives SL_{rank+1}(F); "2A" gives the twisted form inside
    SL_{rank+1}(F) for F of even degree (the fixed field has half the
    degree); "C" gives Sp_{2 rank}(F)."""
    return _cached_group(kind, rank, field.p, field.f)


def special_subgroup(ctx: GroupContext, kind: str, k: int = 1, omega=None):
    return ctx.special_subgroup(kind, k=k, omega=omega)


def root_element(ctx: GroupContext, w, *params) -> GroupElement:
    return ctx.root_element(w, *params)


def diag_element(ctx: GroupContext, v: Root, lam: int) -> GroupElement:
    return ctx.diag_element(v, lam)


# -- composite automorphisms


class CompositeAutomorphism:
    """Automorphism in the normal form inner * diagonal * field * graph.

    Internally the inner and diagonal parts are merged into one GL
    conjugator C and the action is x -> S(C^{-1} x C) with
    S = phi^e gamma^k; the two twists commute since the twisting matrix
    has prime-field entries.  The split presentation is recovered on
    demand.  Equality is action on the generators."""

    def __init__(self, ctx, conj=None, e: int = 0, k: int = 0):
        self.ctx = ctx
        self.conj = conj if conj is not None else mat_identity(ctx.field, ctx.n)
        self.e = e % ctx.field.f
        self.k = k % 2
        if self.k and ctx.kind not in ("A", "2A"):
            raise ValueError("graph twist exists only on the linear types")
        self._conj_inv = mat_inv(ctx.field, self.conj)

    @classmethod
    def identity(cls, ctx):
        return cls(ctx)

    @classmethod
    def inner(cls, ctx, g: GroupElement):
        return cls(ctx, g.mat, 0, 0)

    @classmethod
    def diagonal(cls, ctx, chi: LatticeCharacter):
        for v in chi.values:
            if v % ctx.field.q == 0:
                raise ValueError("character must be unit-valued")
        if ctx.kind == "2A":
            for w in ctx.rs.fundamental_roots():
                tw = ctx.rs.apply_symmetry(ctx.tau, w)
                if chi.eval(tw) != ctx.phi_scalar(chi.eval(w)):
                    raise ValueError("character is not compatible with the twist")
        out = cls(ctx, ctx.torus_matrix(chi), 0, 0)
        for g in ctx.generators():
            assert ctx.contains_mat(out.apply_mat(g.mat))
        return out

    @classmethod
    def field_power(cls, ctx, e: int):
        return cls(ctx, None, e, 0)

    @classmethod
    def graph(cls, ctx):
        if ctx.kind != "A":
            raise ValueError("the graph automorphism is exposed on the untwisted linear type")
        return cls(ctx, None, 0, 1)

    @classmethod
    def steinberg(cls, ctx):
        if ctx.kind != "2A":
            raise ValueError("the defining twist lives on the twisted context")
        out = cls(ctx, None, ctx.f0, 1)
        assert out.compose(out).is_identity()
        return out

    # action

    def _twist(self, mat):
        if self.e:
            mat = mat_frob(self.ctx.field, mat, self.e)
        if self.k:
            mat = self.ctx.gamma_mat(mat)
        return mat

    def _untwist(self, mat):
        if self.k:
            mat = self.ctx.gamma_mat(mat)
        if self.e:
            mat = mat_frob(self.ctx.field, mat, self.ctx.field.f - self.e)
        return mat

    def apply_mat(self, mat):
        return self._twist(
            mat_mul(self.ctx.field, self._conj_inv, mat_mul(self.ctx.field, mat, self.conj))
        )

    def apply(self, x: GroupElement) -> GroupElement:
        return GroupElement(self.ctx, self.apply_mat(x.mat))

    def __call__(self, x):
        return self.apply(x) if isinstance(x, GroupElement) else self.apply_mat(x)

    # algebra

    def compose(self, other: "CompositeAutomorphism") -> "CompositeAutomorphism":
        """Normal form of self followed by other."""
        assert self.ctx is other.ctx
        conj = mat_mul(self.ctx.field, self.conj, self._untwist(other.conj))
        return CompositeAutomorphism(self.ctx, conj, self.e + other.e, self.k + other.k)

    def __mul__(self, other):
        return self.compose(other)

    def inverse(self) -> "CompositeAutomorphism":
        conj = mat_inv(self.ctx.field, self._twist(self.conj))
        return CompositeAutomorphism(self.ctx, conj, -self.e, self.k)

    def power(self, m: int) -> "CompositeAutomorphism":
        if m < 0:
            return self.inverse().power(-m)
        out = CompositeAutomorphism(self.ctx)
        base = self
        while m:
            if m & 1:
                out = out.compose(base)
            base = base.compose(base)
            m >>= 1
        return out

    def equals(self, other: "CompositeAutomorphism") -> bool:
        return all(
            self.apply_mat(g.mat) == other.apply_mat(g.mat) for g in self.ctx.generators()
        )

    def is_identity(self) -> bool:
        return self.equals(CompositeAutomorphism(self.ctx))

    @property
    def is_inner_diagonal(self) -> bool:
        return self.e == 0 and self.k == 0

    def inner_diag_parts(self):
        """Split the conjugator as g * D with det(g) = 1 and D diagonal."""
        field = self.ctx.field
        n = self.ctx.n
        det = mat_det(field, self.conj)
        dmat = _diag_matrix(field, [1] * (n - 1) + [det])
        g = mat_mul(field, self.conj, mat_inv(field, dmat))
        return g, dmat

    def describe(self) -> dict:
        g, d = self.inner_diag_parts()
        return {
            "field_power": self.e,
            "graph_flag": self.k,
            "diag": tuple(d[i][i] for i in range(self.ctx.n)),
            "inner_det": mat_det(self.ctx.field, g),
        }


def inner_aut(ctx, g: GroupElement) -> CompositeAutomorphism:
    return CompositeAutomorphism.inner(ctx, g)


def diag_aut(ctx, chi: LatticeCharacter) -> CompositeAutomorphism:
    return CompositeAutomorphism.diagonal(ctx, chi)


def field_aut(ctx, e: int) -> CompositeAutomorphism:
    return CompositeAutomorphism.field_power(ctx, e)


def graph_aut(ctx) -> CompositeAutomorphism:
    return CompositeAutomorphism.graph(ctx)


def steinberg_aut(ctx) -> CompositeAutomorphism:
    return CompositeAutomorphism.steinberg(ctx)


# -- constructive diagonal collapse


def d0_collapse(rs: RootSystem, field: FiniteField, chi: LatticeCharacter):
    """Multiply chi by coroot characters until it is trivial on the
    ordered complement of the distinguished fundamentals.

    Returns (final character, [(fundamental index, lambda), ...]) where
    each pair records one one-parameter diagonal multiplier, in
    application order."""
    order, w = rs.pi0_chain()
    chain = list(order) + [w]
    fund = rs.fundamental_roots()
    cur = chi
    used = []
    for i, nu in enumerate(chain[:-1]):
        lam = cur.eval(fund[nu])
        if lam == 1:
            continue
        nxt = chain[i + 1]
        mult = LatticeCharacter(
            rs,
            field,
            tuple(field.pow(lam, rs.pairing(fund[j], fund[nxt])) for j in range(rs.rank)),
        )
        cur = cur * mult
        used.append((nxt, lam))
    for nu in order:
        assert cur.eval(fund[nu]) == 1
    return cur, used


# -- abstract twisted parameter groups


class TwistedParamGroup:
    """Parameter groups of the folded rank-one families.

    Cases: "A1d" (an orbit of d commuting root subgroups folding to one
    additive parameter), "A2" (the doubled class: pairs (t, u) on the
    variety t^{1+phi} = u + u^phi), "B2" (characteristic 2, twist with
    p phi^2 = 1) and "G2" (characteristic 3, same constraint)."""

    CASES = ("A1d", "A2", "B2", "G2")

    def __init__(self, case: str, field: FiniteField, phi_exp: int, d: int = 1, field0=None):
        if case not in self.CASES:
            raise ValueError(f"unknown case {case!r}")
        self.case = case
        self.field = field
        self.phi_exp = phi_exp % field.f
        self.d = d
        self.field0 = field0 if field0 is not None else field
        self._validate()

    def _validate(self):
        p, f = self.field.p, self.field.f
        if self.case == "A2":
            if f % 2 != 0 or self.phi_exp != f // 2:
                raise ValueError("the doubled case needs an even-degree field with its involution")
        elif self.case == "B2":
            if p != 2:
                raise ValueError("this folded case lives in characteristic 2")
            if (2 * self.phi_exp + 1) % f != 0:
                raise ValueError("the twist must square to the base Frobenius")
        elif self.case == "G2":
            if p != 3:
                raise ValueError("this folded case lives in characteristic 3")
            if (2 * self.phi_exp + 1) % f != 0:
                raise ValueError("the twist must square to the base Frobenius")

    def phi(self, t: int) -> int:
        return self.field.frob(t, self.phi_exp)

    def arity(self) -> int:
        return {"A1d": 1, "A2": 2, "B2": 2, "G2": 3}[self.case]

    def identity(self):
        return (0,) * self.arity()

    def elements(self):
        F = self.field
        if self.case == "A1d":
            dom = range(self.field0.q) if self.d == 1 else range(F.q)
            return [(t,) for t in dom]
        if self.case == "A2":
            out = []
            for t in range(F.q):
                tgt = F.mul(t, self.phi(t))
                out.extend((t, u) for u in range(F.q) if F.add(u, self.phi(u)) == tgt)
            return out
        if self.case == "B2":
            return [tuple(x) for x in itertools.product(range(F.q), repeat=2)]
        return [tuple(x) for x in itertools.product(range(F.q), repeat=3)]

    def contains(self, a) -> bool:
        if len(a) != self.arity():
            return False
        if self.case == "A2":
            t, u = a
            return self.field.add(u, self.phi(u)) == self.field.mul(t, self.phi(t))
        if self.case == "A1d" and self.d == 1:
            return 0 <= a[0] < self.field0.q
        return all(0 <= x < self.field.q for x in a)

    def mul(self, a, b):
        F = self.field
        if self.case == "A1d":
            if self.d == 1:
                return (self.field0.add(a[0], b[0]),)
            return (F.add(a[0], b[0]),)
        if self.case == "A2":
            t, u = a
            t2, u2 = b
            return (F.add(t, t2), F.add(F.add(u, u2), F.mul(self.phi(t), t2)))
        if self.case == "B2":
            t, u = a
            t2, u2 = b
            tp = self.phi(t)
            return (F.add(t, t2), F.add(F.add(u, u2), F.mul(F.mul(tp, tp), t2)))
        t, u, z = a
        t2, u2, z2 = b
        t3p = F.pow(self.phi(t), 3)
        new_u = F.add(F.add(u, u2), F.mul(t2, t3p))
        new_z = F.add(F.add(z, z2), F.add(F.neg(F.mul(t2, u)), F.mul(F.mul(t2, t2), t3p)))
        return (F.add(t, t2), new_u, new_z)

    def inv(self, a):
        F = self.field
        if self.case == "A1d":
            neg = self.field0.neg if self.d == 1 else F.neg
            return (neg(a[0]),)
        if self.case == "A2":
            t, u = a
            return (F.neg(t), self.phi(u))
        if self.case == "B2":
            t, u = a
            tp = self.phi(t)
            return (t, F.add(u, F.mul(F.mul(tp, tp), t)))
        t, u, z = a
        t3p = F.pow(self.phi(t), 3)
        iu = F.add(F.neg(u), F.mul(t, t3p))
        iz = F.add(F.neg(z), F.add(F.neg(F.mul(t, u)), F.neg(F.mul(F.mul(t, t), t3p))))
        return (F.neg(t), iu, iz)

    def check_group(self, max_elements: int = 64):
        """Exhaustive group-axiom check, meant for the smallest legal
        fields; raises past the budget."""
        elems = self.elements()
        if len(elems) > max_elements:
            raise BudgetExceeded(f"{len(elems)} elements exceeds the axiom-check budget")
        e = self.identity()
        for a in elems:
            assert self.mul(a, e) == a and self.mul(e, a) == a
            ia = self.inv(a)
            assert self.contains(ia)
            assert self.mul(a, ia) == e and self.mul(ia, a) == e
        for a in elems:
            for b in elems:
                ab = self.mul(a, b)
                assert self.contains(ab)
                for c in elems:
                    assert self.mul(ab, c) == self.mul(a, self.mul(b, c))
        return True


def twisted_param_group(
    case: str, field: FiniteField, phi_exp: int, d: int = 1, field0=None
) -> TwistedParamGroup:
    return TwistedParamGroup(case, field, phi_exp, d=d, field0=field0)
