"""Explicit finite fields GF(p^f) with a deterministic construction.

Conventions, fixed once and used everywhere else in the package:

* An element is an integer 0 <= e < p^f encoding the coefficient vector of
  a polynomial residue in base p: e = sum(c_k * p^k), where c_k is the
  coefficient of x^k.  Encoding order doubles as the canonical element
  ordering for hashing and serialization.
* The modulus is the lexicographically smallest monic irreducible
  polynomial of degree f over GF(p), coefficients compared low degree
  first.  Irreducibility is established by trial division at construction.
* The distinguished generator is the smallest element, in the same
  low-degree-first coefficient order, whose multiplicative order is p^f - 1.

Examples: GF(4) has modulus x^2 + x + 1 and generator x; GF(9) has modulus
x^2 + 1 and generator 1 + x; GF(5) has generator 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

_FIELD_SIZE_BUDGET = 2 ** 16
_DENSE_TABLE_LIMIT = 512  # full q x q add/mul tables below this size


class BudgetExceeded(RuntimeError):
    """An enumeration or construction exceeded its configured budget."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# -- polynomial helpers over GF(p); a polynomial is a coefficient tuple,
#    low degree first, with no trailing zeros (except the zero polynomial).


def _poly_trim(c):
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return tuple(c[:i])


def _poly_mul(p, a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(p, a, m):
    # m monic
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and len(a) > 0:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - dm
            for k in range(len(m)):
                a[shift + k] = (a[shift + k] - lead * m[k]) % p
        a.pop()
    return _poly_trim(a)


def _poly_divisible(p, a, b):
    """True if monic b divides a over GF(p)."""
    return not _poly_mod(p, a, b)


def _monic_polys(p, degree):
    for body in itertools.product(range(p), repeat=degree):
        yield tuple(body) + (1,)


def _is_irreducible(p, poly):
    degree = len(poly) - 1
    if degree <= 0:
        return False
    if poly[0] == 0:
        return degree == 1
    for d in range(1, degree // 2 + 1):
        for div in _monic_polys(p, d):
            if _poly_divisible(p, poly, div):
                return False
    return True


def _smallest_irreducible(p, f):
    # low-degree-first lexicographic order over monic degree-f candidates
    for cand in _monic_polys(p, f):
        if _is_irreducible(p, cand):
            return cand
    raise AssertionError("no irreducible polynomial found")  # unreachable


class FiniteField:
    """GF(p^f) with integer-encoded elements and table-backed arithmetic."""

    def __init__(self, p: int, f: int):
        if not _is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if f < 1:
            raise ValueError(f"f = {f} must be >= 1")
        if p ** f > _FIELD_SIZE_BUDGET:
            raise BudgetExceeded(f"field size {p}^{f} exceeds budget {_FIELD_SIZE_BUDGET}")
        self.p = p
        self.f = f
        self.q = p ** f
        self.modulus = _smallest_irreducible(p, f) if f > 1 else (0, 1)
        self._dense = self.q <= _DENSE_TABLE_LIMIT
        self._log = None
        self._exp = None
        self._build_tables()
        self.generator = self._find_generator()
        if self.q > 2:
            self._build_log_tables()

    # -- encoding

    def digits(self, e: int):
        """Coefficient vector of an element, low degree first, length f."""
        out = []
        for _ in range(self.f):
            out.append(e % self.p)
            e //= self.p
        return tuple(out)

    def from_digits(self, c) -> int:
        e = 0
        for k in reversed(range(len(c))):
            e = e * self.p + (c[k] % self.p)
        return e

    def _lex_key(self, e: int):
        return self.digits(e)

    def elements_lex(self):
        """All elements ordered by low-degree-first coefficient tuples."""
        return sorted(range(self.q), key=self._lex_key)

    # -- construction internals

    def _mul_raw(self, a: int, b: int) -> int:
        prod = _poly_mul(self.p, _poly_trim(self.digits(a)), _poly_trim(self.digits(b)))
        return self.from_digits(_poly_mod(self.p, prod, self.modulus))

    def _add_raw(self, a: int, b: int) -> int:
        da, db = self.digits(a), self.digits(b)
        return self.from_digits(tuple((x + y) % self.p for x, y in zip(da, db)))

    def _build_tables(self):
        if not self._dense:
            self._add_t = None
            self._mul_t = None
            return
        q = self.q
        self._add_t = [[self._add_raw(a, b) for b in range(q)] for a in range(q)]
        self._mul_t = [[self._mul_raw(a, b) for b in range(q)] for a in range(q)]

    def _multiplicative_order(self, e: int) -> int:
        if e == 0:
            raise ValueError("zero has no multiplicative order")
        n = self.q - 1
        order = n
        for ell in _prime_factors(n):
            while order % ell == 0 and self.pow(e, order // ell) == 1:
                order //= ell
        return order

    def _find_generator(self) -> int:
        if self.q == 2:
            return 1
        for e in self.elements_lex():
            if e == 0:
                continue
            if self._multiplicative_order(e) == self.q - 1:
                return e
        raise AssertionError("no generator found")  # unreachable

    def _build_log_tables(self):
        exp = [1] * (self.q - 1)
        for k in range(1, self.q - 1):
            exp[k] = self.mul(exp[k - 1], self.generator)
        log = [0] * self.q
        for k, v in enumerate(exp):
            log[v] = k
        self._exp = exp
        self._log = log

    # -- arithmetic on encodings

    def add(self, a: int, b: int) -> int:
        if self._dense:
            return self._add_t[a][b]
        return self._add_raw(a, b)

    def neg(self, a: int) -> int:
        return self.from_digits(tuple((-c) % self.p for c in self.digits(a)))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self._dense:
            return self._mul_t[a][b]
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        return self._mul_raw(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverting 0")
        if self._exp is not None:
            return self._exp[(-self._log[a]) % (self.q - 1)]
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            a, n = self.inv(a), -n
        out = 1
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def frob(self, a: int, e: int = 1) -> int:
        """a^(p^e); e is reduced mod f."""
        return self._frob_table(e % self.f)[a]

    @lru_cache(maxsize=None)
    def _frob_table(self, e: int):
        if e == 0:
            return tuple(range(self.q))
        prev = self._frob_table(e - 1)
        return tuple(self.pow(prev[a], self.p) for a in range(self.q))

    def multiplicative_order(self, e: int) -> int:
        return self._multiplicative_order(e)

    # -- numpy views for bulk work

    def np_add(self):
        import numpy

        if not hasattr(self, "_np_add"):
            self._np_add = numpy.array(
                [[self.add(a, b) for b in range(self.q)] for a in range(self.q)],
                dtype=numpy.int32,
            )
        return self._np_add

    def np_mul(self):
        import numpy

        if not hasattr(self, "_np_mul"):
            self._np_mul = numpy.array(
                [[self.mul(a, b) for b in range(self.q)] for a in range(self.q)],
                dtype=numpy.int32,
            )
        return self._np_mul

    # -- misc

    def element(self, e: int) -> "FieldElement":
        return FieldElement(self, e % self.q)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    def gen(self) -> "FieldElement":
        return FieldElement(self, self.generator)

    def units(self):
        return range(1, self.q)

    def poly_str(self, e: int) -> str:
        if e == 0:
            return "0"
        parts = []
        for k, c in enumerate(self.digits(e)):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append("x" if c == 1 else f"{c}x")
            else:
                parts.append(f"x^{k}" if c == 1 else f"{c}x^{k}")
        return " + ".join(parts)

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.f) == (other.p, other.f)

    def __hash__(self):
        return hash(("FiniteField", self.p, self.f))

    def __repr__(self):
        return f"GF({self.p}^{self.f})" if self.f > 1 else f"GF({self.p})"


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def make_field(p: int, f: int) -> FiniteField:
    """Construct (and cache) GF(p^f) with the deterministic conventions above."""
    return FiniteField(p, f)


@dataclass(frozen=True)
class FieldElement:
    """A field element: owning field plus integer encoding."""

    field: FiniteField
    val: int

    def __post_init__(self):
        if not 0 <= self.val < self.field.q:
            object.__setattr__(self, "val", self.val % self.field.q)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other.val
        if isinstance(other, int):
            # small integers embed through the prime subfield
            return other % self.field.p
        raise TypeError(f"cannot coerce {other!r}")

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.val, self._coerce(other)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.val))

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.val, self._coerce(other)))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.val, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.val, self._coerce(other)))

    def __pow__(self, n: int):
        return FieldElement(self.field, self.field.pow(self.val, n))

    def inverse(self):
        return FieldElement(self.field, self.field.inv(self.val))

    def frob(self, e: int = 1):
        return FieldElement(self.field, self.field.frob(self.val, e))

    def order(self) -> int:
        return self.field.multiplicative_order(self.val)

    def digits(self):
        return self.field.digits(self.val)

    def __bool__(self):
        return self.val != 0

    def __repr__(self):
        return f"<{self.field.poly_str(self.val)} in {self.field!r}>"


class FieldAutomorphism:
    """The power-of-Frobenius map x -> x^(p^e) on a fixed field."""

    def __init__(self, field: FiniteField, e: int):
        self.field = field
        self.e = e % field.f

    def __call__(self, x):
        if isinstance(x, FieldElement):
            return x.frob(self.e)
        return self.field.frob(x, self.e)

    def apply(self, x: int) -> int:
        return self.field.frob(x, self.e)

    def compose(self, other: "FieldAutomorphism") -> "FieldAutomorphism":
        if other.field != self.field:
            raise ValueError("automorphisms of different fields")
        return FieldAutomorphism(self.field, self.e + other.e)

    def __pow__(self, n: int) -> "FieldAutomorphism":
        return FieldAutomorphism(self.field, self.e * n)

    def inverse(self) -> "FieldAutomorphism":
        return FieldAutomorphism(self.field, -self.e % self.field.f)

    def is_identity(self) -> bool:
        return self.e == 0

    def order(self) -> int:
        return self.field.f // gcd(self.e, self.field.f) if self.e else 1

    def fixed_degree(self) -> int:
        return gcd(self.e, self.field.f) if self.e else self.field.f

    def __eq__(self, other):
        return (
            isinstance(other, FieldAutomorphism)
            and self.field == other.field
            and self.e == other.e
        )

    def __hash__(self):
        return hash(("FieldAutomorphism", self.field.p, self.field.f, self.e))

    def __repr__(self):
        return f"x -> x^{self.field.p}^{self.e} on {self.field!r}"


def frobenius_power(x: FieldElement, e: int) -> FieldElement:
    """x^(p^e) inside x's own field."""
    return x.frob(e)


@dataclass(frozen=True)
class SubfieldDescriptor:
    """The fixed subfield of a Frobenius power, kept inside the big field.

    Membership refers to encodings of the ambient field; there is no
    separate small-field arithmetic object. degree is the extension degree
    of the subfield over the prime field.
    """

    field: FiniteField
    degree: int
    members: frozenset

    @property
    def size(self) -> int:
        return self.field.p ** self.degree

    def __contains__(self, x) -> bool:
        v = x.val if isinstance(x, FieldElement) else x
        return v in self.members

    def star(self):
        """Nonzero members, sorted by encoding."""
        return tuple(sorted(v for v in self.members if v))

    def sorted_members(self):
        return tuple(sorted(self.members))

    def is_whole_field(self) -> bool:
        return self.degree == self.field.f

    def generator(self) -> int:
        """Canonical generator of the subfield's multiplicative group."""
        target = self.size - 1
        for e in self.field.elements_lex():
            if e and e in self.members and self.field.multiplicative_order(e) == target:
                return e
        raise AssertionError("subfield generator not found")


def fixed_field(field: FiniteField, psi: FieldAutomorphism) -> SubfieldDescriptor:
    """Elements fixed by psi: the subfield GF(p^gcd(e, f)) inside `field`."""
    if psi.field != field:
        raise ValueError("automorphism belongs to a different field")
    members = frozenset(x for x in range(field.q) if psi.apply(x) == x)
    degree = psi.fixed_degree()
    assert len(members) == field.p ** degree
    return SubfieldDescriptor(field, degree, members)


def twisted_norm(lam: FieldElement, psi: FieldAutomorphism, k: int, c: int = 1) -> FieldElement:
    """prod_{j=0}^{k-1} psi^j(lam)^c for nonzero lam and k >= 1."""
    if lam.val == 0:
        raise ValueError("twisted norm requires nonzero argument")
    if k < 1:
        raise ValueError("k must be >= 1")
    field = lam.field
    acc = 1
    cur = lam.val
    for _ in range(k):
        acc = field.mul(acc, field.pow(cur, c))
        cur = psi.apply(cur)
    return FieldElement(field, acc)


def unit_commutators(field: FiniteField, psi: FieldAutomorphism) -> frozenset:
    """The set {t^-1 * psi(t) : t nonzero}: a subgroup of the units.

    Its index in the unit group equals the number of nonzero fixed points
    of psi; the solver's kernel arguments lean on exactly this set.
    """
    out = set()
    for t in range(1, field.q):
        out.add(field.mul(field.inv(t), psi.apply(t)))
    return frozenset(out)
