"""Exact arithmetic in GF(p^n) with the absolute trace onto Z_p.

Elements are stored in the polynomial basis as coefficient tuples, constant
term first.  Every field in scope has at most 64 elements, so the addition,
multiplication and trace maps are tabulated once when the field is built and
all arithmetic is a table lookup on element indices.

The index of an element is ``sum(c_i * p**i)``, i.e. coefficient vectors are
ordered lexicographically with the highest-degree coefficient most
significant.  Index 0 is the zero element and index 1 is the unit.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    InverseOfZero,
    MixedFields,
    NonPrimeP,
    ReducibleModulus,
    SizeTooLarge,
    ValidationError,
)

MAX_FIELD_SIZE = 64


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, int(p**0.5) + 1))


# -- polynomials over Z_p, constant-first coefficient lists -------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    m = _trim([x % p for x in m])
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        shift = len(a) - len(m)
        coef = (a[-1] * inv_lead) % p
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _trim(a)
    return a


def _monic_polys(p: int, degree: int):
    """Monic polynomials of a given degree, in index order of the lower part."""
    for low in itertools.product(range(p), repeat=degree):
        yield list(reversed(low)) + [1]


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= n/2."""
    n = len(modulus) - 1
    if n < 1:
        return False
    for k in range(1, n // 2 + 1):
        for f in _monic_polys(p, k):
            if not _poly_mod(modulus, f, p):
                return False
    return True


def default_modulus(p: int, n: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree ``n`` in element-index order."""
    for idx in range(p**n):
        low = [(idx // p**i) % p for i in range(n)]
        cand = low + [1]
        if is_irreducible(cand, p):
            return tuple(cand)
    raise ReducibleModulus(f"no irreducible polynomial of degree {n} over Z_{p}")  # unreachable


@dataclass(frozen=True)
class FieldSpec:
    """A finite field GF(p^n) given by a monic irreducible modulus.

    Use :func:`make_field` to build one; the constructor assumes validated
    input.  Equality and hashing only look at ``(p, n, modulus)``.
    """

    p: int
    n: int
    modulus: tuple[int, ...]
    add_table: np.ndarray = field(compare=False, repr=False, default=None)
    mul_table: np.ndarray = field(compare=False, repr=False, default=None)
    neg_table: np.ndarray = field(compare=False, repr=False, default=None)
    inv_table: np.ndarray = field(compare=False, repr=False, default=None)
    trace_table: np.ndarray = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.add_table is None:
            for name, table in _build_tables(self.p, self.n, self.modulus).items():
                table.setflags(write=False)
                object.__setattr__(self, name, table)

    @property
    def size(self) -> int:
        return self.p**self.n

    @property
    def omega(self) -> complex:
        """Primitive p-th root of unity exp(2 pi i / p)."""
        return cmath.exp(2j * cmath.pi / self.p)

    @property
    def element_order(self) -> list[tuple[int, ...]]:
        return [self.coeffs_of(i) for i in range(self.size)]

    def coeffs_of(self, index: int) -> tuple[int, ...]:
        return tuple((index // self.p**i) % self.p for i in range(self.n))

    def index_of(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.n or any(not 0 <= c < self.p for c in coeffs):
            raise ValidationError(f"bad coefficient vector {list(coeffs)} for GF({self.p}^{self.n})")
        return sum(int(c) * self.p**i for i, c in enumerate(coeffs))

    def __call__(self, value) -> FieldElement:
        """Coerce an int (element of the prime subfield), coefficient list, or element."""
        if isinstance(value, FieldElement):
            if value.field != self:
                raise MixedFields("element belongs to another field")
            return value
        if isinstance(value, (int, np.integer)):
            return FieldElement(self, int(value) % self.p)
        return FieldElement(self, self.index_of(list(value)))

    def elements(self) -> list[FieldElement]:
        return [FieldElement(self, i) for i in range(self.size)]

    # character values omega**k, k in Z_p
    def roots_of_unity(self) -> np.ndarray:
        k = np.arange(self.p)
        return np.exp(2j * np.pi * k / self.p)

    def half(self) -> int:
        """Index of 2^-1; requires odd characteristic."""
        if self.p == 2:
            raise InverseOfZero("2 = 0 in characteristic 2")
        return int(self.inv_table[2 % self.p])

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, data: dict) -> FieldSpec:
        return make_field(int(data["p"]), int(data.get("n", 1)), data.get("modulus"))

    def __repr__(self):
        return f"FieldSpec(p={self.p}, n={self.n}, modulus={list(self.modulus)})"


def _build_tables(p: int, n: int, modulus: tuple[int, ...]) -> dict[str, np.ndarray]:
    q = p**n
    coeffs = [[(i // p**k) % p for k in range(n)] for i in range(q)]

    def index(c):
        c = list(c) + [0] * (n - len(c))
        return sum(x * p**k for k, x in enumerate(c))

    add = np.zeros((q, q), dtype=np.int64)
    mul = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(q):
            add[a, b] = index([(x + y) % p for x, y in zip(coeffs[a], coeffs[b])])
            prod = [0] * (2 * n - 1)
            for i, x in enumerate(coeffs[a]):
                for j, y in enumerate(coeffs[b]):
                    prod[i + j] += x * y
            mul[a, b] = index(_poly_mod(prod, modulus, p))
    neg = np.array([index([(-x) % p for x in coeffs[a]]) for a in range(q)], dtype=np.int64)
    inv = np.full(q, -1, dtype=np.int64)
    for a in range(1, q):
        inv[a] = int(np.nonzero(mul[a] == 1)[0][0])

    # Tr(a) = a + a^p + ... + a^(p^(n-1)); lands in the prime subfield
    trace = np.zeros(q, dtype=np.int64)
    for a in range(q):
        total, power = 0, a
        for _ in range(n):
            total = add[total, power]
            frob = 1
            for _ in range(p):
                frob = mul[frob, power]
            power = frob
        if total >= p:
            raise ValidationError("trace left the prime subfield; modulus is not irreducible")
        trace[a] = total
    return {"add_table": add, "mul_table": mul, "neg_table": neg, "inv_table": inv, "trace_table": trace}


def make_field(p: int, n: int = 1, modulus: Sequence[int] | None = None) -> FieldSpec:
    """Build GF(p^n).

    Parameters
    ----------
    p : int
        Characteristic; must be prime.
    n : int
        Extension degree, at least 1.
    modulus : sequence of int, optional
        Monic irreducible polynomial of degree ``n``, constant term first.
        Defaults to the smallest one in element-index order.

    Raises
    ------
    NonPrimeP, ReducibleModulus, SizeTooLarge
    """
    p, n = int(p), int(n)
    if not is_prime(p):
        raise NonPrimeP(f"p={p} is not prime")
    if n < 1:
        raise ValidationError(f"n={n} must be positive")
    if p**n > MAX_FIELD_SIZE:
        raise SizeTooLarge(f"p^n = {p**n} exceeds the cap of {MAX_FIELD_SIZE}")
    if modulus is None:
        modulus = default_modulus(p, n)
    else:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise ReducibleModulus(f"modulus {list(modulus)} is not monic of degree {n}")
        if not is_irreducible(modulus, p):
            raise ReducibleModulus(f"modulus {list(modulus)} is reducible over Z_{p}")
    return FieldSpec(p, n, tuple(modulus))


@dataclass(frozen=True)
class FieldElement:
    """An element of a :class:`FieldSpec`, stored by index."""

    field: FieldSpec
    index: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs_of(self.index)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MixedFields("operands belong to different fields")
            return other.index
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, int(self.field.add_table[self.index, b]))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, int(self.field.neg_table[self.index]))

    def __sub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return self + (-FieldElement(self.field, b))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, int(self.field.mul_table[self.index, b]))

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.index == 0:
            raise InverseOfZero("zero has no multiplicative inverse")
        return FieldElement(self.field, int(self.field.inv_table[self.index]))

    def __truediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return self * FieldElement(self.field, b).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = FieldElement(self.field, 1)
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self):
        return self.index != 0

    def trace(self) -> int:
        return field_trace(self)

    def to_json(self) -> list[int]:
        return list(self.coeffs)

    def __repr__(self):
        return f"GF({self.field.p}^{self.field.n})<{list(self.coeffs)}>"


def field_arith(op: str, a: FieldElement, b: FieldElement | None = None) -> FieldElement:
    """Dispatch one of ``add``, ``mul``, ``neg``, ``inv``."""
    if b is not None and b.field != a.field:
        raise MixedFields("operands belong to different fields")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    raise ValidationError(f"unknown field operation {op!r}")


def field_trace(a: FieldElement) -> int:
    """Absolute trace Tr(a) = sum_i a^(p^i), returned as an integer in [0, p)."""
    return int(a.field.trace_table[a.index])
