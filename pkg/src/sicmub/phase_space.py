"""The finite phase space V = F x F.

Points are enumerated row-major in element order: point ``(v1, v2)`` has
index ``v1.index * q + v2.index`` where ``q = |F|``.  Character values are
kept as integer exponents of omega (mod p) and converted to complex numbers
only at the boundary.

Lines through the origin are ordered L_inf first, then L_alpha for alpha in
element order.  Each coset of a line carries an integer coordinate ``t`` in
element-index form:

* L_alpha = F(1, alpha): coset of v has ``t = v2 - alpha*v1``, representative (0, t);
* L_inf = F(0, 1):       coset of v has ``t = v1``, representative (t, 0).

The representative is the smallest point of the coset, so sorting cosets by
representative is the same as sorting them by ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .combinatorics import Partition
from .errors import IncompleteDomain, MixedFields
from .finite_field import FieldElement, FieldSpec

INF = None  # label of the vertical line L_inf


@dataclass(frozen=True)
class PhasePoint:
    v1: FieldElement
    v2: FieldElement

    def __post_init__(self):
        if self.v1.field != self.v2.field:
            raise MixedFields("phase point components from different fields")

    @property
    def field(self) -> FieldSpec:
        return self.v1.field

    @property
    def index(self) -> int:
        return self.v1.index * self.field.size + self.v2.index

    @classmethod
    def from_index(cls, field: FieldSpec, index: int) -> PhasePoint:
        a, b = divmod(int(index), field.size)
        return cls(FieldElement(field, a), FieldElement(field, b))

    def __add__(self, other: PhasePoint) -> PhasePoint:
        return PhasePoint(self.v1 + other.v1, self.v2 + other.v2)

    def __neg__(self) -> PhasePoint:
        return PhasePoint(-self.v1, -self.v2)

    def __sub__(self, other: PhasePoint) -> PhasePoint:
        return self + (-other)

    def scale(self, c: FieldElement) -> PhasePoint:
        return PhasePoint(c * self.v1, c * self.v2)

    def to_json(self) -> list:
        return [self.v1.to_json(), self.v2.to_json()]


@dataclass(frozen=True)
class Line:
    """A line through the origin; ``label`` is alpha's element index or None for L_inf."""

    label: int | None
    points: tuple[int, ...]

    @property
    def name(self) -> str:
        return "inf" if self.label is None else str(self.label)


@dataclass(frozen=True)
class Coset:
    line: Line
    t: int
    representative: int
    points: tuple[int, ...]

    def to_json(self, field: FieldSpec) -> list:
        return [PhasePoint.from_index(field, i).to_json() for i in self.points]


class PhaseSpace:
    """Tabulated structure of V = F x F for one field. Build via :func:`phase_space`."""

    def __init__(self, field: FieldSpec):
        self.field = field
        q = self.q = field.size
        p = field.p
        add, mul, neg, tr = field.add_table, field.mul_table, field.neg_table, field.trace_table
        idx = np.arange(q * q)
        self.v1, self.v2 = idx // q, idx % q

        # form(v, w) = v2*w1 - v1*w2, as a field-element index table
        a = mul[self.v2[:, None], self.v1[None, :]]
        b = mul[self.v1[:, None], self.v2[None, :]]
        self.form_table = add[a, neg[b]]
        self.char_exponent = tr[self.form_table] % p
        self.roots = field.roots_of_unity()
        self.chars = self.roots[self.char_exponent]

        self.add_points = (add[self.v1[:, None], self.v1[None, :]] * q
                           + add[self.v2[:, None], self.v2[None, :]])
        self.neg_points = neg[self.v1] * q + neg[self.v2]

        self.lines: list[Line] = []
        self.coset_labels: list[np.ndarray] = []
        for label in [INF] + list(range(q)):
            if label is INF:
                pts = tuple(int(u) for u in range(q))  # (0, u)
                t = self.v1.copy()
            else:
                pts = tuple(sorted(int(u * q + mul[label, u]) for u in range(q)))
                t = add[self.v2, neg[mul[label, self.v1]]]
            self.lines.append(Line(label, pts))
            self.coset_labels.append(np.asarray(t, dtype=np.int64))

    def cosets(self, line_index: int) -> list[Coset]:
        line = self.lines[line_index]
        t = self.coset_labels[line_index]
        out = []
        for k in range(self.q):
            pts = tuple(int(i) for i in np.nonzero(t == k)[0])
            out.append(Coset(line, k, min(pts), pts))
        return out

    def partitions(self) -> list[Partition]:
        """The d+1 coset partitions of V as partitions of the q x q point array."""
        return [Partition.from_labels(t, self.q) for t in self.coset_labels]

    def point(self, index: int) -> PhasePoint:
        return PhasePoint.from_index(self.field, index)


@lru_cache(maxsize=None)
def phase_space(field: FieldSpec) -> PhaseSpace:
    return PhaseSpace(field)


def symplectic_form(v: PhasePoint, w: PhasePoint) -> FieldElement:
    if v.field != w.field:
        raise MixedFields("points from different fields")
    return v.v2 * w.v1 - v.v1 * w.v2


def symplectic_character(v: PhasePoint, w: PhasePoint) -> tuple[FieldElement, complex]:
    """Return the symplectic form [v, w] and the character omega^Tr[v, w]."""
    form = symplectic_form(v, w)
    return form, complex(v.field.roots_of_unity()[form.trace()])


def lines_and_cosets(field: FieldSpec) -> list[tuple[Line, list[Coset]]]:
    ps = phase_space(field)
    return [(line, ps.cosets(k)) for k, line in enumerate(ps.lines)]


def _as_vector(f, field: FieldSpec) -> np.ndarray:
    n = field.size**2
    if isinstance(f, Mapping):
        vals = {}
        for key, val in f.items():
            i = key.index if isinstance(key, PhasePoint) else int(key)
            vals[i] = val
        if set(vals) != set(range(n)):
            raise IncompleteDomain(f"function must be defined on all {n} points of V")
        return np.array([vals[i] for i in range(n)], dtype=complex)
    arr = np.asarray(f, dtype=complex).reshape(-1)
    if arr.size != n:
        raise IncompleteDomain(f"function must be defined on all {n} points of V, got {arr.size}")
    return arr


def symplectic_fourier(f, field: FieldSpec, direction: str = "forward") -> np.ndarray:
    """Symplectic Fourier transform with 1/|F| in both directions.

    ``f`` is an array over V in canonical point order, or a mapping from
    points (or point indices) to values.  With this normalization the
    transform is unitary on l^2(V).
    """
    ps = phase_space(field)
    vec = _as_vector(f, field)
    if direction == "forward":
        return ps.chars @ vec / ps.q
    if direction == "inverse":
        return ps.chars.conj().T @ vec / ps.q
    raise ValueError(f"direction must be 'forward' or 'inverse', not {direction!r}")
