"""d-partitions of a d x d array, Latin squares, and dual path systems.

Cells of the d x d array are ``(row, col)`` pairs, 0-based; the flat cell
index is ``row * d + col``.  When the array labels the d^2 effects of a SIC,
cell index ``i`` is effect ``G(i)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    IncompleteFamily,
    NonOrthogonalSquares,
    NotALatinSquare,
    NotAPartition,
    NotOneOverlapWithCartesian,
    ValidationError,
)
from .finite_field import FieldSpec

Cell = tuple[int, int]


class OneOverlapViolation(ValidationError):
    pass


@dataclass(frozen=True)
class Partition:
    """A d-partition: d disjoint bins of d cells covering the d x d array."""

    d: int
    bins: tuple[tuple[Cell, ...], ...]

    def __post_init__(self):
        d = self.d
        bins = tuple(tuple(sorted((int(r), int(c)) for r, c in b)) for b in self.bins)
        object.__setattr__(self, "bins", bins)
        if len(bins) != d:
            raise NotAPartition(f"expected {d} bins, got {len(bins)}")
        seen = set()
        for b in bins:
            if len(b) != d:
                raise NotAPartition(f"bin {b} has {len(b)} cells, expected {d}")
            for r, c in b:
                if not (0 <= r < d and 0 <= c < d):
                    raise NotAPartition(f"cell {(r, c)} outside the {d}x{d} array")
                if (r, c) in seen:
                    raise NotAPartition(f"cell {(r, c)} appears in two bins")
                seen.add((r, c))

    @classmethod
    def from_labels(cls, labels: Sequence[int] | np.ndarray, d: int) -> Partition:
        """Build from a length-d^2 array giving the bin of each flat cell index."""
        labels = np.asarray(labels).reshape(-1)
        bins = [[] for _ in range(d)]
        for i, b in enumerate(labels):
            if not 0 <= b < d:
                raise NotAPartition(f"bin label {b} out of range")
            bins[int(b)].append(divmod(i, d))
        return cls(d, tuple(tuple(b) for b in bins))

    def cell_to_bin(self) -> np.ndarray:
        out = np.empty(self.d * self.d, dtype=np.int64)
        for nu, b in enumerate(self.bins):
            for r, c in b:
                out[r * self.d + c] = nu
        return out

    def flat_bins(self) -> list[list[int]]:
        return [[r * self.d + c for r, c in b] for b in self.bins]

    def intersection_counts(self, other: Partition) -> np.ndarray:
        a, b = self.cell_to_bin(), other.cell_to_bin()
        counts = np.zeros((self.d, other.d), dtype=np.int64)
        np.add.at(counts, (a, b), 1)
        return counts

    def one_overlap(self, other: Partition) -> bool:
        return self.d == other.d and bool(np.all(self.intersection_counts(other) == 1))

    def to_json(self) -> list:
        return [[[r, c] for r, c in b] for b in self.bins]

    @classmethod
    def from_json(cls, data: list) -> Partition:
        return cls(len(data), tuple(tuple((int(r), int(c)) for r, c in b) for b in data))


@dataclass(frozen=True)
class LatinSquare:
    """Order-d Latin square over symbols 0..d-1."""

    d: int
    grid: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        grid = tuple(tuple(int(x) for x in row) for row in self.grid)
        object.__setattr__(self, "grid", grid)
        d = self.d
        full = set(range(d))
        if len(grid) != d or any(len(row) != d for row in grid):
            raise NotALatinSquare(f"grid is not {d}x{d}")
        for i in range(d):
            if set(grid[i]) != full:
                raise NotALatinSquare(f"row {i} is not a permutation of 0..{d - 1}")
            if {grid[r][i] for r in range(d)} != full:
                raise NotALatinSquare(f"column {i} is not a permutation of 0..{d - 1}")

    @classmethod
    def from_function(cls, d: int, f) -> LatinSquare:
        return cls(d, tuple(tuple(f(i, j) for j in range(d)) for i in range(d)))

    def array(self) -> np.ndarray:
        return np.array(self.grid, dtype=np.int64)

    def to_json(self) -> list[list[int]]:
        return [list(row) for row in self.grid]

    @classmethod
    def from_json(cls, data: list) -> LatinSquare:
        return cls(len(data), tuple(tuple(row) for row in data))


def cyclic_square(d: int) -> LatinSquare:
    """Cayley table of Z_d: cell (i, j) holds (i + j) mod d."""
    return LatinSquare.from_function(d, lambda i, j: (i + j) % d)


def are_orthogonal(a: LatinSquare, b: LatinSquare) -> bool:
    if a.d != b.d:
        return False
    pairs = {(x, y) for ra, rb in zip(a.grid, b.grid) for x, y in zip(ra, rb)}
    return len(pairs) == a.d * a.d


@dataclass(frozen=True)
class PathSystem:
    """d^2 strictly downward paths through a (d+1) x d array of bins.

    ``paths[i][k]`` is the column (bin index) visited by path ``i`` in row
    ``k``.  Construction checks the three defining invariants.
    """

    d: int
    paths: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        paths = tuple(tuple(int(x) for x in p) for p in self.paths)
        object.__setattr__(self, "paths", paths)
        d = self.d
        if len(paths) != d * d:
            raise IncompleteFamily(f"expected {d * d} paths, got {len(paths)}")
        arr = np.array(paths, dtype=np.int64)
        if arr.shape != (d * d, d + 1) or arr.min() < 0 or arr.max() >= d:
            raise ValidationError(f"each path must visit one of {d} cells in each of {d + 1} rows")
        shared = (arr[:, None, :] == arr[None, :, :]).sum(axis=2)
        np.fill_diagonal(shared, 1)
        if np.any(shared != 1):
            raise OneOverlapViolation("two paths do not meet in exactly one cell")
        for k in range(d + 1):
            if np.any(np.bincount(arr[:, k], minlength=d) != d):
                raise ValidationError(f"row {k}: some cell does not lie on exactly {d} paths")

    def array(self) -> np.ndarray:
        return np.array(self.paths, dtype=np.int64)

    def to_json(self) -> list:
        return [[[k, b] for k, b in enumerate(p)] for p in self.paths]

    @classmethod
    def from_json(cls, data: list) -> PathSystem:
        paths = []
        for p in data:
            by_row = dict((int(k), int(b)) for k, b in p)
            paths.append(tuple(by_row[k] for k in range(len(by_row))))
        return cls(int(round(len(paths) ** 0.5)), tuple(paths))


# -- operations ---------------------------------------------------------------

def row_partition(d: int) -> Partition:
    return Partition(d, tuple(tuple((r, c) for c in range(d)) for r in range(d)))


def column_partition(d: int) -> Partition:
    return Partition(d, tuple(tuple((r, c) for r in range(d)) for c in range(d)))


def diagonal_partition(d: int) -> Partition:
    """Wrapped diagonals: bin k holds the cells with (col - row) = k mod d.

    Bin 0 is the main diagonal; bin k >= 1 joins the diagonal starting at
    (0, k) with the one starting at (d - k, 0).
    """
    return Partition(d, tuple(tuple((r, (r + k) % d) for r in range(d)) for k in range(d)))


def cartesian_and_diagonal_partitions(d: int) -> list[Partition]:
    if d < 2:
        raise ValidationError("order must be at least 2")
    return [row_partition(d), column_partition(d), diagonal_partition(d)]


def mols_from_field(field: FieldSpec) -> list[LatinSquare]:
    """The d-1 squares (i, j) -> a*i + j for a != 0, in element order of a."""
    q = field.size
    add, mul = field.add_table, field.mul_table
    return [
        LatinSquare.from_function(q, lambda i, j, a=a: int(add[mul[a, i], j]))
        for a in range(1, q)
    ]


def latin_to_partition(square: LatinSquare) -> Partition:
    return Partition.from_labels(square.array(), square.d)


def partition_to_latin(partition: Partition) -> LatinSquare:
    d = partition.d
    for nu, b in enumerate(partition.bins):
        if len({r for r, _ in b}) != d or len({c for _, c in b}) != d:
            raise NotOneOverlapWithCartesian(f"bin {nu} repeats a row or a column")
    return LatinSquare(d, tuple(map(tuple, partition.cell_to_bin().reshape(d, d))))


def latin_partition_duality(obj: LatinSquare | Partition) -> Partition | LatinSquare:
    """Map a Latin square to its symbol partition, or a partition to its label square."""
    if isinstance(obj, LatinSquare):
        return latin_to_partition(obj)
    if isinstance(obj, Partition):
        return partition_to_latin(obj)
    raise TypeError(f"expected LatinSquare or Partition, got {type(obj).__name__}")


def check_one_overlap_family(partitions: Sequence[Partition]) -> None:
    for (a, pa), (b, pb) in itertools.combinations(enumerate(partitions), 2):
        if not pa.one_overlap(pb):
            raise OneOverlapViolation(f"partitions {a} and {b} lack the 1-overlap property")


def assemble_partition_family(source: FieldSpec | Iterable[LatinSquare]) -> list[Partition]:
    """Rows, columns, then one partition per mutually orthogonal Latin square."""
    squares = mols_from_field(source) if isinstance(source, FieldSpec) else list(source)
    if not squares:
        raise ValidationError("need at least one Latin square")
    d = squares[0].d
    for a, b in itertools.combinations(range(len(squares)), 2):
        if not are_orthogonal(squares[a], squares[b]):
            raise NonOrthogonalSquares(f"squares {a} and {b} are not orthogonal")
    family = [row_partition(d), column_partition(d)] + [latin_to_partition(s) for s in squares]
    assert len(family) <= d + 1, "more than d+1 partitions cannot share the 1-overlap property"
    return family


def dualize_to_path_system(partitions: Sequence[Partition]) -> PathSystem:
    """Path ``i`` visits, in row ``k``, the bin of partition ``k`` holding cell ``i``."""
    if not partitions:
        raise IncompleteFamily("no partitions given")
    d = partitions[0].d
    if len(partitions) != d + 1:
        raise IncompleteFamily(
            f"a path system needs {d + 1} partitions with the 1-overlap property; got {len(partitions)}"
        )
    check_one_overlap_family(partitions)
    labels = np.stack([p.cell_to_bin() for p in partitions], axis=1)
    return PathSystem(d, tuple(map(tuple, labels)))


def path_system_to_partitions(paths: PathSystem) -> list[Partition]:
    """Inverse of :func:`dualize_to_path_system`: path index ``i`` is cell ``i``."""
    arr = paths.array()
    return [Partition.from_labels(arr[:, k], paths.d) for k in range(paths.d + 1)]


def incidence_counts(paths: PathSystem) -> dict[str, int]:
    """Counts for the dual structure read as points (bins) and lines (paths)."""
    d, arr = paths.d, paths.array()
    lines_per_point = {np.count_nonzero(arr[:, k] == b) for k in range(d + 1) for b in range(d)}
    shared = (arr[:, None, :] == arr[None, :, :]).sum(axis=2)
    off = shared[~np.eye(d * d, dtype=bool)]
    return {
        "points": d * (d + 1),
        "lines": len(paths.paths),
        "points_per_line": arr.shape[1],
        "lines_per_point": lines_per_point.pop() if len(lines_per_point) == 1 else -1,
        "line_intersection": int(off.min()) if off.min() == off.max() else -1,
    }


# -- orthogonal mate search ---------------------------------------------------

@dataclass
class MateSearchResult:
    status: str  # "found" | "exhausted-none" | "budget-exceeded"
    mate: LatinSquare | None
    nodes: int
    transversals: int

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "mate": self.mate.to_json() if self.mate else None,
            "nodes": self.nodes,
            "transversals": self.transversals,
        }


class _BudgetExceeded(Exception):
    pass


def find_transversals(square: LatinSquare, counter: list[int], budget: int) -> list[tuple[int, ...]]:
    """All transversals, each as the column chosen in rows 0..d-1, lexicographic."""
    d, grid = square.d, square.grid
    out: list[tuple[int, ...]] = []
    cols: list[int] = []
    used_c = [False] * d
    used_s = [False] * d

    def extend(row: int):
        counter[0] += 1
        if counter[0] > budget:
            raise _BudgetExceeded
        if row == d:
            out.append(tuple(cols))
            return
        for c in range(d):
            s = grid[row][c]
            if used_c[c] or used_s[s]:
                continue
            used_c[c] = used_s[s] = True
            cols.append(c)
            extend(row + 1)
            cols.pop()
            used_c[c] = used_s[s] = False

    extend(0)
    return out


def orthogonal_mate_search(square: LatinSquare, node_budget: int = 10**8) -> MateSearchResult:
    """Look for a Latin square orthogonal to ``square``.

    A mate exists iff the cells split into d disjoint transversals.  The
    search first enumerates all transversals, then runs an exact-cover
    backtrack that always branches on the first uncovered cell in row-major
    order.  Both phases count nodes against one budget, so the node count of
    an ``exhausted-none`` verdict is reproducible.
    """
    d = square.d
    counter = [0]
    try:
        transversals = find_transversals(square, counter, node_budget)
    except _BudgetExceeded:
        return MateSearchResult("budget-exceeded", None, counter[0], -1)

    by_cell: dict[Cell, list[int]] = {}
    for t_idx, cols in enumerate(transversals):
        for r, c in enumerate(cols):
            by_cell.setdefault((r, c), []).append(t_idx)

    covered = [[False] * d for _ in range(d)]
    chosen: list[int] = []

    def cover(t_idx: int, flag: bool):
        for r, c in enumerate(transversals[t_idx]):
            covered[r][c] = flag

    def solve() -> bool:
        counter[0] += 1
        if counter[0] > node_budget:
            raise _BudgetExceeded
        target = next(((r, c) for r in range(d) for c in range(d) if not covered[r][c]), None)
        if target is None:
            return True
        for t_idx in by_cell.get(target, []):
            if any(covered[r][c] for r, c in enumerate(transversals[t_idx])):
                continue
            cover(t_idx, True)
            chosen.append(t_idx)
            if solve():
                return True
            chosen.pop()
            cover(t_idx, False)
        return False

    try:
        found = solve()
    except _BudgetExceeded:
        return MateSearchResult("budget-exceeded", None, counter[0], len(transversals))
    if not found:
        return MateSearchResult("exhausted-none", None, counter[0], len(transversals))

    grid = [[0] * d for _ in range(d)]
    for symbol, t_idx in enumerate(chosen):
        for r, c in enumerate(transversals[t_idx]):
            grid[r][c] = symbol
    return MateSearchResult("found", LatinSquare(d, tuple(map(tuple, grid))), counter[0], len(transversals))
