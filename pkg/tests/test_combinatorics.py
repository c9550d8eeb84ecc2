import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sicmub.combinatorics import (
    LatinSquare,
    OneOverlapViolation,
    Partition,
    PathSystem,
    are_orthogonal,
    assemble_partition_family,
    cartesian_and_diagonal_partitions,
    column_partition,
    cyclic_square,
    diagonal_partition,
    dualize_to_path_system,
    incidence_counts,
    latin_partition_duality,
    mols_from_field,
    orthogonal_mate_search,
    path_system_to_partitions,
    row_partition,
)
from sicmub.errors import (
    IncompleteFamily,
    NonOrthogonalSquares,
    NotALatinSquare,
    NotAPartition,
    NotOneOverlapWithCartesian,
)
from sicmub.finite_field import make_field

PRIME_POWERS = {2: (2, 1), 3: (3, 1), 4: (2, 2), 5: (5, 1), 7: (7, 1), 8: (2, 3), 9: (3, 2)}


def orthogonal_oracle(a, b):
    pairs = {(a.grid[r][c], b.grid[r][c]) for r in range(a.d) for c in range(a.d)}
    return len(pairs) == a.d**2


def test_cartesian_and_diagonal_d2():
    rows, cols, diag = cartesian_and_diagonal_partitions(2)
    assert rows.bins == (((0, 0), (0, 1)), ((1, 0), (1, 1)))
    assert cols.bins == (((0, 0), (1, 0)), ((0, 1), (1, 1)))
    assert diag.bins == (((0, 0), (1, 1)), ((0, 1), (1, 0)))


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6, 7])
def test_cartesian_and_diagonal_one_overlap(d):
    parts = cartesian_and_diagonal_partitions(d)
    for a, b in itertools.combinations(parts, 2):
        assert np.all(a.intersection_counts(b) == 1)
    assert not parts[0].one_overlap(parts[0])


def test_partition_validation():
    with pytest.raises(NotAPartition):
        Partition(3, (((0, 0), (0, 1), (0, 2), (1, 0)), ((1, 1), (1, 2)), ((2, 0), (2, 1), (2, 2))))
    with pytest.raises(NotAPartition):
        Partition(2, (((0, 0), (0, 0)), ((1, 0), (1, 1))))
    with pytest.raises(NotAPartition):
        Partition(2, (((0, 0), (0, 1)),))


def test_latin_square_validation():
    with pytest.raises(NotALatinSquare):
        LatinSquare(2, ((0, 0), (1, 1)))


@pytest.mark.parametrize("d", sorted(PRIME_POWERS))
def test_mols_from_field(d):
    squares = mols_from_field(make_field(*PRIME_POWERS[d]))
    assert len(squares) == d - 1
    for a, b in itertools.combinations(squares, 2):
        assert orthogonal_oracle(a, b) and are_orthogonal(a, b)


def test_mols_d3_are_i_plus_j_and_2i_plus_j(gf3):
    a, b = mols_from_field(gf3)
    assert a.array().tolist() == [[(i + j) % 3 for j in range(3)] for i in range(3)]
    assert b.array().tolist() == [[(2 * i + j) % 3 for j in range(3)] for i in range(3)]


def test_square_i_plus_j_gives_anti_diagonals():
    part = latin_partition_duality(cyclic_square(3))
    assert part.bins[0] == ((0, 0), (1, 2), (2, 1))
    # mirror image of the (col - row) diagonals
    mirrored = Partition(3, tuple(tuple((r, (-c) % 3) for r, c in b) for b in diagonal_partition(3).bins))
    assert sorted(part.bins) == sorted(mirrored.bins)
    assert part.one_overlap(row_partition(3)) and part.one_overlap(column_partition(3))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_latin_partition_round_trip(d):
    sq = cyclic_square(d)
    assert latin_partition_duality(latin_partition_duality(sq)) == sq


def test_partition_with_repeated_row_is_not_latin():
    bad = Partition(3, (((0, 0), (0, 1), (1, 2)), ((0, 2), (1, 0), (2, 1)), ((1, 1), (2, 0), (2, 2))))
    with pytest.raises(NotOneOverlapWithCartesian):
        latin_partition_duality(bad)


def test_assemble_family_sizes(gf3, gf5):
    fam3 = assemble_partition_family(gf3)
    fam5 = assemble_partition_family(gf5)
    assert len(fam3) == 4 and len(fam5) == 6
    for fam in (fam3, fam5):
        for a, b in itertools.combinations(fam, 2):
            assert np.all(a.intersection_counts(b) == 1)
    assert len(assemble_partition_family([cyclic_square(6)])) == 3
    with pytest.raises(NonOrthogonalSquares):
        assemble_partition_family([cyclic_square(3), cyclic_square(3)])


@pytest.mark.parametrize("d", [2, 3, 4, 5, 7])
def test_path_system_invariants(d):
    fam = assemble_partition_family(make_field(*PRIME_POWERS[d]))
    paths = dualize_to_path_system(fam)
    arr = paths.array()
    assert arr.shape == (d * d, d + 1)
    for i, j in itertools.combinations(range(d * d), 2):
        assert np.count_nonzero(arr[i] == arr[j]) == 1
    for k in range(d + 1):
        assert np.all(np.bincount(arr[:, k], minlength=d) == d)
    assert path_system_to_partitions(paths) == fam
    assert dualize_to_path_system(path_system_to_partitions(paths)) == paths
    counts = incidence_counts(paths)
    assert counts == {
        "points": d * (d + 1),
        "lines": d * d,
        "points_per_line": d + 1,
        "lines_per_point": d,
        "line_intersection": 1,
    }


def test_path_system_d2_is_the_qubit_sums():
    paths = dualize_to_path_system(cartesian_and_diagonal_partitions(2))
    assert paths.paths == ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0))


def test_dualize_needs_complete_family(gf3):
    with pytest.raises(IncompleteFamily):
        dualize_to_path_system(cartesian_and_diagonal_partitions(3))
    fam = assemble_partition_family(gf3)
    with pytest.raises(OneOverlapViolation):
        dualize_to_path_system([fam[0], fam[0], fam[2], fam[3]])


def test_path_system_validation():
    with pytest.raises(IncompleteFamily):
        PathSystem(2, ((0, 0, 0),))
    with pytest.raises(OneOverlapViolation):
        PathSystem(2, ((0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)))


def test_path_system_json_round_trip(gf3):
    paths = dualize_to_path_system(assemble_partition_family(gf3))
    assert PathSystem.from_json(paths.to_json()) == paths
    fam = assemble_partition_family(gf3)
    assert [Partition.from_json(p.to_json()) for p in fam] == fam


def test_mate_search_d3_finds_a_mate():
    sq = cyclic_square(3)
    res = orthogonal_mate_search(sq)
    assert res.status == "found"
    assert orthogonal_oracle(sq, res.mate)
    # i+j has exactly the mate 2i+j, here with symbols in transversal order
    assert res.mate.array().tolist() == [[(2 * i + j) % 3 for j in range(3)] for i in range(3)]


def test_mate_search_d2_and_d6():
    assert orthogonal_mate_search(cyclic_square(2)).status == "exhausted-none"
    res = orthogonal_mate_search(cyclic_square(6))
    assert res.status == "exhausted-none"
    assert res.transversals == 0
    assert res.nodes == orthogonal_mate_search(cyclic_square(6)).nodes == 224


def test_mate_search_budget():
    res = orthogonal_mate_search(cyclic_square(5), node_budget=5)
    assert res.status == "budget-exceeded"


def test_mate_search_odd_cyclic_squares_have_mates():
    for d in (5, 7):
        res = orthogonal_mate_search(cyclic_square(d))
        assert res.status == "found" and orthogonal_oracle(cyclic_square(d), res.mate)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([3, 4, 5, 7]), st.permutations(range(7)), st.permutations(range(7)))
def test_relabelled_squares_stay_orthogonal(d, rperm, sperm):
    rows = [r for r in rperm if r < d]
    syms = [s for s in sperm if s < d]
    a, b = mols_from_field(make_field(*PRIME_POWERS[d]))[:2]
    # permuting rows of both squares and symbols of one keeps them orthogonal
    a2 = LatinSquare(d, tuple(a.grid[r] for r in rows))
    b2 = LatinSquare(d, tuple(tuple(syms[x] for x in b.grid[r]) for r in rows))
    assert are_orthogonal(a2, b2)
