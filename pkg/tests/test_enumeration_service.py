import time
from itertools import combinations

import numpy as np
import pytest

from service.enumeration_service import CoverageMatch, EnumerationClass, EnumerationReport, KmMatrix, SymmetricPair
from service.enumeration_service import alpha_coverage, alternating_sequences, brute_force_sedfs, commit_forced_columns
from service.enumeration_service import build_matrix, candidate_pairs, candidate_set, candidate_sets
from service.enumeration_service import enumerate_sedfs, group_sequences, mates, modulus_for
from service.enumeration_service import ordered_factorizations, pair_index, pair_universe, pairs_of
from service.enumeration_service import scan_shard, set_from_pairs, solve_exact_cover
from service.sedf_service import Sedf, canonical_form, verify_sedf
from service.valuation_service import BlowupKind, compose, format_sequence, parse_sequence, to_sedf
from tests.published_tables import BLOWUP_SEQUENCES, CANONICAL_ROWS, SYMMETRIC_ROWS
from utils.residues import AffineMap, ResidueSet, apply_affine, lex_compare, units


def published_canonical(a: int) -> set[Sedf]:
    v = modulus_for(a)
    return {Sedf.of(v, set_a, set_b) for set_a, set_b in CANONICAL_ROWS[a]}


def assert_enumeration_matches(a: int, workers: int = 1) -> EnumerationReport:
    """Enumerate one value of a and compare it with the published rows.

    Args:
        a: Set size.
        workers: Worker processes for the enumeration.
    """
    report = enumerate_sedfs(a = a, workers = workers)
    assert len(report.classes) == len(CANONICAL_ROWS[a])
    assert set(report.canonical_sedfs) == published_canonical(a)
    for item in report.classes:
        assert verify_sedf(item.symmetric).valid
        assert item.symmetric.set_a.is_symmetric() and item.symmetric.set_b.is_symmetric()
        assert apply_affine(item.mapping, item.symmetric.set_a) == item.canonical.set_a
        assert apply_affine(item.mapping, item.symmetric.set_b) == item.canonical.set_b
    return report


def test_pair_index_and_pairs() -> None:
    """Verify pair representatives, members and the pair universe.

    Args:
        None: This function does not accept parameters.
    """
    assert pair_index(16, 17) == 1
    assert pair_index(9, 17) == 8
    assert pair_index(5, 10) == 5
    assert pair_index(0, 10) == 0
    assert SymmetricPair(index = 3, modulus = 17).members == (3, 14)
    assert SymmetricPair(index = 5, modulus = 10).size == 1
    assert SymmetricPair(index = 0, modulus = 10).label() == "P_0"
    assert [pair.index for pair in pair_universe(4)] == list(range(1, 9))
    assert [pair.index for pair in pair_universe(3)] == [1, 2, 3, 4, 5]


def test_pairs_of_round_trip_and_rejection() -> None:
    s = set_from_pairs([1, 4], 17)
    assert s.elements == (1, 4, 13, 16)
    assert pairs_of(s) == (1, 4)
    assert pairs_of(set_from_pairs([0, 1], 10)) == (0, 1)
    with pytest.raises(ValueError):
        pairs_of(ResidueSet.of([0, 1, 2], 10))


def test_modulus_for_rejects_nonpositive() -> None:
    assert modulus_for(4) == 17
    with pytest.raises(ValueError):
        modulus_for(0)


def test_candidate_pairs_small_cases() -> None:
    """Verify the worked candidate lists, including units pruning T=(3,) and T=(4,) for a=3."""
    assert list(candidate_pairs(a = 3)) == [(1,), (2,)]
    assert list(candidate_pairs(a = 3, unit_filter = False)) == [(1,), (2,), (3,), (4,)]
    assert list(candidate_pairs(a = 1)) == [()]
    assert list(candidate_sets(a = 1)) == [ResidueSet.of([0], 2)]
    assert list(candidate_pairs(a = 2)) == [(1,)]
    assert candidate_set(a = 3, pairs = (1,)).elements == (0, 1, 9)
    assert candidate_set(a = 4, pairs = (1, 3)).elements == (1, 3, 14, 16)


def test_candidate_pairs_prefix_restricts_output() -> None:
    every = list(candidate_pairs(a = 6))
    starting = list(candidate_pairs(a = 6, prefix = (1, 2)))
    assert starting == [pairs for pairs in every if pairs[:2] == (1, 2)]


@pytest.mark.parametrize("a", [3, 4, 5, 6])
def test_unit_filter_keeps_exactly_minimal_sets(a: int) -> None:
    """Verify the orderly generator yields A exactly when no unit multiple of A is smaller.

    Args:
        a: Set size.
    """
    v = modulus_for(a)
    expected = []
    for pairs in candidate_pairs(a = a, unit_filter = False):
        a_set = candidate_set(a = a, pairs = pairs)
        images = (apply_affine(AffineMap(alpha = m, beta = 0, modulus = v), a_set) for m in units(v))
        if all(lex_compare(image, a_set).value >= 0 for image in images):
            expected.append(a_set)
    assert list(candidate_sets(a = a)) == expected


def test_build_matrix_for_a_equal_four() -> None:
    """Verify M_A for A = {P_1, P_3} in Z_17 entry by entry.

    Args:
        None: This function does not accept parameters.
    """
    matrix = build_matrix(a_pairs = (1, 3), a = 4)
    assert matrix.rows == (1, 2, 3, 4, 5, 6, 7, 8)
    assert matrix.cols == (2, 4, 5, 6, 7, 8)
    expected = np.array([
        [2, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [1, 1, 0, 1, 0, 0],
        [0, 0, 1, 0, 1, 0],
        [1, 1, 0, 1, 0, 1],
        [0, 0, 1, 0, 1, 1],
        [0, 1, 0, 1, 1, 1],
        [0, 0, 1, 1, 1, 1],
    ])
    assert np.array_equal(matrix.entries, expected)
    assert matrix.entry(1, 2) == 2
    assert matrix.column(4) == {1: 1, 3: 1, 5: 1, 7: 1}
    assert matrix.column(5) == {2: 1, 4: 1, 6: 1, 8: 1}


def test_build_matrix_for_a_equal_three() -> None:
    """Verify M_A for A = {P_0, P_1} in Z_10, including the single-element column P_5."""
    matrix = build_matrix(a_pairs = (0, 1), a = 3)
    assert matrix.rows == (1, 2, 3, 4, 5)
    assert matrix.cols == (2, 3, 4, 5)
    expected = np.array([
        [1, 0, 0, 0],
        [1, 1, 0, 0],
        [1, 1, 1, 0],
        [0, 1, 1, 1],
        [0, 0, 1, 1],
    ])
    assert np.array_equal(matrix.entries, expected)


def test_solve_exact_cover_worked_examples() -> None:
    """Verify the unique covers {P_4, P_5} and {P_2, P_5}.

    Args:
        None: This function does not accept parameters.
    """
    four = build_matrix(a_pairs = (1, 3), a = 4)
    assert solve_exact_cover(four) == [(4, 5)]
    vector = tuple(int(y in (4, 5)) for y in four.cols)
    assert vector == (0, 1, 1, 0, 0, 0)

    three = build_matrix(a_pairs = (0, 1), a = 3)
    assert solve_exact_cover(three) == [(2, 5)]
    assert solve_exact_cover(three, forced = (5,)) == [(2, 5)]
    assert solve_exact_cover(three, forced = (3,)) == []


def test_solve_exact_cover_rejects_uncovered_row() -> None:
    # row 1 only meets the column holding a 2
    matrix = KmMatrix(rows = (1, 2), cols = (3, 4), entries = np.array([[2, 0], [1, 1]], dtype = np.int8))
    assert solve_exact_cover(matrix) == []
    empty = KmMatrix(rows = (), cols = (), entries = np.zeros((0, 0), dtype = np.int8))
    assert solve_exact_cover(empty) == [()]


def test_commit_forced_columns_follows_single_covers() -> None:
    """Verify committed columns remove their rows and every column that meets them.

    Args:
        None: This function does not accept parameters.
    """
    ones = np.array([[1, 0, 0, 1], [0, 1, 0, 1], [0, 1, 1, 0]], dtype = bool)
    usable = np.ones(4, dtype = bool)

    live_rows, live_cols, chosen = commit_forced_columns(ones = ones, usable = usable)
    assert live_rows.all() and live_cols.all() and chosen == []

    live_rows, _, chosen = commit_forced_columns(ones = ones, usable = usable, forced = [0])
    assert not live_rows.any()
    assert chosen == [0, 1]

    _, _, chosen = commit_forced_columns(ones = ones, usable = usable, forced = [3])
    assert chosen == [3, 2]


def test_commit_forced_columns_detects_collisions() -> None:
    # rows 0 and 1 each have one cover, and both covers meet row 2
    ones = np.array([[1, 0], [0, 1], [1, 1]], dtype = bool)
    assert commit_forced_columns(ones = ones, usable = np.ones(2, dtype = bool)) is None
    assert commit_forced_columns(ones = ones, usable = np.array([True, False])) is None


def test_mates_of_worked_sets() -> None:
    assert mates(a_set = ResidueSet.of([1, 3, 14, 16], 17), a = 4) == [ResidueSet.of([4, 5, 12, 13], 17)]
    assert mates(a_set = ResidueSet.of([0, 1, 9], 10), a = 3) == [ResidueSet.of([2, 5, 8], 10)]
    assert mates(a_set = ResidueSet.of([0, 1, 9], 10), a = 3, preselect_half_pair = True) == [
        ResidueSet.of([2, 5, 8], 10),
    ]
    assert mates(a_set = ResidueSet.of([0], 2), a = 1) == [ResidueSet.of([1], 2)]
    with pytest.raises(ValueError):
        mates(a_set = ResidueSet.of([0, 1, 9], 11), a = 3)


@pytest.mark.parametrize("a", range(1, 10))
def test_enumerate_matches_published_table(a: int) -> None:
    """Verify counts and canonical sets for small a.

    Args:
        a: Set size.
    """
    assert_enumeration_matches(a = a)


@pytest.mark.slow
@pytest.mark.parametrize("a", [10, 11])
def test_enumerate_matches_published_table_medium(a: int) -> None:
    assert_enumeration_matches(a = a, workers = 2)


@pytest.mark.slow
def test_enumeration_up_to_ten_finishes_quickly() -> None:
    """Verify one worker enumerates every a from 1 to 10 within ten seconds.

    Args:
        None: This function does not accept parameters.
    """
    started = time.perf_counter()
    counts = [len(enumerate_sedfs(a = a).classes) for a in range(1, 11)]
    elapsed = time.perf_counter() - started
    assert counts == [len(CANONICAL_ROWS[a]) for a in range(1, 11)]
    assert elapsed < 10.0


@pytest.mark.slow
@pytest.mark.long
@pytest.mark.parametrize("a", [12, 13, 14])
def test_enumerate_matches_published_table_large(a: int) -> None:
    assert_enumeration_matches(a = a, workers = 4)


def test_enumerate_rejects_bad_workers() -> None:
    with pytest.raises(ValueError):
        enumerate_sedfs(a = 3, workers = 0)


def test_enumerate_report_counters() -> None:
    report = enumerate_sedfs(a = 3)
    assert report.a == 3
    assert report.candidate_count == 2
    assert report.solution_count >= 1
    assert report.elapsed >= 0.0
    assert report.canonical_sedfs == [Sedf.of(10, [0, 1, 2], [3, 6, 9])]


def test_enumerate_independent_of_worker_count() -> None:
    """Verify one and two workers give identical classes, representatives and maps."""
    single = enumerate_sedfs(a = 6, workers = 1)
    double = enumerate_sedfs(a = 6, workers = 2)
    assert single.classes == double.classes
    assert single.candidate_count == double.candidate_count


def test_preselect_half_pair_keeps_results() -> None:
    for a in (3, 5, 7):
        plain = enumerate_sedfs(a = a)
        forced = enumerate_sedfs(a = a, preselect_half_pair = True)
        assert plain.canonical_sedfs == forced.canonical_sedfs


@pytest.mark.slow
@pytest.mark.parametrize("a", [2, 3, 4, 5, 6])
def test_unit_filter_does_not_lose_classes(a: int) -> None:
    """Verify the unit filter drops no class.

    Args:
        a: Set size.
    """
    filtered = enumerate_sedfs(a = a)
    unfiltered = enumerate_sedfs(a = a, unit_filter = False)
    assert filtered.canonical_sedfs == unfiltered.canonical_sedfs
    assert unfiltered.candidate_count >= filtered.candidate_count


def test_scan_shard_records_first_origin() -> None:
    result = scan_shard(a = 4, prefix = (1,))
    assert result.candidate_count > 0
    assert result.found
    for key, ((pairs, solution), alpha, beta, swapped) in result.found.items():
        assert pairs[0] == 1 and len(solution) == 2
        found = Sedf(n = 17, set_a = set_from_pairs(pairs, 17), set_b = set_from_pairs(solution, 17))
        if swapped:
            found = found.swapped()
        mapping = AffineMap(alpha = alpha, beta = beta, modulus = 17)
        assert apply_affine(mapping, found.set_a).elements == key[0]
        assert apply_affine(mapping, found.set_b).elements == key[1]


@pytest.mark.parametrize("a", [1, 2, 3, 4])
def test_brute_force_agrees_with_enumeration(a: int) -> None:
    """Verify the unrestricted search finds the same classes as the symmetric search.

    Args:
        a: Set size.
    """
    assert brute_force_sedfs(a) == enumerate_sedfs(a = a).canonical_sedfs


@pytest.mark.slow
def test_brute_force_agrees_with_enumeration_for_five() -> None:
    assert brute_force_sedfs(5) == enumerate_sedfs(a = 5).canonical_sedfs


def test_published_symmetric_rows_map_to_canonical_rows() -> None:
    """Verify each printed symmetric representative is valid and its printed map gives its canonical row.

    Args:
        None: This function does not accept parameters.
    """
    for number, (a_pairs, b_pairs, alpha, beta) in SYMMETRIC_ROWS.items():
        a = int(number.split(".")[0])
        v = modulus_for(a)
        symmetric = Sedf(n = v, set_a = set_from_pairs(a_pairs, v), set_b = set_from_pairs(b_pairs, v))
        assert verify_sedf(symmetric).valid, number
        mapping = AffineMap(alpha = alpha, beta = beta, modulus = v)
        image = Sedf(n = v, set_a = apply_affine(mapping, symmetric.set_a), set_b = apply_affine(mapping, symmetric.set_b))
        assert image in published_canonical(a), number
        assert canonical_form(symmetric)[0] == image, number


def test_published_blowup_sequences_cover_table() -> None:
    """Verify the printed sequences give exactly the canonical rows for every a, ignoring row numbers."""
    for a, sequences in BLOWUP_SEQUENCES.items():
        produced = {canonical_form(to_sedf(compose(parse_sequence(text))))[0] for text in sequences}
        assert produced == published_canonical(a), a


def test_alpha_coverage_of_small_reports() -> None:
    """Verify the worked coverage matches, (3,3) for a=3 and (3,2,2,3) for the second class of a=6."""
    three = alpha_coverage(enumerate_sedfs(a = 3))
    assert len(three) == 1
    assert three[0].is_alpha and three[0].exact
    assert format_sequence(list(three[0].steps)) == "(3,3)"

    six = alpha_coverage(enumerate_sedfs(a = 6))
    sequences = {match.sedf: format_sequence(list(match.steps)) for match in six}
    assert sequences[Sedf.of(37, [0, 1, 2, 6, 7, 8], [9, 12, 21, 24, 33, 36])] == "(3,2,2,3)"
    assert sequences[Sedf.of(37, [0, 1, 2, 3, 4, 5], [6, 12, 18, 24, 30, 36])] == "(6,6)"


def test_alpha_coverage_flags_unmatched_class(caplog: pytest.LogCaptureFixture) -> None:
    stray = Sedf.of(17, [0, 1, 2, 3], [4, 8, 12, 16])
    report = EnumerationReport(a = 3)
    report.classes = enumerate_sedfs(a = 4).classes[:1]
    with caplog.at_level("WARNING", logger = "service.enumeration_service"):
        matches = alpha_coverage(report)
    assert matches[0] == CoverageMatch(sedf = stray, steps = tuple(parse_sequence("(4,4)")), exact = True)

    report.classes[0] = EnumerationClass(
        canonical = Sedf.of(17, [1, 3, 14, 16], [4, 5, 12, 13]),
        symmetric = report.classes[0].symmetric,
        mapping = report.classes[0].mapping,
    )
    with caplog.at_level("WARNING", logger = "service.enumeration_service"):
        unmatched = alpha_coverage(report)
    assert not unmatched[0].is_alpha
    assert "not equivalent" in caplog.text


def test_ordered_factorizations() -> None:
    assert ordered_factorizations(1) == [()]
    assert ordered_factorizations(4) == [(2, 2), (4,)]
    assert sorted(ordered_factorizations(12)) == sorted([
        (2, 2, 3), (2, 3, 2), (3, 2, 2), (2, 6), (6, 2), (3, 4), (4, 3), (12,),
    ])


def test_alternating_sequences() -> None:
    """Verify the sequence lists for a=1, a=4 and the II-first ordering.

    Args:
        None: This function does not accept parameters.
    """
    assert alternating_sequences(1) == [()]
    four = [format_sequence(list(steps)) for steps in alternating_sequences(4)]
    assert four[:3] == ["(4,4)", "(2,4,2)", "(2,2,2,2)"]
    assert len(four) == 6
    assert all(steps[0].kind is BlowupKind.II for steps in alternating_sequences(4)[:3])
    assert all(steps[0].kind is BlowupKind.I for steps in alternating_sequences(4)[3:])
    for steps in alternating_sequences(6):
        valuation = compose(list(steps))
        assert (valuation.a, valuation.b) == (6, 6)


def test_group_sequences_equivalences() -> None:
    """Verify the known groups of equivalent sequences."""
    six = {
        canonical: sorted(format_sequence(list(steps)) for steps in sequences)
        for canonical, sequences in group_sequences(6).items()
    }
    assert set(six) == published_canonical(6)
    pair_class = six[Sedf.of(37, [0, 1, 2, 6, 7, 8], [9, 12, 21, 24, 33, 36])]
    assert "(3,2,2,3)" in pair_class and "(2,3,3,2)" in pair_class
    rosa_class = six[Sedf.of(37, [0, 1, 2, 3, 4, 5], [6, 12, 18, 24, 30, 36])]
    assert "(6,6)" in rosa_class
    assert "(2,6,3)" in rosa_class and "(3,6,2)" in rosa_class

    assert all(sequences for sequences in group_sequences(8).values())
    assert set(group_sequences(8)) == published_canonical(8)


def test_every_composed_pair_is_a_valid_mate() -> None:
    for a in range(2, 7):
        v = modulus_for(a)
        for steps in alternating_sequences(a):
            sedf = to_sedf(compose(list(steps)))
            assert verify_sedf(sedf).valid
            assert sedf.n == v


def test_candidate_counts_grow_with_a() -> None:
    counts = [sum(1 for _ in candidate_pairs(a = a)) for a in (2, 4, 6)]
    assert counts == sorted(counts)
    assert all(len(pairs) == 3 for pairs in candidate_pairs(a = 6))
    assert all(pairs == tuple(sorted(pairs)) for pairs in candidate_pairs(a = 6))
    assert sum(1 for _ in candidate_pairs(a = 6, unit_filter = False)) == len(list(combinations(range(1, 19), 3)))
