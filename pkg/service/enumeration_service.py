import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator

import numpy as np

from service.sedf_service import Sedf, canonical_form, verify_sedf
from service.valuation_service import BlowupKind, BlowupStep, Valuation, compose
from service.valuation_service import decompose, to_sedf, verify_valuation
from utils.exact_cover import exact_covers
from utils.residues import AffineMap, ResidueSet, units


logger = logging.getLogger(__name__)

SHARD_PREFIX_LENGTH = 2


@dataclass(frozen = True)
class SymmetricPair:
    """Represent the negation orbit P_x = {x, -x} in Z_v.

    Args:
        index: Representative x with 0 <= x <= v/2.
        modulus: Group order v.
    """

    index: int
    modulus: int

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(sorted({self.index % self.modulus, -self.index % self.modulus}))

    @property
    def size(self) -> int:
        return len(self.members)

    def label(self) -> str:
        return f"P_{self.index}"


@dataclass(frozen = True, eq = False)
class KmMatrix:
    """Pair-indexed incidence matrix M_A with entries in {0, 1, 2}.

    Args:
        rows: Pair indices d of all rows (every pair except P_0).
        cols: Pair indices y of the pairs not contained in A.
        entries: Array of shape (len(rows), len(cols)).
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    entries: np.ndarray

    def entry(self, d: int, y: int) -> int:
        return int(self.entries[self.rows.index(d), self.cols.index(y)])

    def column(self, y: int) -> dict[int, int]:
        """Return the nonzero entries of column P_y keyed by row index.

        Args:
            y: Column pair index.
        """
        values = self.entries[:, self.cols.index(y)]
        return {d: int(value) for d, value in zip(self.rows, values) if value}


@dataclass(frozen = True)
class EnumerationClass:
    """One inequivalent SEDF with its symmetric representative.

    Args:
        canonical: Canonical form.
        symmetric: Symmetric representative found by the search, ordered so
            that `mapping` sends its first set onto the canonical first set.
        mapping: Affine map from the symmetric representative to the canonical form.
    """

    canonical: Sedf
    symmetric: Sedf
    mapping: AffineMap


@dataclass
class EnumerationReport:
    """Result of an exhaustive enumeration for one value of a.

    Args:
        a: Set size.
        classes: Inequivalent classes sorted by canonical form.
        candidate_count: Candidate sets A processed after the unit filter.
        solution_count: Mates found before canonical deduplication.
        elapsed: Wall-clock seconds.
    """

    a: int
    classes: list[EnumerationClass] = field(default_factory = list)
    candidate_count: int = 0
    solution_count: int = 0
    elapsed: float = 0.0

    @property
    def canonical_sedfs(self) -> list[Sedf]:
        return [item.canonical for item in self.classes]


@dataclass(frozen = True)
class CoverageMatch:
    """Blowup sequence witnessing that a class comes from an alpha-valuation.

    Args:
        sedf: Canonical SEDF of the class.
        steps: Witnessing sequence, or None when no sequence matches.
        exact: Whether the composed valuation equals the canonical form itself.
    """

    sedf: Sedf
    steps: tuple[BlowupStep, ...] | None
    exact: bool = False

    @property
    def is_alpha(self) -> bool:
        return self.steps is not None


@dataclass
class ShardResult:
    candidate_count: int = 0
    solution_count: int = 0
    found: dict[tuple, tuple] = field(default_factory = dict)


def modulus_for(a: int) -> int:
    if a < 1:
        raise ValueError(f"a must be positive, got {a}")
    return a * a + 1


def pair_index(value: int, v: int) -> int:
    """Return the representative of P_value in [0, v/2].

    Args:
        value: Any integer.
        v: Group order.
    """
    reduced = value % v
    return min(reduced, v - reduced) if reduced else 0


def pairs_of(s: ResidueSet) -> tuple[int, ...]:
    """Return the sorted pair indices of a symmetric set.

    Args:
        s: Set closed under negation.
    """
    if not s.is_symmetric():
        raise ValueError(f"Set {s.elements} is not closed under negation")
    return tuple(sorted({pair_index(value, s.modulus) for value in s}))


def set_from_pairs(pairs: Iterable[int], v: int) -> ResidueSet:
    """Union of the pairs P_x for the given indices.

    Args:
        pairs: Pair indices.
        v: Group order.
    """
    return ResidueSet.of((member for x in pairs for member in (x, -x)), v)


def pair_universe(a: int) -> list[SymmetricPair]:
    """List the row pairs P_1, ..., P_{floor(v/2)} for v = a^2 + 1.

    Args:
        a: Set size.
    """
    v = modulus_for(a)
    return [SymmetricPair(index = x, modulus = v) for x in range(1, v // 2 + 1)]


def unit_pair_maps(v: int) -> np.ndarray | None:
    """Tabulate x -> pair_index(m x) for each unit m that acts nontrivially on pairs.

    Args:
        v: Group order.
    """
    v0 = (v - 1) // 2
    multipliers = [m for m in units(v) if 1 < m <= v // 2]
    if not multipliers or v0 < 1:
        return None
    table = np.zeros((len(multipliers), v0 + 1), dtype = np.int64)
    for row, m in enumerate(multipliers):
        for x in range(v0 + 1):
            table[row, x] = pair_index(m * x, v)
    return table


def prefix_is_minimal(prefix: list[int], maps: np.ndarray | None) -> bool:
    """Check that no unit maps the prefix to a lexicographically smaller set.

    A prefix that fails can never extend to a surviving candidate, because the
    smallest k elements of mT are elementwise at most the sorted image of the prefix.

    Args:
        prefix: Increasing pair indices.
        maps: Table from `unit_pair_maps`.
    """
    if maps is None:
        return True
    images = np.sort(maps[:, prefix], axis = 1)
    difference = images - np.asarray(prefix, dtype = np.int64)
    first = np.argmax(difference != 0, axis = 1)
    signs = difference[np.arange(len(difference)), first]
    return not bool(np.any(signs < 0))


def _orderly_extend(
    prefix: list[int],
    v0: int,
    size: int,
    maps: np.ndarray | None,
) -> Iterator[tuple[int, ...]]:
    if len(prefix) == size:
        yield tuple(prefix)
        return
    start = prefix[-1] + 1 if prefix else 1
    for value in range(start, v0 - (size - len(prefix)) + 2):
        prefix.append(value)
        if prefix_is_minimal(prefix = prefix, maps = maps):
            yield from _orderly_extend(prefix = prefix, v0 = v0, size = size, maps = maps)
        prefix.pop()


def candidate_pairs(
    a: int,
    unit_filter: bool = True,
    prefix: tuple[int, ...] = (),
) -> Iterator[tuple[int, ...]]:
    """Yield the a0-subsets T of {1, ..., v0} in lexicographic order.

    Args:
        a: Set size.
        unit_filter: Whether to skip T when some unit gives a smaller mA.
        prefix: Only yield T starting with this prefix.
    """
    v = modulus_for(a)
    v0 = (v - 1) // 2
    size = a // 2
    if not unit_filter:
        remaining = size - len(prefix)
        start = prefix[-1] + 1 if prefix else 1
        for tail in combinations(range(start, v0 + 1), remaining):
            yield prefix + tail
        return

    maps = unit_pair_maps(v)
    if prefix and not prefix_is_minimal(prefix = list(prefix), maps = maps):
        return
    yield from _orderly_extend(prefix = list(prefix), v0 = v0, size = size, maps = maps)


def candidate_set(a: int, pairs: tuple[int, ...]) -> ResidueSet:
    """Build A = T u (v - T), plus 0 when a is odd.

    Args:
        a: Set size.
        pairs: The subset T.
    """
    v = modulus_for(a)
    base = (0,) if a % 2 else ()
    return set_from_pairs(base + pairs, v)


def candidate_sets(a: int, unit_filter: bool = True) -> Iterator[ResidueSet]:
    """Yield the symmetric candidate sets A in the order of their T.

    Args:
        a: Set size.
        unit_filter: Whether to apply the unit filter.
    """
    for pairs in candidate_pairs(a = a, unit_filter = unit_filter):
        yield candidate_set(a = a, pairs = pairs)


def build_matrix(a_pairs: Iterable[int], a: int) -> KmMatrix:
    """Build M_A where entry [d][y] counts P_x in A with P_x = P_{d +- y}.

    Args:
        a_pairs: Pair indices of A (0 included when a is odd).
        a: Set size.
    """
    v = modulus_for(a)
    chosen = sorted(set(a_pairs))
    rows = tuple(range(1, v // 2 + 1))
    cols = tuple(y for y in rows if y not in chosen)
    entries = np.zeros((len(rows), len(cols)), dtype = np.int8)
    if not cols or not chosen:
        return KmMatrix(rows = rows, cols = cols, entries = entries)

    xs = np.asarray(chosen, dtype = np.int64)[:, None]
    ys = np.asarray(cols, dtype = np.int64)[None, :]
    plus = (xs + ys) % v
    minus = (xs - ys) % v
    plus = np.minimum(plus, v - plus)
    minus = np.minimum(minus, v - minus)
    col_index = np.broadcast_to(np.arange(len(cols)), plus.shape)
    np.add.at(entries, (plus - 1, col_index), 1)
    distinct = minus != plus
    np.add.at(entries, (minus[distinct] - 1, col_index[distinct]), 1)
    return KmMatrix(rows = rows, cols = cols, entries = entries)


def commit_forced_columns(
    ones: np.ndarray,
    usable: np.ndarray,
    forced: Iterable[int] = (),
) -> tuple[np.ndarray, np.ndarray, list[int]] | None:
    """Commit requested columns, then every column that is a row's only remaining cover.

    Committing a column removes the rows it covers and every column that meets
    them. The loop stops once no live row has a single live column.

    Args:
        ones: Boolean matrix, True where an entry equals 1.
        usable: Columns that hold no 2.
        forced: Column positions that must be part of the cover.

    Returns:
        (live_rows, live_cols, chosen) for the residual problem, or None when
        two committed columns collide or a row is left without cover.
    """
    live_rows = np.ones(ones.shape[0], dtype = bool)
    live_cols = usable.copy()
    chosen: list[int] = []
    pending = list(forced)
    while True:
        for col in pending:
            if not live_cols[col]:
                return None
            covered = ones[:, col] & live_rows
            chosen.append(col)
            live_rows &= ~covered
            live_cols &= ~ones[covered].any(axis = 0)
            live_cols[col] = False
        if not live_rows.any():
            return live_rows, live_cols, chosen
        residual = ones[np.ix_(live_rows, live_cols)]
        counts = residual.sum(axis = 1)
        if (counts == 0).any():
            return None
        single = counts == 1
        if not single.any():
            return live_rows, live_cols, chosen
        col_ids = np.flatnonzero(live_cols)
        pending = sorted(set(col_ids[residual[single].argmax(axis = 1)].tolist()))


def solve_exact_cover(
    m: KmMatrix,
    forced: tuple[int, ...] = (),
) -> list[tuple[int, ...]]:
    """Find every 0/1 vector U with M U^T = J^T, as sets of chosen columns.

    Columns holding a 2 are dropped first. Forced columns and columns that are
    the only cover of some row are committed in numpy before the remaining
    problem goes to dancing links.

    Args:
        m: Matrix to solve.
        forced: Columns that must be part of every solution.
    """
    entries = m.entries
    if entries.shape[1] == 0:
        return [()] if entries.shape[0] == 0 else []
    usable = ~(entries >= 2).any(axis = 0)
    ones = entries == 1
    position_of = {y: position for position, y in enumerate(m.cols)}
    if any(y not in position_of for y in forced):
        return []

    committed = commit_forced_columns(
        ones = ones,
        usable = usable,
        forced = [position_of[y] for y in forced],
    )
    if committed is None:
        return []
    live_rows, live_cols, chosen = committed

    row_ids = np.flatnonzero(live_rows)
    col_ids = np.flatnonzero(live_cols)
    options: dict[int, list[int]] = {int(col): [] for col in col_ids}
    hit_cols, hit_rows = np.nonzero(ones[np.ix_(live_rows, live_cols)].T)
    for col, row in zip(col_ids[hit_cols].tolist(), row_ids[hit_rows].tolist()):
        options[col].append(row)

    solutions = exact_covers(items = row_ids.tolist(), options = options)
    return sorted(tuple(sorted(m.cols[col] for col in chosen + solution)) for solution in solutions)


def _mate_pairs(a: int, a_pairs: tuple[int, ...], preselect_half_pair: bool) -> list[tuple[int, ...]]:
    v = modulus_for(a)
    matrix = build_matrix(a_pairs = a_pairs, a = a)
    forced = (v // 2,) if preselect_half_pair and a % 2 == 1 else ()
    return solve_exact_cover(m = matrix, forced = forced)


def mates(a_set: ResidueSet, a: int, preselect_half_pair: bool = False) -> list[ResidueSet]:
    """Return every symmetric mate B of a symmetric set A.

    Args:
        a_set: Symmetric set A.
        a: Set size.
        preselect_half_pair: For odd a, force P_{v/2} into B before searching.
    """
    v = modulus_for(a)
    if a_set.modulus != v:
        raise ValueError(f"Modulus mismatch: {a_set.modulus} != {v}")
    a_pairs = pairs_of(a_set)
    found: list[ResidueSet] = []
    for solution in _mate_pairs(a = a, a_pairs = a_pairs, preselect_half_pair = preselect_half_pair):
        b_set = set_from_pairs(solution, v)
        report = verify_sedf(Sedf(n = v, set_a = a_set, set_b = b_set))
        if not report.valid:
            raise RuntimeError(f"Exact cover produced an invalid mate {b_set.elements}: {report.reason}")
        found.append(b_set)
    return found


def _shard_prefixes(a: int, unit_filter: bool) -> list[tuple[int, ...]]:
    size = a // 2
    length = min(SHARD_PREFIX_LENGTH, size)
    if length == 0:
        return [()]
    v0 = (modulus_for(a) - 1) // 2
    maps = unit_pair_maps(modulus_for(a)) if unit_filter else None
    return list(_orderly_extend(prefix = [], v0 = v0, size = length, maps = maps))


def scan_shard(
    a: int,
    prefix: tuple[int, ...],
    unit_filter: bool = True,
    preselect_half_pair: bool = False,
) -> ShardResult:
    """Process every candidate whose T starts with `prefix`.

    Returns, per canonical form, the first (T, mate pairs) found together with
    the canonicalizing witness.

    Args:
        a: Set size.
        prefix: Shard key.
        unit_filter: Whether to apply the unit filter.
        preselect_half_pair: For odd a, force P_{v/2} into B.
    """
    v = modulus_for(a)
    result = ShardResult()
    base = (0,) if a % 2 else ()
    for pairs in candidate_pairs(a = a, unit_filter = unit_filter, prefix = prefix):
        result.candidate_count += 1
        a_set = set_from_pairs(base + pairs, v)
        for solution in _mate_pairs(a = a, a_pairs = base + pairs, preselect_half_pair = preselect_half_pair):
            sedf = Sedf(n = v, set_a = a_set, set_b = set_from_pairs(solution, v))
            report = verify_sedf(sedf)
            if not report.valid:
                raise RuntimeError(f"Exact cover produced an invalid SEDF {sedf}: {report.reason}")
            result.solution_count += 1
            canonical, witness = canonical_form(sedf)
            key = canonical.sort_key()
            origin = (pairs, solution)
            if key not in result.found or origin < result.found[key][0]:
                result.found[key] = (origin, witness.map.alpha, witness.map.beta, witness.swapped)
    logger.debug(
        "Shard %s of a=%d: %d candidates, %d mates, %d classes",
        prefix, a, result.candidate_count, result.solution_count, len(result.found),
    )
    return result


def _run_shard(arguments: tuple[int, tuple[int, ...], bool, bool]) -> ShardResult:
    a, prefix, unit_filter, preselect_half_pair = arguments
    return scan_shard(
        a = a,
        prefix = prefix,
        unit_filter = unit_filter,
        preselect_half_pair = preselect_half_pair,
    )


def enumerate_sedfs(
    a: int,
    workers: int = 1,
    unit_filter: bool = True,
    preselect_half_pair: bool = False,
) -> EnumerationReport:
    """Enumerate all inequivalent (a^2+1, 2, a; 1)-SEDFs in Z_{a^2+1}.

    Args:
        a: Set size, at least 1.
        workers: Number of worker processes; output does not depend on it.
        unit_filter: Whether to apply the unit filter.
        preselect_half_pair: For odd a, force P_{v/2} into B.
    """
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    v = modulus_for(a)
    started = time.perf_counter()
    tasks = [
        (a, prefix, unit_filter, preselect_half_pair)
        for prefix in _shard_prefixes(a = a, unit_filter = unit_filter)
    ]
    logger.info("Enumerating a=%d over %d shards with %d workers", a, len(tasks), workers)

    if workers == 1 or len(tasks) == 1:
        shard_results = [_run_shard(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers = workers) as executor:
            shard_results = list(executor.map(_run_shard, tasks))

    report = EnumerationReport(a = a)
    merged: dict[tuple, tuple] = {}
    for shard in shard_results:
        report.candidate_count += shard.candidate_count
        report.solution_count += shard.solution_count
        for key, record in shard.found.items():
            if key not in merged or record[0] < merged[key][0]:
                merged[key] = record

    base = (0,) if a % 2 else ()
    for key in sorted(merged):
        (pairs, solution), alpha, beta, swapped = merged[key]
        symmetric = Sedf(
            n = v,
            set_a = set_from_pairs(base + pairs, v),
            set_b = set_from_pairs(solution, v),
        )
        if swapped:
            symmetric = symmetric.swapped()
        report.classes.append(
            EnumerationClass(
                canonical = Sedf.of(v, key[0], key[1]),
                symmetric = symmetric,
                mapping = AffineMap(alpha = alpha, beta = beta, modulus = v),
            )
        )
    report.elapsed = time.perf_counter() - started
    logger.info(
        "a=%d: %d candidates, %d mates, %d classes in %.2fs",
        a, report.candidate_count, report.solution_count, len(report.classes), report.elapsed,
    )
    return report


def _backtrack_mates(a_values: tuple[int, ...], v: int, size: int) -> Iterator[tuple[int, ...]]:
    covered = bytearray(v)
    covered[0] = 1
    members = set(a_values)
    chosen: list[int] = []

    def search(next_gap: int) -> Iterator[tuple[int, ...]]:
        while next_gap < v and covered[next_gap]:
            next_gap += 1
        if next_gap == v:
            if len(chosen) == size:
                yield tuple(sorted(chosen))
            return
        if len(chosen) == size:
            return
        for x in a_values:
            y = (next_gap + x) % v
            if y in members:
                continue
            differences = [(y - other) % v for other in a_values]
            if any(covered[d] for d in differences):
                continue
            for d in differences:
                covered[d] = 1
            chosen.append(y)
            yield from search(next_gap + 1)
            chosen.pop()
            for d in differences:
                covered[d] = 0

    yield from search(1)


def brute_force_sedfs(a: int) -> list[Sedf]:
    """Enumerate canonical classes with no symmetry assumptions.

    Every a-subset A of Z_{a^2+1} is tried and each mate B is found by
    backtracking on the smallest uncovered difference.

    Args:
        a: Set size; practical for a <= 5.
    """
    v = modulus_for(a)
    classes: set[Sedf] = set()
    for a_values in combinations(range(v), a):
        for b_values in _backtrack_mates(a_values = a_values, v = v, size = a):
            canonical, _ = canonical_form(Sedf.of(v, a_values, b_values))
            classes.add(canonical)
    return sorted(classes, key = Sedf.sort_key)


def ordered_factorizations(n: int) -> list[tuple[int, ...]]:
    """List every ordered factorization of n into parts >= 2.

    Args:
        n: Positive integer.
    """
    if n == 1:
        return [()]
    found: list[tuple[int, ...]] = []
    for part in range(2, n + 1):
        if n % part == 0:
            for rest in ordered_factorizations(n // part):
                found.append((part,) + rest)
    return found


def _interleave(first: BlowupKind, leading: tuple[int, ...], following: tuple[int, ...]) -> tuple[BlowupStep, ...]:
    steps: list[BlowupStep] = []
    for index in range(len(leading) + len(following)):
        source = leading if index % 2 == 0 else following
        kind = first if index % 2 == 0 else first.other()
        steps.append(BlowupStep(kind = kind, ell = source[index // 2]))
    return tuple(steps)


def alternating_sequences(a: int) -> list[tuple[BlowupStep, ...]]:
    """List every alternating blowup sequence producing a valuation of K_{a,a}.

    Ordered with II-first sequences before I-first ones, then by length, then by ell values.

    Args:
        a: Side size.
    """
    factorizations = ordered_factorizations(a)
    found: set[tuple[BlowupStep, ...]] = set()
    for large_parts in factorizations:
        for small_parts in factorizations:
            if len(large_parts) in (len(small_parts), len(small_parts) + 1):
                found.add(_interleave(BlowupKind.II, large_parts, small_parts))
            if len(small_parts) in (len(large_parts), len(large_parts) + 1):
                found.add(_interleave(BlowupKind.I, small_parts, large_parts))

    def order(steps: tuple[BlowupStep, ...]) -> tuple:
        leads_with_one = bool(steps) and steps[0].kind is BlowupKind.I
        return leads_with_one, len(steps), tuple(step.ell for step in steps)

    return sorted(found, key = order)


def group_sequences(a: int) -> dict[Sedf, list[tuple[BlowupStep, ...]]]:
    """Group alternating sequences by the canonical form of their SEDF.

    Args:
        a: Side size.
    """
    groups: dict[Sedf, list[tuple[BlowupStep, ...]]] = {}
    for steps in alternating_sequences(a):
        canonical, _ = canonical_form(to_sedf(compose(steps)))
        groups.setdefault(canonical, []).append(steps)
    return dict(sorted(groups.items(), key = lambda item: item[0].sort_key()))


def _as_valuation(sedf: Sedf) -> Valuation | None:
    if not sedf.set_a.elements or sedf.set_a.elements[-1] >= sedf.set_b.elements[0]:
        return None
    candidate = Valuation.of(sedf.set_a.elements, sedf.set_b.elements)
    return candidate if verify_valuation(candidate).valid else None


def alpha_coverage(report: EnumerationReport) -> list[CoverageMatch]:
    """Match each enumerated class with a blowup sequence, or flag it NOT-alpha.

    Args:
        report: Output of `enumerate_sedfs`.
    """
    matches: dict[Sedf, CoverageMatch] = {}
    for sedf in report.canonical_sedfs:
        valuation = _as_valuation(sedf)
        if valuation is not None:
            matches[sedf] = CoverageMatch(sedf = sedf, steps = tuple(decompose(valuation)), exact = True)

    pending = [sedf for sedf in report.canonical_sedfs if sedf not in matches]
    if pending:
        for steps in alternating_sequences(report.a):
            canonical, _ = canonical_form(to_sedf(compose(steps)))
            if canonical in pending and canonical not in matches:
                matches[canonical] = CoverageMatch(sedf = canonical, steps = steps)
            if all(sedf in matches for sedf in pending):
                break

    results: list[CoverageMatch] = []
    for sedf in report.canonical_sedfs:
        match = matches.get(sedf, CoverageMatch(sedf = sedf, steps = None))
        if not match.is_alpha:
            logger.warning("Class %s is not equivalent to any alpha-valuation", sedf)
        results.append(match)
    return results
