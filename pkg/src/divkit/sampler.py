"""Greedy entropy-maximizing document selection, plus reference samplers.

The heuristic grows a working corpus by scanning candidates one at a time:
every candidate whose addition would increase entropy counts toward the
current exhaustivity quota e, and once e such candidates have been seen the
best of them is committed.  When the stream runs out before the target size
is reached, the schedule drops to the next smaller e and the remaining
candidates are rescanned from the beginning.  Small e values trade selection
quality for the certainty of reaching the target.

Two reference arms exist for evaluation: seeded uniform random selection,
and exhaustive subset search (the optimum, tractable only for tiny pools).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .corpus import Document, random_subset
from .entropy import CategoryCounts, EntropyAccumulator, renyi_entropy
from .errors import ConfigurationError
from .normalize import NormalizerConfig, normalize, token_counts
from .parallel import ordered_map

__all__ = [
    "BruteForceResult",
    "SampleResult",
    "SamplerConfig",
    "TrajectoryPoint",
    "heuristic_sample",
    "optimal_sample_bruteforce",
    "random_sample",
]

# Gains this close are a tie; the earlier candidate in scan order wins.
GAIN_TIE_EPS = 1e-12

# Candidates scored per batch when evaluating with worker threads.
_CHUNK = 256

# Exhaustive search is O(2^n); refuse anything bigger.
MAX_BRUTEFORCE_DOCS = 20


@dataclass
class SamplerConfig:
    """Target size in tokens, exhaustivity schedule, entropy order, seed."""

    target_tokens: int
    exhaustivity: list[int] = field(default_factory=lambda: [1000, 100, 10, 1])
    alpha: float = 1.0
    seed: int | None = None  # optional shuffle of candidate order

    def validate(self) -> None:
        if self.target_tokens <= 0:
            raise ConfigurationError(f"target_tokens must be positive, got {self.target_tokens}")
        if not self.exhaustivity:
            raise ConfigurationError("exhaustivity schedule must not be empty")
        if any(e < 1 for e in self.exhaustivity):
            raise ConfigurationError("exhaustivity values must be >= 1")
        if any(b >= a for a, b in zip(self.exhaustivity, self.exhaustivity[1:])):
            raise ConfigurationError("exhaustivity values must be strictly decreasing")


@dataclass
class TrajectoryPoint:
    """State right after one commit."""

    doc_id: str
    tokens_total: int
    entropy: float


@dataclass
class SampleResult:
    """Selected ids in commit order plus enough trace to replay the run."""

    selected: list[str]
    final_entropy: float
    trajectory: list[TrajectoryPoint]
    reached_target: bool
    exhaustivity_used: list[tuple[int, int]]  # (e value, commits made at it)


@dataclass
class _Candidate:
    id: str
    delta: CategoryCounts
    tokens: int
    taken: bool = False


def _prepare(doc: Document, config: NormalizerConfig) -> _Candidate:
    delta = token_counts(normalize(doc.text, config))
    doc.token_count = delta.total
    return _Candidate(id=doc.id, delta=delta, tokens=delta.total)


def heuristic_sample(
    initial: CategoryCounts,
    candidates: Iterable[Document],
    config: SamplerConfig,
    normalizer: NormalizerConfig | None = None,
    threads: int = 1,
) -> SampleResult:
    """Greedy exhaustivity-scheduled selection maximizing H_alpha.

    A candidate qualifies when its entropy gain is strictly positive; against
    an empty working corpus any non-empty candidate qualifies (growing from
    nothing cannot decrease diversity, and the target size must be reachable
    from an empty start).  When the stream ends mid-window with at least one
    qualifying candidate tracked, the best one is committed before the level
    ends, so tail documents are selectable.

    Thread workers only parallelize gain scoring inside a window; commits are
    serialized and results are identical for every worker count.
    """
    config.validate()
    normalizer = normalizer or NormalizerConfig()
    alpha = config.alpha
    acc = EntropyAccumulator(initial, tracked_alphas=(alpha,))

    selected: list[str] = []
    trajectory: list[TrajectoryPoint] = []
    levels_used: list[tuple[int, int]] = []

    def result(reached: bool) -> SampleResult:
        return SampleResult(
            selected=selected,
            final_entropy=acc.entropy(alpha),
            trajectory=trajectory,
            reached_target=reached,
            exhaustivity_used=levels_used,
        )

    if acc.total >= config.target_tokens:
        return result(True)

    cache: list[_Candidate] = []
    cache_complete = False

    def scan() -> Iterator[_Candidate]:
        nonlocal cache_complete
        if cache_complete:
            yield from cache
            return
        for doc in candidates:
            rec = _prepare(doc, normalizer)
            cache.append(rec)
            yield rec
        cache_complete = True

    if config.seed is not None:
        # A shuffled candidate order needs the whole pool up front.
        for _ in scan():
            pass
        random.Random(config.seed).shuffle(cache)

    def commit(rec: _Candidate) -> None:
        acc.apply_delta(rec.delta)
        rec.taken = True
        selected.append(rec.id)
        trajectory.append(TrajectoryPoint(rec.id, acc.total, acc.entropy(alpha)))

    for e in config.exhaustivity:
        commits = 0
        window_count = 0
        best: _Candidate | None = None
        best_gain = 0.0
        stream = scan()
        while True:
            chunk = [
                rec
                for rec in itertools.islice(stream, _CHUNK)
                if not rec.taken and rec.tokens > 0
            ]
            if not chunk:
                break
            gains = ordered_map(lambda r: acc.entropy_gain(r.delta, alpha), chunk, threads)
            j = 0
            while j < len(chunk):
                rec, gain = chunk[j], gains[j]
                j += 1
                if gain > 0 or acc.total == 0:
                    window_count += 1
                    if best is None or gain > best_gain + GAIN_TIE_EPS:
                        best, best_gain = rec, gain
                    if window_count >= e:
                        commit(best)
                        commits += 1
                        window_count = 0
                        best, best_gain = None, 0.0
                        if acc.total >= config.target_tokens:
                            levels_used.append((e, commits))
                            return result(True)
                        # The commit changed the distribution; rescore the
                        # rest of the chunk against the new state.
                        chunk = [r for r in chunk[j:] if not r.taken]
                        gains = ordered_map(
                            lambda r: acc.entropy_gain(r.delta, alpha), chunk, threads
                        )
                        j = 0
        if best is not None:
            # Stream ended mid-window: flush the best qualifying candidate.
            commit(best)
            commits += 1
            if acc.total >= config.target_tokens:
                levels_used.append((e, commits))
                return result(True)
        levels_used.append((e, commits))
    return result(False)


def random_sample(
    initial: CategoryCounts,
    candidates: Iterable[Document],
    target_tokens: int,
    seed: int,
    normalizer: NormalizerConfig | None = None,
    alpha: float = 1.0,
) -> SampleResult:
    """Seeded uniform selection until the target size is reached.

    The baseline arm: same normalization, same size accounting, no greed.
    The entropy trajectory is recorded but need not increase.
    """
    if target_tokens <= 0:
        raise ConfigurationError(f"target_tokens must be positive, got {target_tokens}")
    normalizer = normalizer or NormalizerConfig()
    acc = EntropyAccumulator(initial, tracked_alphas=(alpha,))
    if acc.total >= target_tokens:
        return SampleResult([], acc.entropy(alpha), [], True, [])
    records = [_prepare(doc, normalizer) for doc in candidates]
    by_id = {rec.id: rec for rec in records}
    docs = [Document(id=rec.id, text="", token_count=rec.tokens) for rec in records]
    subset = random_subset(docs, target_tokens - acc.total, seed)
    trajectory: list[TrajectoryPoint] = []
    selected: list[str] = []
    for doc_id in subset.ids:
        rec = by_id[doc_id]
        if rec.tokens == 0:
            continue
        acc.apply_delta(rec.delta)
        selected.append(doc_id)
        trajectory.append(TrajectoryPoint(doc_id, acc.total, acc.entropy(alpha)))
    return SampleResult(
        selected=selected,
        final_entropy=acc.entropy(alpha),
        trajectory=trajectory,
        reached_target=subset.reached_target,
        exhaustivity_used=[],
    )


@dataclass
class BruteForceResult:
    """The entropy-optimal feasible subset found by exhaustive search."""

    ids: list[str]
    entropy: float
    token_total: int
    feasible: bool


def optimal_sample_bruteforce(
    initial: CategoryCounts,
    candidates: list[Document],
    target_tokens: int,
    normalizer: NormalizerConfig | None = None,
    alpha: float = 1.0,
) -> BruteForceResult:
    """Enumerate every subset reaching the target and return the one with
    maximal entropy (ties: fewer tokens, then lexicographic id order).

    Entropy is recomputed from scratch per subset, deliberately independent
    of the streaming accumulator the heuristic relies on.  Refuses pools
    larger than ``MAX_BRUTEFORCE_DOCS``.  When no subset reaches the target,
    the full pool is returned flagged infeasible.
    """
    if target_tokens <= 0:
        raise ConfigurationError(f"target_tokens must be positive, got {target_tokens}")
    if len(candidates) > MAX_BRUTEFORCE_DOCS:
        raise ConfigurationError(
            f"exhaustive search is limited to {MAX_BRUTEFORCE_DOCS} documents, "
            f"got {len(candidates)}"
        )
    normalizer = normalizer or NormalizerConfig()
    records = [_prepare(doc, normalizer) for doc in candidates]
    n = len(records)

    working: dict[str, int] = dict(initial.counts)
    tokens = initial.total

    def apply(rec: _Candidate, sign: int) -> None:
        nonlocal tokens
        for cat, c in rec.delta.counts.items():
            new = working.get(cat, 0) + sign * c
            if new:
                working[cat] = new
            else:
                del working[cat]
        tokens += sign * rec.tokens

    def entropy_now() -> float:
        view = CategoryCounts.__new__(CategoryCounts)
        view.counts = working
        view.total = tokens
        return renyi_entropy(view, alpha)

    best_key: tuple[float, int, tuple[str, ...]] | None = None
    best_ids: list[str] = []
    best_entropy = 0.0
    best_tokens = 0
    prev_mask = 0
    # Gray-code order: consecutive masks differ by one document.
    for i in range(1 << n):
        mask = i ^ (i >> 1)
        diff = mask ^ prev_mask
        if diff:
            bit = diff.bit_length() - 1
            apply(records[bit], 1 if mask & diff else -1)
        prev_mask = mask
        if tokens < target_tokens or tokens == 0:
            continue
        h = entropy_now()
        ids = tuple(sorted(records[b].id for b in range(n) if mask >> b & 1))
        key = (-h, tokens, ids)
        if best_key is None or key < best_key:
            best_key = key
            best_ids = [records[b].id for b in range(n) if mask >> b & 1]
            best_entropy = h
            best_tokens = tokens
    if best_key is not None:
        return BruteForceResult(best_ids, best_entropy, best_tokens, feasible=True)
    # Not reachable even with everything: report the full pool.
    full = initial.copy()
    for rec in records:
        full.update(rec.delta)
    h = renyi_entropy(full, alpha) if full.total else 0.0
    return BruteForceResult([rec.id for rec in records], h, full.total, feasible=False)
