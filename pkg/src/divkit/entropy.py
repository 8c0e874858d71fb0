"""Shannon and Rényi entropies over category distributions, exact and incremental.

Everything downstream (lexical diversity, syntactic diversity, the greedy
sampler) reduces to one substrate: a multiset of category counts.  This
module provides that substrate (:class:`CategoryCounts`), from-scratch
entropy computation in natural log units, and a streaming accumulator
(:class:`EntropyAccumulator`) whose entropy-gain queries cost O(delta)
instead of O(number of categories).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import ConfigurationError

__all__ = [
    "CategoryCounts",
    "DiversityProfile",
    "EntropyAccumulator",
    "merge",
    "renyi_entropy",
    "shannon_entropy",
]

# Two gridded H_alpha values closer than this are treated as equal when
# checking the non-increasing-in-alpha invariant (pure float noise).
MONOTONE_EPS = 1e-12


class CategoryCounts:
    """Multiset of category -> count pairs; stored counts are always >= 1.

    Categories are opaque strings; ``total`` is the number of elements and
    equals the sum of all counts at all times.
    """

    __slots__ = ("counts", "total")

    def __init__(self, counts: Mapping[str, int] | None = None):
        self.counts: dict[str, int] = {}
        self.total = 0
        if counts:
            for category, count in counts.items():
                self.add(category, count)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "CategoryCounts":
        """Count occurrences of each distinct token."""
        out = cls()
        counts = out.counts
        n = 0
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
            n += 1
        out.total = n
        return out

    def add(self, category: str, count: int = 1) -> None:
        if count < 1 or count != int(count):
            raise ValueError(f"count for {category!r} must be a positive integer, got {count!r}")
        self.counts[category] = self.counts.get(category, 0) + int(count)
        self.total += int(count)

    def update(self, other: "CategoryCounts") -> None:
        """Pointwise-add another count table into this one."""
        counts = self.counts
        for category, count in other.counts.items():
            counts[category] = counts.get(category, 0) + count
        self.total += other.total

    @property
    def variety(self) -> int:
        """Number of distinct categories (richness n)."""
        return len(self.counts)

    def copy(self) -> "CategoryCounts":
        out = CategoryCounts()
        out.counts = dict(self.counts)
        out.total = self.total
        return out

    def get(self, category: str, default: int = 0) -> int:
        return self.counts.get(category, default)

    def items(self):
        return self.counts.items()

    def __getitem__(self, category: str) -> int:
        return self.counts[category]

    def __contains__(self, category: str) -> bool:
        return category in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self) -> Iterator[str]:
        return iter(self.counts)

    def __bool__(self) -> bool:
        return self.total > 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CategoryCounts):
            return NotImplemented
        return self.counts == other.counts

    def __repr__(self) -> str:
        return f"CategoryCounts(n={len(self.counts)}, total={self.total})"


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError(f"Renyi order must be a finite value >= 0, got {alpha!r}")
    return alpha


def shannon_entropy(counts: CategoryCounts) -> float:
    """Shannon entropy -sum(p_i ln p_i) of a nonempty count table, in nats.

    Computed in the counts form ln(m) - sum(c_i ln c_i)/m, which avoids one
    division per category and is exact for uniform tables.
    """
    if counts.total == 0:
        raise ValueError("entropy of an empty distribution is undefined")
    m = counts.total
    s = math.fsum(c * math.log(c) for c in counts.counts.values())
    return math.log(m) - s / m


def renyi_entropy(counts: CategoryCounts, alpha: float) -> float:
    """Rényi entropy H_alpha in nats; alpha=0 is ln(variety), alpha=1 Shannon.

    For alpha not in {0, 1} the power sum is evaluated on probabilities
    factored by the largest count, so arbitrarily large finite orders never
    overflow.
    """
    alpha = _check_alpha(alpha)
    if counts.total == 0:
        raise ValueError("entropy of an empty distribution is undefined")
    if alpha == 0.0:
        return math.log(len(counts.counts))
    if alpha == 1.0:
        return shannon_entropy(counts)
    m = counts.total
    c_max = max(counts.counts.values())
    # sum (c/c_max)^alpha, every term in (0, 1]
    s = math.fsum((c / c_max) ** alpha for c in counts.counts.values())
    return (math.log(s) + alpha * math.log(c_max) - alpha * math.log(m)) / (1.0 - alpha)


def merge(a: CategoryCounts, b: CategoryCounts) -> CategoryCounts:
    """Pointwise sum of two count tables; total adds up."""
    out = a.copy()
    out.update(b)
    return out


class _KahanSum:
    """Compensated running sum; keeps incremental power sums near fsum accuracy."""

    __slots__ = ("value", "_c")

    def __init__(self, value: float = 0.0):
        self.value = value
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.value + y
        self._c = (t - self.value) - y
        self.value = t


def _c_ln_c(c: int) -> float:
    return c * math.log(c) if c > 1 else 0.0


class EntropyAccumulator:
    """Streaming sufficient statistics for entropy over a growing count table.

    Maintains total M, sum(c_i ln c_i), and sum(c_i^alpha) for each tracked
    alpha, so that :meth:`entropy_gain` answers "how much would adding this
    delta change H_alpha" by touching only the delta's categories.

    alpha = 0 (variety) and alpha = 1 (Shannon) are always available; any
    other order must be declared at construction, otherwise the O(delta)
    cost guarantee would silently degrade.

    Concurrency contract: :meth:`entropy` and :meth:`entropy_gain` are
    read-only and safe from many concurrent readers; :meth:`apply_delta`
    requires exclusive access (single writer, readers excluded during the
    commit).
    """

    def __init__(
        self,
        initial: CategoryCounts | None = None,
        tracked_alphas: Iterable[float] = (1.0,),
    ):
        self.counts = CategoryCounts()
        self._sum_c_ln_c = _KahanSum()
        self._power_sums: dict[float, _KahanSum] = {}
        for alpha in tracked_alphas:
            alpha = _check_alpha(alpha)
            if alpha not in (0.0, 1.0):
                self._power_sums[alpha] = _KahanSum()
        if initial is not None and initial.total > 0:
            self.apply_delta(initial)

    @property
    def total(self) -> int:
        return self.counts.total

    @property
    def tracked_alphas(self) -> tuple[float, ...]:
        return (0.0, 1.0) + tuple(sorted(self._power_sums))

    def _require_tracked(self, alpha: float) -> float:
        alpha = _check_alpha(alpha)
        if alpha not in (0.0, 1.0) and alpha not in self._power_sums:
            raise ConfigurationError(
                f"alpha={alpha} is not tracked by this accumulator; "
                f"tracked orders are {self.tracked_alphas}"
            )
        return alpha

    def entropy(self, alpha: float = 1.0) -> float:
        """H_alpha of the current counts; 0.0 for the empty accumulator.

        The empty case is a convention for selection trajectories that start
        from nothing (``shannon_entropy`` itself rejects empty input).
        """
        alpha = self._require_tracked(alpha)
        return self._entropy_from(
            self.counts.total,
            len(self.counts.counts),
            self._sum_c_ln_c.value,
            self._power_sums[alpha].value if alpha not in (0.0, 1.0) else 0.0,
            alpha,
        )

    @staticmethod
    def _entropy_from(m: int, n: int, sum_c_ln_c: float, power_sum: float, alpha: float) -> float:
        if m == 0:
            return 0.0
        if alpha == 0.0:
            return math.log(n)
        if alpha == 1.0:
            return math.log(m) - sum_c_ln_c / m
        return (math.log(power_sum) - alpha * math.log(m)) / (1.0 - alpha)

    def entropy_gain(self, delta: CategoryCounts, alpha: float = 1.0) -> float:
        """H(current + delta) - H(current), without mutating anything.

        Cost is O(number of categories in delta).
        """
        alpha = self._require_tracked(alpha)
        if delta.total == 0:
            raise ValueError("entropy gain of an empty delta is undefined")
        counts = self.counts.counts
        new_m = self.counts.total + delta.total
        if alpha == 0.0:
            new_n = len(counts) + sum(1 for cat in delta.counts if cat not in counts)
            return math.log(new_n) - self.entropy(0.0)
        if alpha == 1.0:
            adj = math.fsum(
                _c_ln_c(counts.get(cat, 0) + d) - _c_ln_c(counts.get(cat, 0))
                for cat, d in delta.counts.items()
            )
            new_sum = self._sum_c_ln_c.value + adj
            new_h = math.log(new_m) - new_sum / new_m
            return new_h - self._entropy_from(
                self.counts.total, 0, self._sum_c_ln_c.value, 0.0, 1.0
            )
        adj = math.fsum(
            (counts.get(cat, 0) + d) ** alpha - counts.get(cat, 0) ** alpha
            for cat, d in delta.counts.items()
        )
        power = self._power_sums[alpha]
        new_power = power.value + adj
        new_h = (math.log(new_power) - alpha * math.log(new_m)) / (1.0 - alpha)
        return new_h - self._entropy_from(self.counts.total, 0, 0.0, power.value, alpha)

    def apply_delta(self, delta: CategoryCounts) -> None:
        """Commit a delta: pointwise-add counts and update every statistic."""
        if delta.total == 0:
            raise ValueError("applying an empty delta is not allowed")
        counts = self.counts.counts
        alphas = tuple(self._power_sums)
        for cat, d in delta.counts.items():
            old = counts.get(cat, 0)
            new = old + d
            counts[cat] = new
            self._sum_c_ln_c.add(_c_ln_c(new) - _c_ln_c(old))
            for alpha in alphas:
                self._power_sums[alpha].add(new**alpha - old**alpha)
        self.counts.total += delta.total

    def __repr__(self) -> str:
        return (
            f"EntropyAccumulator(n={len(self.counts.counts)}, total={self.counts.total}, "
            f"tracked={self.tracked_alphas})"
        )


@dataclass
class DiversityProfile:
    """H_alpha evaluated on an ordered grid of Rényi orders."""

    alphas: list[float]
    values: list[float] = field(default_factory=list)

    @classmethod
    def compute(cls, counts: CategoryCounts, alphas: Iterable[float]) -> "DiversityProfile":
        grid = [_check_alpha(a) for a in alphas]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("alpha grid must be strictly increasing")
        return cls(alphas=grid, values=[renyi_entropy(counts, a) for a in grid])

    def validate(self) -> None:
        if len(self.alphas) != len(self.values):
            raise ValueError("profile lists must have the same length")
        for i in range(1, len(self.values)):
            if self.values[i] > self.values[i - 1] + MONOTONE_EPS:
                raise ValueError(
                    f"H_alpha must be non-increasing in alpha; "
                    f"H({self.alphas[i]}) > H({self.alphas[i - 1]})"
                )


def default_alpha_grid() -> list[float]:
    """The reporting grid: orders 0 to 5 in steps of 0.1 (51 points)."""
    return [i / 10 for i in range(51)]
