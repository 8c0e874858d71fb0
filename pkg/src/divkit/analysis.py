"""Statistical evaluation: baselines, normality, significance, correlations.

Implements the evaluation protocol around the sampler: a seeded family of
random selections forms a baseline entropy distribution, checked for
normality with the D'Agostino-Pearson omnibus test; the greedy result is
then placed on that distribution as a sigma distance with a two-sided
normal p-value.  Separately, a parsed corpus is split into equal blocks and
lexical vs syntactic entropy profiles are correlated per Rényi order
(Pearson and Spearman), which tells you whether cheap lexical diversity is
a usable proxy for expensive syntactic diversity on that corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .entropy import DiversityProfile
from .parallel import ordered_map
from .syntax import DependencySentence, form_counts, syntactic_counts

__all__ = [
    "BaselineDistribution",
    "Block",
    "BlockProfile",
    "ClsdRow",
    "SigmaDistance",
    "block_split",
    "build_block_profiles",
    "clsd_report",
    "normality_test",
    "pearson",
    "sigma_distance",
    "significance_against_baseline",
    "spearman",
    "write_baseline_csv",
    "write_clsd_csv",
    "write_significance_csv",
]

# Omnibus normality needs at least this many samples for its z-transforms.
MIN_NORMALITY_SAMPLES = 8


@dataclass
class BaselineDistribution:
    """Entropy values of seeded random samples, with mean and sample stddev."""

    samples: list[float]
    mean: float
    stddev: float  # n-1 denominator

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "BaselineDistribution":
        values = [float(v) for v in samples]
        n = len(values)
        if n < MIN_NORMALITY_SAMPLES:
            raise ValueError(f"need at least {MIN_NORMALITY_SAMPLES} samples, got {n}")
        mean = math.fsum(values) / n
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        return cls(samples=values, mean=mean, stddev=math.sqrt(var))


@dataclass
class SigmaDistance:
    """Distance from a baseline mean in stddev units, with two-sided p."""

    sigmas: float
    p_value: float
    underflow: bool  # true when p is below double precision and reported as 0


def sigma_distance(value: float, baseline: BaselineDistribution) -> SigmaDistance:
    """(value - mean) / stddev and the two-sided normal tail probability."""
    if baseline.stddev <= 0:
        raise ValueError("sigma distance is undefined for a zero-variance baseline")
    sigmas = (value - baseline.mean) / baseline.stddev
    p = math.erfc(abs(sigmas) / math.sqrt(2.0))
    return SigmaDistance(sigmas=sigmas, p_value=p, underflow=(p == 0.0 and sigmas != 0.0))


# --- D'Agostino-Pearson omnibus normality -------------------------------------


def _skew_z(n: int, b1: float) -> float:
    # D'Agostino (1970) transform of sample skewness to an approx normal z.
    y = b1 * math.sqrt(((n + 1) * (n + 3)) / (6.0 * (n - 2)))
    beta2 = (
        3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3)
        / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9))
    )
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    if y == 0.0:
        y = 1.0
    return delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))


def _kurtosis_z(n: int, b2: float) -> float:
    # Anscombe & Glynn (1983) transform of sample kurtosis.
    expected = 3.0 * (n - 1) / (n + 1)
    variance = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) ** 2 * (n + 3) * (n + 5))
    x = (b2 - expected) / math.sqrt(variance)
    sqrt_beta1 = (
        6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9))
        * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)))
    )
    a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + math.sqrt(1.0 + 4.0 / sqrt_beta1**2))
    term1 = 1.0 - 2.0 / (9.0 * a)
    denom = 1.0 + x * math.sqrt(2.0 / (a - 4.0))
    term2 = math.copysign(abs((1.0 - 2.0 / a) / denom) ** (1.0 / 3.0), denom)
    return (term1 - term2) / math.sqrt(2.0 / (9.0 * a))


def normality_test(samples: Sequence[float]) -> tuple[float, float]:
    """Omnibus k2 = z_skew^2 + z_kurtosis^2 with p from chi-squared (2 df).

    Null hypothesis: the sample comes from a normal distribution.
    """
    n = len(samples)
    if n < MIN_NORMALITY_SAMPLES:
        raise ValueError(f"normality test needs n >= {MIN_NORMALITY_SAMPLES}, got {n}")
    mean = math.fsum(samples) / n
    m2 = math.fsum((v - mean) ** 2 for v in samples) / n
    if m2 == 0.0:
        raise ValueError("normality test is undefined for a zero-variance sample")
    m3 = math.fsum((v - mean) ** 3 for v in samples) / n
    m4 = math.fsum((v - mean) ** 4 for v in samples) / n
    z_s = _skew_z(n, m3 / m2**1.5)
    z_k = _kurtosis_z(n, m4 / m2**2)
    k2 = z_s * z_s + z_k * z_k
    # chi-squared survival with 2 degrees of freedom has the closed form
    # exp(-x/2).
    return k2, math.exp(-k2 / 2.0)


# --- correlations --------------------------------------------------------------


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; requires equal lengths >= 2 and variance."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError("correlation needs at least two points")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation is undefined when either argument is constant")
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        # Ties share the mean of the rank range they occupy (1-based).
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks (ties get their mean rank)."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return pearson(_average_ranks(x), _average_ranks(y))


# --- block profiles and the per-alpha correlation table ------------------------


@dataclass
class Block:
    """A run of consecutive sentences; the last block may be partial."""

    index: int
    sentences: list[DependencySentence]
    partial: bool


def block_split(sentences: Sequence[DependencySentence], block_size: int) -> list[Block]:
    """Consecutive non-overlapping blocks in corpus order; the final short
    block is kept and flagged."""
    if block_size <= 0:
        raise ValueError(f"block_size must be positive, got {block_size}")
    blocks = []
    for index, start in enumerate(range(0, len(sentences), block_size)):
        chunk = list(sentences[start : start + block_size])
        blocks.append(Block(index=index, sentences=chunk, partial=len(chunk) < block_size))
    return blocks


@dataclass
class BlockProfile:
    """Lexical and syntactic entropy profiles of one block, same alpha grid."""

    block_index: int
    lexical: DiversityProfile
    syntactic: DiversityProfile


def build_block_profiles(
    blocks: Sequence[Block],
    alphas: Sequence[float],
    include_partial: bool = False,
    threads: int = 1,
) -> list[BlockProfile]:
    """Per-block lexical (surface forms) and syntactic (complete subtrees)
    profiles.  Partial blocks are excluded by default: their entropy is
    biased low by sheer size."""
    kept = [b for b in blocks if include_partial or not b.partial]

    def profile(block: Block) -> BlockProfile:
        return BlockProfile(
            block_index=block.index,
            lexical=DiversityProfile.compute(form_counts(block.sentences), alphas),
            syntactic=DiversityProfile.compute(syntactic_counts(block.sentences), alphas),
        )

    return ordered_map(profile, kept, threads)


@dataclass
class ClsdRow:
    alpha: float
    pearson: float
    spearman: float
    n_blocks: int


def clsd_report(profiles: Sequence[BlockProfile]) -> list[ClsdRow]:
    """Correlate lexical vs syntactic H_alpha across blocks, one row per order."""
    if len(profiles) < 3:
        raise ValueError(f"need at least 3 blocks to correlate, got {len(profiles)}")
    grid = profiles[0].lexical.alphas
    for p in profiles:
        if p.lexical.alphas != grid or p.syntactic.alphas != grid:
            raise ValueError("all block profiles must share one alpha grid")
    rows = []
    for i, alpha in enumerate(grid):
        lex = [p.lexical.values[i] for p in profiles]
        syn = [p.syntactic.values[i] for p in profiles]
        rows.append(
            ClsdRow(
                alpha=alpha,
                pearson=pearson(lex, syn),
                spearman=spearman(lex, syn),
                n_blocks=len(profiles),
            )
        )
    return rows


# --- CSV emission ---------------------------------------------------------------


def write_baseline_csv(
    path: str | Path,
    seeds: Sequence[int],
    entropies: Sequence[float],
    baseline: BaselineDistribution,
    normality: tuple[float, float],
) -> None:
    """Rows of (seed, entropy) with a comment footer: mean, stddev, omnibus."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("seed,entropy\n")
        for seed, h in zip(seeds, entropies):
            fh.write(f"{seed},{h!r}\n")
        fh.write(f"# mu = {baseline.mean!r}\n")
        fh.write(f"# sigma = {baseline.stddev!r}\n")
        fh.write(f"# normality_stat = {normality[0]!r}\n")
        fh.write(f"# normality_p = {normality[1]!r}\n")


def write_significance_csv(path: str | Path, value: float, distance: SigmaDistance) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("value,sigmas,p_value,underflow\n")
        fh.write(
            f"{value!r},{distance.sigmas!r},{distance.p_value!r},"
            f"{'true' if distance.underflow else 'false'}\n"
        )


def write_clsd_csv(path: str | Path, rows: Sequence[ClsdRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("alpha,pearson,spearman,n_blocks\n")
        for row in rows:
            fh.write(f"{row.alpha!r},{row.pearson!r},{row.spearman!r},{row.n_blocks}\n")


def significance_against_baseline(
    value: float, entropies: Sequence[float]
) -> tuple[BaselineDistribution, tuple[float, float], SigmaDistance]:
    """Bundle the full protocol: fit the baseline, test normality, place value."""
    baseline = BaselineDistribution.from_samples(entropies)
    normality = normality_test(entropies)
    return baseline, normality, sigma_distance(value, baseline)
