"""Goal-distribution statistics: summaries, Mann-Whitney U and the runs test.

Both tests use the normal approximation without continuity correction.
Mann-Whitney is two-sided with the midrank tie correction; the
Wald-Wolfowitz runs test is one-sided (too few runs means the samples differ).
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from fersml.errors import EmptySample, TooFewValues

ALPHA = 0.05

# Goals in the quarter-finals, semi-finals, third-place match and final.
REAL_WC_GOALS = {
    1934: 27, 1954: 48, 1958: 35, 1966: 31, 1970: 34,
    1990: 30, 1994: 33, 1998: 27, 2002: 22, 2006: 29,
}

# Ten simulated tournaments per row, one parameter setting per row.
SIMULATED_ROWS = (
    (35, 27, 31, 34, 30, 22, 29, 31, 31, 31),
    (30, 26, 28, 39, 29, 44, 34, 29, 37, 40),
    (33, 30, 24, 27, 15, 26, 30, 29, 28, 31),
    (26, 33, 38, 23, 21, 27, 31, 24, 36, 35),
    (35, 27, 34, 33, 31, 24, 40, 32, 27, 32),
    (30, 37, 26, 29, 33, 33, 29, 23, 32, 24),
    (31, 23, 22, 32, 31, 27, 26, 18, 29, 38),
    (26, 36, 35, 22, 32, 14, 28, 33, 28, 30),
)

# Mean and corrected std as printed beside each row.  Row 1's mean does not
# follow from its values (they average 30.1), nor does row 8's std (6.60).
PRINTED_ROW_STATS = (
    (31.6, 3.63), (33.6, 6.09), (27.3, 5.03), (29.4, 5.98),
    (31.5, 4.60), (29.6, 4.37), (27.7, 5.77), (28.4, 6.06),
)


def real_wc_goals() -> list[int]:
    return list(REAL_WC_GOALS.values())


def load_reference_csv():
    """Read the bundled CSV copies of the reference data.

    Returns ``(real, rows)``: a year -> goals dict and a list of row tuples.
    """
    data = resources.files("fersml.data")
    with data.joinpath("real_wc_goals.csv").open(encoding="utf-8") as fh:
        real = {int(r["year"]): int(r["goals"]) for r in csv.DictReader(fh)}
    rows: dict[int, list[tuple[int, int]]] = {}
    with data.joinpath("simulated_wc_goals.csv").open(encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            rows.setdefault(int(r["row"]), []).append((int(r["index"]), int(r["goals"])))
    return real, [tuple(g for _, g in sorted(rows[k])) for k in sorted(rows)]


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    std_corrected: float


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    z: float
    p: float
    reject: bool
    ties_present: bool
    alpha: float = ALPHA

    def summary(self) -> str:
        verdict = "reject" if self.reject else "fail to reject"
        ties = " (ties present)" if self.ties_present else ""
        return (f"{self.name}: statistic={self.statistic:g} z={self.z:+.4f} "
                f"p={self.p:.4f} -> {verdict} at alpha={self.alpha:g}{ties}")


@dataclass(frozen=True)
class Comparison:
    mann_whitney: TestResult
    runs: TestResult

    @property
    def overall_identical_not_rejected(self) -> bool:
        return not (self.mann_whitney.reject or self.runs.reject)


def describe(sample: Sequence[float]) -> SampleStats:
    """Mean and standard deviation with the n - 1 divisor."""
    values = [float(v) for v in sample]
    n = len(values)
    if n < 2:
        raise TooFewValues(f"need at least two values, got {n}")
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return SampleStats(n, mean, math.sqrt(var))


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2))


def _check(x, y):
    if not len(x) or not len(y):
        raise EmptySample("both samples must be non-empty")


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks, tied values sharing the mean of their positions."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1
        for k in order[i:j + 1]:
            ranks[k] = rank
        i = j + 1
    return ranks


def mann_whitney(x: Sequence[float], y: Sequence[float], alpha: float = ALPHA) -> TestResult:
    """Two-sided Mann-Whitney test.

    ``U`` counts pairs with ``x[i] < y[j]``, ties counting one half, so it
    is large when ``y`` tends to exceed ``x``.
    """
    _check(x, y)
    m, n = len(x), len(y)
    pooled = list(x) + list(y)
    ranks = midranks(pooled)
    u = math.fsum(ranks[m:]) - n * (n + 1) / 2
    size = m + n
    counts = Counter(pooled)
    tie_term = sum(t ** 3 - t for t in counts.values())
    var = m * n / 12 * ((size + 1) - (tie_term / (size * (size - 1)) if size > 1 else 0))
    if var > 0:
        z = (u - m * n / 2) / math.sqrt(var)
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
    else:
        z, p = 0.0, 1.0
    return TestResult("Mann-Whitney U", u, z, p, p < alpha, tie_term > 0, alpha)


def count_runs(x: Sequence[float], y: Sequence[float]) -> tuple[int, bool]:
    """Runs of sample labels in the pooled ascending order.

    Cross-sample ties are broken by putting the ``x`` values first; the flag
    reports whether that rule was needed.
    """
    pooled = sorted([(v, 0) for v in x] + [(v, 1) for v in y])
    runs = 1 + sum(1 for a, b in zip(pooled, pooled[1:]) if a[1] != b[1])
    ties = bool(set(x) & set(y))
    return runs, ties


def runs_test(x: Sequence[float], y: Sequence[float], alpha: float = ALPHA) -> TestResult:
    """Wald-Wolfowitz runs test, lower tail."""
    _check(x, y)
    m, n = len(x), len(y)
    size = m + n
    if size < 4:
        raise TooFewValues(f"the runs test needs at least four values, got {size}")
    runs, ties = count_runs(x, y)
    mu = 2 * m * n / size + 1
    var = 2 * m * n * (2 * m * n - m - n) / (size ** 2 * (size - 1))
    if var > 0:
        z = (runs - mu) / math.sqrt(var)
        p = _normal_cdf(z)
    else:
        z, p = 0.0, 1.0
    return TestResult("Wald-Wolfowitz runs", runs, z, p, p < alpha, ties, alpha)


def compare_distributions(x: Sequence[float], y: Sequence[float], alpha: float = ALPHA) -> Comparison:
    return Comparison(mann_whitney(x, y, alpha), runs_test(x, y, alpha))
