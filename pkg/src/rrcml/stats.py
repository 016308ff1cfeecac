"""Average ranks and the Friedman -> Holm -> Wilcoxon comparison pipeline."""
import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm, rankdata

from .metrics import CRITERIA, DISPLAY_NAMES, direction as criterion_direction

EXACT_MAX_N = 20


@dataclass(frozen=True, eq=False)
class ResultMatrix:
    """Datasets x algorithms scores for one criterion."""
    values: np.ndarray
    direction: str = "lower"  # lower | higher
    algorithms: tuple = ()
    datasets: tuple = ()
    criterion: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 2:
            raise ValueError("result matrix needs shape (D, A) with A >= 2")
        if np.isnan(v).any():
            raise ValueError("result matrix has missing entries")
        if self.direction not in ("lower", "higher"):
            raise ValueError(f"unknown direction {self.direction!r}")
        object.__setattr__(self, "values", v)
        if not self.algorithms:
            object.__setattr__(self, "algorithms", tuple(str(i + 1) for i in range(v.shape[1])))


@dataclass(frozen=True, eq=False)
class RankTable:
    criterion: str
    algorithms: tuple
    avg_ranks: np.ndarray
    friedman_stat: float
    friedman_p: float
    friedman_p_adjusted: float
    pairwise_p: np.ndarray
    holm_adjusted: np.ndarray
    significant: np.ndarray


def rank_matrix(m):
    """Per-dataset ranks (best = 1, ties averaged)."""
    v = m.values if m.direction == "lower" else -m.values
    return rankdata(v, axis=1)


def average_ranks(m):
    return rank_matrix(m).mean(axis=0)


def friedman_test(m):
    """Tie-corrected Friedman chi-square statistic and its p-value."""
    ranks = rank_matrix(m)
    D, A = ranks.shape
    sums = ranks.sum(axis=0)
    stat = 12.0 / (D * A * (A + 1)) * np.sum(sums ** 2) - 3.0 * D * (A + 1)
    ties = 0.0
    for row in ranks:
        _, t = np.unique(row, return_counts=True)
        ties += np.sum(t ** 3 - t)
    corr = 1.0 - ties / (D * (A ** 3 - A))
    if corr <= 1e-12:
        return 0.0, 1.0
    stat = max(stat / corr, 0.0)
    return float(stat), float(chi2.sf(stat, A - 1))


def _signed_ranks(a, b):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0]
    return d, rankdata(np.abs(d))


def wilcoxon_exact_p(d, ranks):
    """Exact two-sided p from the null distribution of the positive rank sum.

    Ranks are doubled to integers (tie-averaged ranks are multiples of 1/2)
    and the distribution over all 2^n sign assignments is accumulated by
    convolution.
    """
    r2 = np.rint(2 * ranks).astype(int)
    total = int(r2.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    w_plus = int(r2[d > 0].sum())
    w = min(w_plus, total - w_plus)
    tail = counts[:w + 1].sum() / 2.0 ** len(r2)
    return float(min(1.0, 2.0 * tail))


def wilcoxon_normal_p(d, ranks):
    """Normal approximation with tie-corrected variance and continuity correction."""
    n = len(ranks)
    w_plus = ranks[d > 0].sum()
    mean = n * (n + 1) / 4.0
    _, t = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(t ** 3 - t) / 48.0
    if var <= 0:
        return 1.0
    z = max(abs(w_plus - mean) - 0.5, 0.0) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_signed_rank(a, b):
    """Two-sided Wilcoxon signed-rank p-value; zero differences are dropped."""
    d, ranks = _signed_ranks(a, b)
    if len(d) == 0:
        return 1.0
    if len(d) <= EXACT_MAX_N:
        return wilcoxon_exact_p(d, ranks)
    return wilcoxon_normal_p(d, ranks)


def holm_adjust(p):
    """Holm step-down adjusted p-values, returned in input order."""
    p = np.asarray(p, dtype=float)
    m = len(p)
    if m == 0:
        return p
    order = np.argsort(p, kind="stable")
    scaled = (m - np.arange(m)) * p[order]
    adjusted = np.minimum(1.0, np.maximum.accumulate(scaled))
    out = np.empty(m)
    out[order] = adjusted
    return out


def two_step_pipeline(matrices, alpha=0.05):
    """Friedman per criterion (Holm across criteria), then pairwise Wilcoxon
    tests (Holm within each criterion).

    Every pair is tested and reported; a pair is flagged significant only if
    the criterion's adjusted Friedman p and the pair's adjusted Wilcoxon p are
    both below ``alpha``.
    """
    matrices = list(matrices)
    if not matrices:
        return []
    A = matrices[0].values.shape[1]
    if any(m.values.shape[1] != A for m in matrices):
        raise ValueError("all matrices must share the algorithm count")
    friedman = [friedman_test(m) for m in matrices]
    adj_f = holm_adjust([p for _, p in friedman])
    pairs = [(i, j) for i in range(A) for j in range(i + 1, A)]
    tables = []
    for m, (stat, p), pf in zip(matrices, friedman, adj_f):
        raw = np.full((A, A), np.nan)
        adj = np.full((A, A), np.nan)
        sig = np.zeros((A, A), dtype=bool)
        ps = [wilcoxon_signed_rank(m.values[:, i], m.values[:, j]) for i, j in pairs]
        for (i, j), pr, pa in zip(pairs, ps, holm_adjust(ps)):
            raw[i, j], adj[i, j] = pr, pa
            sig[i, j] = pf < alpha and pa < alpha
        tables.append(RankTable(m.criterion, m.algorithms, average_ranks(m), stat, p,
                                float(pf), raw, adj, sig))
    return tables


def format_p(p):
    """Three-decimal display; tiny values show as 0.000 and near-one as 1.000."""
    if p < 1e-3:
        return "0.000"
    if p > 0.999:
        return "1.000"
    return f"{p:.3f}"


def format_rank_tables(tables, per_band=4):
    """Plain-text layout of the rank tables.

    Criteria are set side by side in bands of ``per_band``. Each band has a
    method-number header, then the rows Nam. (criterion), Frd. (Holm-adjusted
    Friedman p), Rank (average ranks) and one row per method holding the
    Holm-adjusted Wilcoxon p-values against every later method.
    """
    if not tables:
        return ""
    algs = tables[0].algorithms
    A = len(algs)
    cell = 7
    block = cell * A
    lines = ["Methods: " + ", ".join(f"{i + 1}={a}" for i, a in enumerate(algs)), ""]
    for start in range(0, len(tables), per_band):
        band = tables[start:start + per_band]

        def row(label, blocks):
            return (label.ljust(6) + " | ".join(blocks)).rstrip()

        lines.append(row("", ["".join(str(i + 1).rjust(cell) for i in range(A))] * len(band)))
        lines.append(row("Nam.", [DISPLAY_NAMES.get(t.criterion, t.criterion).center(block)
                                  for t in band]))
        lines.append(row("Frd.", [f"{t.friedman_p_adjusted:.3e}".center(block) for t in band]))
        lines.append(row("Rank", ["".join(f"{r:.3f}".rjust(cell) for r in t.avg_ranks)
                                  for t in band]))
        for i in range(A - 1):
            lines.append(row(str(i + 1), [
                "".join("".rjust(cell) if j <= i else format_p(t.holm_adjusted[i, j]).rjust(cell)
                        for j in range(A)) for t in band]))
        lines.append("")
    return "\n".join(lines)


def rank_tables_csv(tables):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "row", "algorithm", "value"])
    for t in tables:
        w.writerow([t.criterion, "friedman_stat", "", repr(t.friedman_stat)])
        w.writerow([t.criterion, "friedman_p", "", repr(t.friedman_p)])
        w.writerow([t.criterion, "friedman_p_holm", "", repr(t.friedman_p_adjusted)])
        for a, r in zip(t.algorithms, t.avg_ranks):
            w.writerow([t.criterion, "rank", a, repr(float(r))])
        A = len(t.algorithms)
        for i in range(A):
            for j in range(i + 1, A):
                pair = f"{t.algorithms[i]}|{t.algorithms[j]}"
                w.writerow([t.criterion, "wilcoxon_p", pair, repr(float(t.pairwise_p[i, j]))])
                w.writerow([t.criterion, "wilcoxon_p_holm", pair,
                            repr(float(t.holm_adjusted[i, j]))])
                w.writerow([t.criterion, "significant", pair, int(t.significant[i, j])])
    return buf.getvalue()


def criterion_matrices(table, algorithms, datasets):
    """ResultMatrix per criterion from ``table[criterion][dataset][algorithm]``."""
    out = []
    for c in CRITERIA:
        vals = [[table[c][d][a] for a in algorithms] for d in datasets]
        out.append(ResultMatrix(np.array(vals), criterion_direction(c), tuple(algorithms),
                                tuple(datasets), c))
    return out
