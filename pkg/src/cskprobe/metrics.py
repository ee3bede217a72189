"""Ranked-prediction evaluation: reciprocal rank, MRR and median RR,
Hits@k, precision/recall@k for multi-gold queries, grouped aggregation and
paired bootstrap significance.

Token equality is case-insensitive exact match everywhere; no stemming
(evaluation is stricter than spotting). A gold token absent from the
truncated candidate list scores rank None / RR 0, the standard truncated
convention; top_k is the caller's choice so the truncation point stays
visible. Both mean and median reciprocal rank are reported because the two
are easy to conflate; the default tables show the mean.
"""

from __future__ import annotations

import statistics
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .scorer import RankedPrediction

__all__ = [
    "EvalRecord",
    "MetricsReport",
    "rank_of_gold",
    "reciprocal_rank",
    "build_records",
    "aggregate",
    "precision_recall_at_k",
    "macro_precision_recall",
    "paired_significance",
]

DEFAULT_KS = (1, 10)


@dataclass(frozen=True)
class EvalRecord:
    probe_id: str
    gold: str
    rank_of_gold: int | None  # None: not in the returned list
    dataset_tag: str | None = None
    typicality_band: str | None = None

    @property
    def rr(self) -> float:
        return 0.0 if self.rank_of_gold is None else 1.0 / self.rank_of_gold


@dataclass(frozen=True)
class MetricsReport:
    group: str
    n: int
    mrr: float
    median_rr: float
    hits_at: dict[int, float]


def rank_of_gold(prediction: RankedPrediction, gold: str) -> int | None:
    """1-based rank of the first candidate equal to gold (case-insensitive),
    None if absent."""
    needle = gold.casefold()
    for i, (token, _) in enumerate(prediction.candidates, 1):
        if token.casefold() == needle:
            return i
    return None


def reciprocal_rank(prediction: RankedPrediction, gold: str) -> float:
    rank = rank_of_gold(prediction, gold)
    return 0.0 if rank is None else 1.0 / rank


def build_records(
    probes: Sequence,
    predictions: Iterable[RankedPrediction],
) -> list[EvalRecord]:
    """Join probes with their predictions by probe_id."""
    by_id = {p.probe_id: p for p in predictions}
    records = []
    missing = []
    for probe in probes:
        pred = by_id.get(probe.probe_id)
        if pred is None:
            missing.append(probe.probe_id)
            continue
        records.append(
            EvalRecord(
                probe.probe_id,
                probe.gold,
                rank_of_gold(pred, probe.gold),
                getattr(probe, "dataset_tag", None),
                getattr(probe, "typicality_band", None),
            )
        )
    if missing:
        raise ValueError(f"no prediction for {len(missing)} probes, e.g. {missing[:5]}")
    return records


def aggregate(
    records: Sequence[EvalRecord],
    group_by: str | None = None,
    ks: Sequence[int] = DEFAULT_KS,
) -> dict[str, MetricsReport]:
    """MetricsReport per group (group_by: "dataset_tag", "typicality_band"
    or None for a single "all" group). Records missing the grouping key are
    dropped with a warning."""
    if group_by not in (None, "dataset_tag", "typicality_band"):
        raise ValueError(f"cannot group by {group_by!r}")
    groups: dict[str, list[EvalRecord]] = {}
    dropped = 0
    for record in records:
        key = "all" if group_by is None else getattr(record, group_by)
        if key is None:
            dropped += 1
            continue
        groups.setdefault(key, []).append(record)
    if dropped:
        warnings.warn(f"{dropped} records lack {group_by} and were omitted")

    reports: dict[str, MetricsReport] = {}
    for key in sorted(groups):
        rrs = [r.rr for r in groups[key]]
        ranks = [r.rank_of_gold for r in groups[key]]
        hits = {
            k: sum(1 for r in ranks if r is not None and r <= k) / len(ranks)
            for k in ks
        }
        reports[key] = MetricsReport(
            group=key,
            n=len(rrs),
            mrr=sum(rrs) / len(rrs),
            median_rr=statistics.median(rrs),
            hits_at=hits,
        )
    return reports


def precision_recall_at_k(
    prediction: RankedPrediction, gold_set: Iterable[str], k: int
) -> tuple[float, float]:
    """P@k and R@k for one query. Fewer than k returned candidates keep k as
    the precision denominator (missing slots count as wrong)."""
    golds = {g.casefold() for g in gold_set}
    if not golds:
        raise ValueError("gold_set must be non-empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    top = {t.casefold() for t, _ in prediction.candidates[:k]}
    inter = len(top & golds)
    return inter / k, inter / len(golds)


def macro_precision_recall(
    queries: Sequence[tuple[RankedPrediction, Iterable[str]]],
    ks: Sequence[int] = (5, 10),
) -> dict[int, tuple[float, float]]:
    """Macro-averaged P@k / R@k over (prediction, gold_set) queries."""
    if not queries:
        raise ValueError("no queries to evaluate")
    out: dict[int, tuple[float, float]] = {}
    materialized = [(pred, set(golds)) for pred, golds in queries]
    for k in ks:
        ps, rs = [], []
        for pred, golds in materialized:
            p, r = precision_recall_at_k(pred, golds, k)
            ps.append(p)
            rs.append(r)
        out[k] = (sum(ps) / len(ps), sum(rs) / len(rs))
    return out


def paired_significance(
    records_a: Sequence[EvalRecord],
    records_b: Sequence[EvalRecord],
    iterations: int = 10_000,
    seed: int = 0,
) -> float:
    """Two-sided paired bootstrap on the mean reciprocal-rank difference.

    Probe indices are resampled with replacement; the p-value is the
    fraction of resamples whose mean difference flips sign, doubled and
    clamped to 1. Symmetric in its arguments and deterministic given seed.
    """
    a_by_id = {r.probe_id: r for r in records_a}
    b_by_id = {r.probe_id: r for r in records_b}
    if len(a_by_id) != len(records_a) or len(b_by_id) != len(records_b):
        raise ValueError("duplicate probe_ids in records")
    only_a = sorted(set(a_by_id) - set(b_by_id))
    only_b = sorted(set(b_by_id) - set(a_by_id))
    if only_a or only_b:
        raise ValueError(
            f"records are not paired: {len(only_a)} only in a (e.g. {only_a[:3]}), "
            f"{len(only_b)} only in b (e.g. {only_b[:3]})"
        )
    if not a_by_id:
        raise ValueError("no paired records")

    ids = sorted(a_by_id)
    diffs = np.array([a_by_id[i].rr - b_by_id[i].rr for i in ids])
    observed = diffs.mean()
    if observed == 0.0:
        return 1.0
    rng = np.random.default_rng(seed)
    n = len(diffs)
    idx = rng.integers(0, n, size=(iterations, n))
    means = diffs[idx].mean(axis=1)
    flips = int(np.count_nonzero(np.sign(means) == -np.sign(observed)))
    return min(1.0, 2.0 * flips / iterations)
