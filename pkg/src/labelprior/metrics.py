"""Accuracy, distribution-quality and uncertainty metrics, PR curves and
the per-group evaluation report."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .annotations import AgreementGroup
from .dirichlet import CategoricalDist

__all__ = [
    "PRCurve",
    "GroupMetrics",
    "MetricsReport",
    "wa_ua",
    "max_p",
    "entropy",
    "kl_divergence",
    "mean_kl",
    "pr_curve",
    "aupr",
    "detect_report",
    "predicted_class",
    "build_report",
]


@dataclass(frozen=True)
class PRCurve:
    """Precision-recall points swept over every distinct score."""

    points: tuple[tuple[float, float, float], ...]  # (threshold, precision, recall)
    measure: str = "score"
    higher_is_positive: bool = True


@dataclass(frozen=True)
class GroupMetrics:
    count: int
    mean_maxp: float
    mean_entropy: float
    mean_kl: float
    wa: Optional[float]
    ua: Optional[float]


@dataclass(frozen=True)
class MetricsReport:
    wa: float
    ua: float
    mean_kl: float
    mean_entropy: float
    aupr_maxp: float
    aupr_ent: float
    per_group: dict[AgreementGroup, GroupMetrics]


def wa_ua(refs: Sequence[int], preds: Sequence[int], k: int) -> tuple[float, float]:
    """Overall accuracy and the mean per-class recall over classes present."""
    refs = np.asarray(refs, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if refs.shape[0] == 0 or refs.shape != preds.shape:
        raise ValueError("refs and preds must be equal-length and non-empty")
    wa = float(np.mean(refs == preds))
    recalls = []
    for c in range(k):
        mask = refs == c
        if np.any(mask):
            recalls.append(float(np.mean(preds[mask] == c)))
    return wa, float(np.mean(recalls))


def max_p(dist: CategoricalDist) -> float:
    """Probability of the predicted class."""
    return float(dist.p.max())


def entropy(dist: CategoricalDist) -> float:
    """Shannon entropy in nats, with 0*ln(0) = 0."""
    p = dist.p
    pos = p > 0.0
    return float(-np.sum(p[pos] * np.log(p[pos])))


def kl_divergence(target: CategoricalDist, pred: CategoricalDist) -> float:
    """KL(target || pred); +inf where pred is 0 on target support."""
    t, q = target.p, pred.p
    if t.shape != q.shape:
        raise ValueError("dimension mismatch")
    pos = t > 0.0
    if np.any(q[pos] == 0.0):
        return float("inf")
    return float(np.sum(t[pos] * (np.log(t[pos]) - np.log(q[pos]))))


def mean_kl(
    targets: Sequence[CategoricalDist], preds: Sequence[CategoricalDist]
) -> float:
    """Mean KL(target || pred) over a batch."""
    if len(targets) != len(preds) or len(targets) == 0:
        raise ValueError("targets and preds must be equal-length and non-empty")
    return float(np.mean([kl_divergence(t, q) for t, q in zip(targets, preds)]))


def pr_curve(
    scores: Sequence[float],
    is_positive: Sequence[bool],
    higher_is_positive: bool = True,
    measure: str = "score",
) -> PRCurve:
    """Sweep a threshold over every distinct score, grouping ties.

    Items are predicted positive when their score is at least (resp. at
    most) the threshold, depending on ``higher_is_positive``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(is_positive, dtype=bool)
    if scores.shape != positive.shape or scores.ndim != 1:
        raise ValueError("scores and is_positive must be parallel 1-d sequences")
    n_pos = int(positive.sum())
    if n_pos == 0 or n_pos == scores.shape[0]:
        raise ValueError("need at least one positive and one negative item")

    keys = -scores if higher_is_positive else scores
    order = np.argsort(keys, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positive[order]

    points = []
    tp = fp = 0
    i = 0
    n = scores.shape[0]
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        tp += int(sorted_pos[i:j].sum())
        fp += (j - i) - int(sorted_pos[i:j].sum())
        precision = tp / (tp + fp)
        recall = tp / n_pos
        points.append((float(sorted_scores[i]), float(precision), float(recall)))
        i = j
    return PRCurve(tuple(points), measure=measure, higher_is_positive=higher_is_positive)


def aupr(curve: PRCurve) -> float:
    """Average precision: sum of precision times recall increments."""
    area = 0.0
    prev_recall = 0.0
    for _, precision, recall in curve.points:
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return float(area)


def detect_report(
    groups: Sequence[AgreementGroup], preds: Sequence[CategoricalDist]
) -> tuple[PRCurve, PRCurve, float, float]:
    """PR analysis for detecting confidently-labelled utterances.

    Utterances with a majority label (FULL or MAJORITY agreement) form the
    positive class; max probability scores positives high, entropy scores
    them low.
    """
    if len(groups) != len(preds) or len(groups) == 0:
        raise ValueError("groups and preds must be equal-length and non-empty")
    positive = [g != AgreementGroup.NONE for g in groups]
    maxp_curve = pr_curve(
        [max_p(p) for p in preds], positive, higher_is_positive=True, measure="maxp"
    )
    ent_curve = pr_curve(
        [entropy(p) for p in preds], positive, higher_is_positive=False, measure="ent"
    )
    return maxp_curve, ent_curve, aupr(maxp_curve), aupr(ent_curve)


def predicted_class(dist: CategoricalDist) -> int:
    """Argmax with ties broken towards the lowest class index."""
    return int(np.argmax(dist.p))


def build_report(
    groups: Sequence[AgreementGroup],
    majorities: Sequence[Optional[int]],
    soft_targets: Sequence[CategoricalDist],
    preds: Sequence[CategoricalDist],
) -> MetricsReport:
    """Assemble the full evaluation report.

    WA/UA cover only utterances with a majority label; KL, entropy and the
    detection AUPRs cover the whole set.
    """
    n = len(groups)
    if not (n and n == len(majorities) == len(soft_targets) == len(preds)):
        raise ValueError("all inputs must be equal-length and non-empty")
    k = soft_targets[0].k
    pred_idx = [predicted_class(p) for p in preds]

    scored = [i for i in range(n) if groups[i] != AgreementGroup.NONE]
    if not scored:
        raise ValueError("no utterance with a majority label to score WA/UA on")
    wa, ua = wa_ua([majorities[i] for i in scored], [pred_idx[i] for i in scored], k)

    kls = [kl_divergence(soft_targets[i], preds[i]) for i in range(n)]
    ents = [entropy(p) for p in preds]
    maxps = [max_p(p) for p in preds]
    _, _, aupr_maxp, aupr_ent = detect_report(groups, preds)

    per_group: dict[AgreementGroup, GroupMetrics] = {}
    for group in AgreementGroup:
        idx = [i for i in range(n) if groups[i] == group]
        if not idx:
            per_group[group] = GroupMetrics(0, float("nan"), float("nan"), float("nan"), None, None)
            continue
        g_wa = g_ua = None
        if group != AgreementGroup.NONE:
            g_wa, g_ua = wa_ua([majorities[i] for i in idx], [pred_idx[i] for i in idx], k)
        per_group[group] = GroupMetrics(
            count=len(idx),
            mean_maxp=float(np.mean([maxps[i] for i in idx])),
            mean_entropy=float(np.mean([ents[i] for i in idx])),
            mean_kl=float(np.mean([kls[i] for i in idx])),
            wa=g_wa,
            ua=g_ua,
        )
    return MetricsReport(
        wa=wa,
        ua=ua,
        mean_kl=float(np.mean(kls)),
        mean_entropy=float(np.mean(ents)),
        aupr_maxp=aupr_maxp,
        aupr_ent=aupr_ent,
        per_group=per_group,
    )
