"""Seeded synthetic corpus generator.

Each utterance gets an ambiguity regime, a dominant class, a true label
distribution sampled from a Dirichlet whose precision depends on the
regime, annotator tags sampled from that distribution, and features built
from orthogonal class centroids plus Gaussian noise.  Every utterance owns
an independent random stream keyed by (seed, utterance id), so corpora are
reproducible and generation could run in parallel.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng
from .annotations import AgreementGroup, AnnotationSet, ClassSpace, Evaluation
from .dirichlet import CategoricalDist

__all__ = ["SynthConfig", "SynthUtterance", "CorpusStats", "default_class_names", "generate", "stats"]


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``group_mix`` gives the probabilities of the (low, medium, high)
    ambiguity regimes and ``regime_precisions`` the matching Dirichlet
    precisions; the defaults mirror a three-annotator corpus where roughly
    a quarter of utterances are unanimous and a quarter have no majority.
    """

    n: int
    k: int = 5
    d: int = 16
    annotators: int = 3
    seed: int = 0
    group_mix: tuple[float, float, float] = (0.237, 0.513, 0.250)
    regime_precisions: tuple[float, float, float] = (120.0, 12.0, 5.0)
    multi_tag_prob: float = 0.04
    noise_sigma: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "group_mix", tuple(float(v) for v in self.group_mix))
        object.__setattr__(
            self, "regime_precisions", tuple(float(v) for v in self.regime_precisions)
        )
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.k > self.d:
            raise ValueError(f"k = {self.k} classes need d >= k feature dimensions, got d = {self.d}")
        if self.annotators < 1:
            raise ValueError("need at least one annotator")
        if len(self.group_mix) != 3 or any(v < 0 for v in self.group_mix):
            raise ValueError("group_mix must be three non-negative probabilities")
        if abs(sum(self.group_mix) - 1.0) > 1e-9:
            raise ValueError("group_mix must sum to 1")
        if len(self.regime_precisions) != 3:
            raise ValueError("regime_precisions must have three entries")
        if any(a0 <= self.k - 1 for a0 in self.regime_precisions):
            raise ValueError("each regime precision must exceed k - 1")
        if not 0.0 <= self.multi_tag_prob < 1.0:
            raise ValueError("multi_tag_prob must lie in [0, 1)")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True, eq=False)
class SynthUtterance:
    uid: int
    true_mu: CategoricalDist
    features: np.ndarray
    evaluations: tuple[Evaluation, ...]
    annotations: AnnotationSet

    @property
    def group(self) -> AgreementGroup:
        return self.annotations.group

    @property
    def majority(self) -> Optional[int]:
        return self.annotations.majority


def default_class_names(k: int) -> tuple[str, ...]:
    """Single letters A, B, C, ... while they last, then c26, c27, ..."""
    letters = string.ascii_uppercase
    return tuple(letters[i] if i < len(letters) else f"c{i}" for i in range(k))


def _sample_index(gen: np.random.Generator, probs: np.ndarray) -> int:
    u = gen.random()
    cum = np.cumsum(probs)
    return min(int(np.searchsorted(cum, u * cum[-1], side="right")), probs.shape[0] - 1)


def _regime_alpha(config: SynthConfig, regime: int, dominant: int) -> np.ndarray:
    # Unit base concentration everywhere, remaining precision on the
    # dominant class; at precision k this degenerates to the flat Dirichlet
    # and for precision -> inf the mean approaches the dominant one-hot.
    alpha = np.ones(config.k)
    alpha[dominant] = config.regime_precisions[regime] - (config.k - 1)
    return alpha


def _generate_one(config: SynthConfig, uid: int) -> SynthUtterance:
    gen = rng.stream(config.seed, rng.DOMAIN_UTTERANCE, uid)
    # Draw order is fixed: regime, dominant class, true distribution,
    # per-annotator tags, then feature noise.
    regime = _sample_index(gen, np.asarray(config.group_mix))
    dominant = int(gen.integers(0, config.k))
    mu = gen.dirichlet(_regime_alpha(config, regime, dominant))
    true_mu = CategoricalDist(mu / mu.sum())

    evaluations = []
    for _ in range(config.annotators):
        first = _sample_index(gen, mu)
        tags = [first]
        if gen.random() < config.multi_tag_prob:
            rest = mu.copy()
            rest[first] = 0.0
            tags.append(_sample_index(gen, rest))
        evaluations.append(Evaluation(tuple(tags)))

    features = np.zeros(config.d)
    features[: config.k] = mu
    if config.noise_sigma > 0.0:
        features = features + config.noise_sigma * gen.standard_normal(config.d)

    space = ClassSpace(default_class_names(config.k))
    annotations = AnnotationSet(tuple(evaluations), space)
    return SynthUtterance(uid, true_mu, features, tuple(evaluations), annotations)


def generate(config: SynthConfig) -> tuple[list[SynthUtterance], ClassSpace]:
    """Generate the corpus; deterministic given the config."""
    space = ClassSpace(default_class_names(config.k))
    return [_generate_one(config, uid) for uid in range(config.n)], space


@dataclass(frozen=True)
class CorpusStats:
    n_utterances: int
    n_evaluations: int
    n_multi_tag_evaluations: int
    n_utterances_extra_labels: int
    avg_labels_per_utterance: float
    group_counts: dict[AgreementGroup, int]

    def format_table(self) -> str:
        rows = [
            ("Number of total utterances", f"{self.n_utterances}"),
            ("Number of total evaluations", f"{self.n_evaluations}"),
            ("Evaluations with more than one label", f"{self.n_multi_tag_evaluations}"),
            ("Utterances with extra labels", f"{self.n_utterances_extra_labels}"),
            ("Average number of labels per utterance", f"{self.avg_labels_per_utterance:.2f}"),
            ("Number of full-agreement utterances", f"{self.group_counts[AgreementGroup.FULL]}"),
            ("Number of majority-agreement utterances", f"{self.group_counts[AgreementGroup.MAJORITY]}"),
            ("Number of no-agreement utterances", f"{self.group_counts[AgreementGroup.NONE]}"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def stats(annotation_sets: Sequence[AnnotationSet]) -> CorpusStats:
    """Corpus-level label statistics in the usual table schema."""
    if len(annotation_sets) == 0:
        raise ValueError("stats requires a non-empty corpus")
    n_eval = sum(len(a.evaluations) for a in annotation_sets)
    n_multi = sum(
        1 for a in annotation_sets for ev in a.evaluations if len(ev.tags) > 1
    )
    n_extra = sum(1 for a in annotation_sets if a.num_labels > len(a.evaluations))
    total_labels = sum(a.num_labels for a in annotation_sets)
    counts = {g: 0 for g in AgreementGroup}
    for a in annotation_sets:
        counts[a.group] += 1
    return CorpusStats(
        n_utterances=len(annotation_sets),
        n_evaluations=n_eval,
        n_multi_tag_evaluations=n_multi,
        n_utterances_extra_labels=n_extra,
        avg_labels_per_utterance=total_labels / len(annotation_sets),
        group_counts=counts,
    )
