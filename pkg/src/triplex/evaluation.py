"""Matching predicted triples against gold, and the derived quality scores.

Three match modes share one one-to-one matching machinery:

* exact: all three normalized fields equal;
* partial: at least two of the three fields equal;
* semantic: the mean of the three per-field embedding cosines, eligible when
  it reaches the similarity threshold.

Pairs can be selected greedily (highest score first, ties broken by lower
predicted index then lower gold index) or optimally (maximum pair count,
then maximum total score).
"""

from __future__ import annotations

import csv
import enum
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigurationError
from .extraction import ExtractionRun, Triple
from .gold import GoldTriple

__all__ = [
    "MatchMode",
    "AssignmentPolicy",
    "MatchConfig",
    "MatchResult",
    "Metrics",
    "f1_score",
    "metrics_from",
    "match",
    "PredicateDistribution",
    "predicate_distribution",
    "distribution_divergence",
    "redundancy_score",
    "coverage_score",
    "ANNOTATION_METRICS",
    "AnnotationRecord",
    "sample_for_annotation",
    "write_annotation_csv",
    "load_annotation_csv",
]

DEFAULT_SEMANTIC_THRESHOLD = 0.75
DEFAULT_REDUNDANCY_THRESHOLD = 0.9

ANNOTATION_METRICS = (
    "relation_validation",
    "entity_relation_coherence",
    "triple_completeness",
    "semantic_correctness",
    "information_gain",
    "redundancy",
    "predicate_distribution",
    "coverage",
)


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list: ...


class MatchMode(enum.Enum):
    EXACT = "exact"
    PARTIAL = "partial"
    SEMANTIC = "semantic"


class AssignmentPolicy(enum.Enum):
    GREEDY = "greedy"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class MatchConfig:
    mode: MatchMode = MatchMode.EXACT
    semantic_threshold: float = DEFAULT_SEMANTIC_THRESHOLD
    partial_min_fields: int = 2
    assignment: AssignmentPolicy = AssignmentPolicy.GREEDY

    def __post_init__(self) -> None:
        if not 0.0 < self.semantic_threshold <= 1.0:
            raise ConfigurationError(
                f"semantic_threshold must be in (0, 1], got {self.semantic_threshold}"
            )
        if self.partial_min_fields != 2:
            raise ConfigurationError("partial matching requires exactly 2 of 3 fields")


@dataclass(frozen=True)
class MatchResult:
    """A one-to-one pairing of predicted against gold triples."""

    pairs: tuple[tuple[int, int, float], ...]
    unmatched_predicted: tuple[int, ...]
    unmatched_gold: tuple[int, ...]

    def __post_init__(self) -> None:
        predicted_side = [p for p, _, _ in self.pairs]
        gold_side = [g for _, g, _ in self.pairs]
        if len(set(predicted_side)) != len(predicted_side) or len(set(gold_side)) != len(
            gold_side
        ):
            raise ValueError("matching is not one-to-one")

    @property
    def total_score(self) -> float:
        return float(sum(score for _, _, score in self.pairs))


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; zero when both are zero."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def metrics_from(result: MatchResult, n_predicted: int, n_gold: int) -> Metrics:
    """Precision, recall, and F1 for a match result.

    Recall divides by the full gold count: the benchmark is treated as the
    complete set of expected triples.
    """
    pairs = len(result.pairs)
    if n_predicted < pairs or n_gold < pairs:
        raise ValueError("pair count exceeds predicted or gold count")
    precision = pairs / n_predicted if n_predicted else 0.0
    recall = pairs / n_gold if n_gold else 0.0
    return Metrics(precision=precision, recall=recall, f1=f1_score(precision, recall))


def _fields(triple) -> tuple[str, str, str]:
    return (triple.subject, triple.predicate, triple.object)


def _eligible_edges(
    predicted: Sequence,
    gold: Sequence,
    config: MatchConfig,
    embedder: Embedder | None,
) -> list[tuple[int, int, float]]:
    edges: list[tuple[int, int, float]] = []
    if config.mode is MatchMode.SEMANTIC:
        if embedder is None:
            raise ConfigurationError("semantic matching requires an embedder")
        texts = sorted(
            {f for t in predicted for f in _fields(t)}
            | {f for t in gold for f in _fields(t)}
        )
        vectors = dict(zip(texts, embedder.embed(texts))) if texts else {}

        def field_cosine(a: str, b: str) -> float:
            if a == b:
                return 1.0
            return float(vectors[a].cosine(vectors[b]))

        for pi, p in enumerate(predicted):
            for gi, g in enumerate(gold):
                score = sum(
                    field_cosine(a, b) for a, b in zip(_fields(p), _fields(g))
                ) / 3.0
                if score >= config.semantic_threshold:
                    edges.append((pi, gi, score))
        return edges
    required = 3 if config.mode is MatchMode.EXACT else config.partial_min_fields
    for pi, p in enumerate(predicted):
        for gi, g in enumerate(gold):
            agreements = sum(a == b for a, b in zip(_fields(p), _fields(g)))
            if agreements >= required:
                edges.append((pi, gi, 1.0))
    return edges


def _greedy_assignment(
    edges: list[tuple[int, int, float]]
) -> list[tuple[int, int, float]]:
    ordered = sorted(edges, key=lambda e: (-e[2], e[0], e[1]))
    used_predicted: set[int] = set()
    used_gold: set[int] = set()
    pairs: list[tuple[int, int, float]] = []
    for pi, gi, score in ordered:
        if pi in used_predicted or gi in used_gold:
            continue
        used_predicted.add(pi)
        used_gold.add(gi)
        pairs.append((pi, gi, score))
    return pairs


def _optimal_assignment(
    edges: list[tuple[int, int, float]], n_predicted: int, n_gold: int
) -> list[tuple[int, int, float]]:
    if not edges:
        return []
    # a constant boost per matched pair makes cardinality dominate total score
    boost = float(min(n_predicted, n_gold)) + 1.0
    weights = np.zeros((n_predicted, n_gold), dtype=np.float64)
    eligible = np.zeros((n_predicted, n_gold), dtype=bool)
    for pi, gi, score in edges:
        weights[pi, gi] = score + boost
        eligible[pi, gi] = True
    rows, cols = linear_sum_assignment(weights, maximize=True)
    pairs = [
        (int(pi), int(gi), float(weights[pi, gi] - boost))
        for pi, gi in zip(rows, cols)
        if eligible[pi, gi]
    ]
    pairs.sort(key=lambda e: (e[0], e[1]))
    return pairs


def match(
    predicted: Sequence,
    gold: Sequence,
    config: MatchConfig,
    embedder: Embedder | None = None,
) -> MatchResult:
    """Pair predicted triples with gold triples one-to-one."""
    edges = _eligible_edges(predicted, gold, config, embedder)
    if config.assignment is AssignmentPolicy.OPTIMAL:
        pairs = _optimal_assignment(edges, len(predicted), len(gold))
    else:
        pairs = _greedy_assignment(edges)
    matched_predicted = {pi for pi, _, _ in pairs}
    matched_gold = {gi for _, gi, _ in pairs}
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_predicted=tuple(
            i for i in range(len(predicted)) if i not in matched_predicted
        ),
        unmatched_gold=tuple(i for i in range(len(gold)) if i not in matched_gold),
    )


@dataclass(frozen=True)
class PredicateDistribution:
    """Predicate frequency counts for a set of triples."""

    counts: Mapping[str, int]
    total: int

    def __post_init__(self) -> None:
        if self.total != sum(self.counts.values()):
            raise ValueError("distribution total does not match counts")

    def probabilities(self) -> dict[str, float]:
        if self.total == 0:
            return {}
        return {k: v / self.total for k, v in self.counts.items()}


def predicate_distribution(triples: Iterable) -> PredicateDistribution:
    counts: dict[str, int] = {}
    total = 0
    for triple in triples:
        counts[triple.predicate] = counts.get(triple.predicate, 0) + 1
        total += 1
    return PredicateDistribution(counts=counts, total=total)


def distribution_divergence(p: PredicateDistribution, q: PredicateDistribution) -> float:
    """Jensen-Shannon divergence in bits, between 0 and 1."""
    if p.total <= 0 or q.total <= 0:
        raise ValueError("divergence requires non-empty distributions")
    support = sorted(set(p.counts) | set(q.counts))
    pa = np.array([p.counts.get(k, 0) for k in support], dtype=np.float64) / p.total
    qa = np.array([q.counts.get(k, 0) for k in support], dtype=np.float64) / q.total
    mid = 0.5 * (pa + qa)

    def half_divergence(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / mid[mask])))

    jsd = 0.5 * half_divergence(pa) + 0.5 * half_divergence(qa)
    return float(min(max(jsd, 0.0), 1.0))


def redundancy_score(
    triples: Sequence[Triple],
    embedder: Embedder,
    threshold: float = DEFAULT_REDUNDANCY_THRESHOLD,
) -> float:
    """Fraction of triples that near-duplicate another triple.

    Two triples are near-duplicates when subject and object are identical and
    their predicate embeddings have cosine at or above ``threshold``.
    """
    if not triples:
        raise ValueError("redundancy_score requires at least one triple")
    groups: dict[tuple[str, str], list[int]] = {}
    for i, triple in enumerate(triples):
        groups.setdefault((triple.subject, triple.object), []).append(i)
    multi = [indices for indices in groups.values() if len(indices) > 1]
    if not multi:
        return 0.0
    predicates = sorted({triples[i].predicate for indices in multi for i in indices})
    vectors = dict(zip(predicates, embedder.embed(predicates)))
    redundant: set[int] = set()
    for indices in multi:
        for a in range(len(indices)):
            for b in range(a + 1, len(indices)):
                i, j = indices[a], indices[b]
                pred_i, pred_j = triples[i].predicate, triples[j].predicate
                if pred_i == pred_j:
                    cosine = 1.0
                else:
                    cosine = vectors[pred_i].cosine(vectors[pred_j])
                if cosine >= threshold:
                    redundant.add(i)
                    redundant.add(j)
    return len(redundant) / len(triples)


def coverage_score(predicted: Sequence[Triple], gold: Sequence[GoldTriple]) -> float:
    """Fraction of gold entities that appear in any predicted triple."""
    if not gold:
        raise ValueError("coverage_score requires a non-empty gold set")
    gold_entities = {t.subject for t in gold} | {t.object for t in gold}
    predicted_entities = {t.subject for t in predicted} | {t.object for t in predicted}
    covered = gold_entities & predicted_entities
    return len(covered) / len(gold_entities)


@dataclass
class AnnotationRecord:
    """One sampled triple awaiting human 1-5 scores on the eight dimensions."""

    triple: Triple
    scores: dict[str, int | None] = field(
        default_factory=lambda: {name: None for name in ANNOTATION_METRICS}
    )
    comment: str = ""
    annotator: str = ""

    def validate(self) -> None:
        extra = set(self.scores) - set(ANNOTATION_METRICS)
        missing = set(ANNOTATION_METRICS) - set(self.scores)
        if extra or missing:
            raise ValueError(
                f"annotation scores must have exactly the keys {ANNOTATION_METRICS}"
            )
        for name, value in self.scores.items():
            if value is not None and value not in (1, 2, 3, 4, 5):
                raise ValueError(f"score {name} must be 1-5, got {value!r}")


def sample_for_annotation(
    run: ExtractionRun, n: int = 100, seed: int = 42
) -> list[AnnotationRecord]:
    """Uniformly sample ``n`` distinct triples for human annotation.

    Deterministic for a fixed seed; returns everything when the run holds
    fewer than ``n`` triples.
    """
    triples = run.triples
    k = min(n, len(triples))
    rng = random.Random(seed)
    chosen = rng.sample(range(len(triples)), k) if k else []
    return [AnnotationRecord(triple=triples[i]) for i in chosen]


_CSV_COLUMNS = (
    "subject",
    "predicate",
    "object",
    "doc_id",
    "article_id",
    "chunk_index",
    "variant",
    *ANNOTATION_METRICS,
    "comment",
)


def write_annotation_csv(records: Sequence[AnnotationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_CSV_COLUMNS)
        for record in records:
            t = record.triple
            writer.writerow(
                [
                    t.subject,
                    t.predicate,
                    t.object,
                    t.doc_id,
                    t.article_id,
                    t.chunk_index,
                    t.variant.value,
                    *[
                        "" if record.scores.get(m) is None else record.scores[m]
                        for m in ANNOTATION_METRICS
                    ],
                    record.comment,
                ]
            )


def load_annotation_csv(path: str | Path) -> list[AnnotationRecord]:
    """Read an annotation CSV back, validating any filled-in scores."""
    from .prompting import PromptVariant

    records: list[AnnotationRecord] = []
    with open(path, encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            triple = Triple(
                subject=row["subject"],
                predicate=row["predicate"],
                object=row["object"],
                doc_id=row.get("doc_id", ""),
                article_id=row.get("article_id", ""),
                chunk_index=int(row.get("chunk_index") or 0),
                variant=PromptVariant.from_name(row["variant"]),
            )
            scores: dict[str, int | None] = {}
            for name in ANNOTATION_METRICS:
                raw = (row.get(name) or "").strip()
                scores[name] = int(raw) if raw else None
            record = AnnotationRecord(
                triple=triple, scores=scores, comment=row.get("comment", "")
            )
            record.validate()
            records.append(record)
    return records
