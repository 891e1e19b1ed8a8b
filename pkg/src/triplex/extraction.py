"""Parse model output into triples and assemble extraction runs.

The line grammar is deliberately small: a triple is three ``|``-separated
fields, with or without wrapping parentheses, or a quoted 3-tuple. Anything
else is rejected with a reason instead of raising, because model output is
untrusted input.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import CorpusIndex, PreprocessConfig, chunk_document
from .defaults import default_generic_terms
from .errors import ExtractionError, TransportError
from .llmclient import LlmClient
from .prompting import ExampleBank, PromptTemplates, PromptVariant, build_prompt

__all__ = [
    "TripleCandidate",
    "Triple",
    "ExtractionRun",
    "parse_triples",
    "normalize_field",
    "flag_generic",
    "refine_generic",
    "dedupe_and_cap",
    "run_extraction",
    "write_run",
    "read_run",
    "DEFAULT_TRIPLE_CAP",
]

DEFAULT_TRIPLE_CAP = 1000
COMPLEX_PREDICATE_TOKENS = 4

_QUOTED_TUPLE_RE = re.compile(
    r"""^\(?\s*(['"])(?P<s>.*?)\1\s*,\s*(['"])(?P<p>.*?)\3\s*,\s*(['"])(?P<o>.*?)\5\s*\)?\s*[.,;]?\s*$"""
)
_WRAPPER_PAIRS = (
    ("(", ")"),
    ("[", "]"),
    ('"', '"'),
    ("'", "'"),
    ("‘", "’"),
    ("“", "”"),
)

REFINEMENT_PROMPT = """Rewrite the triple below so that every generic term names its specific referent.
Generic terms: {terms}
Use the text to identify the specific named entities the generic terms stand for.
Respond with exactly one line in the format: (subject | predicate | object)

Original triple: ({s} | {p} | {o})

Text:
{chunk}"""


@dataclass(frozen=True)
class TripleCandidate:
    """A raw parsed triple before normalization."""

    subject: str
    predicate: str
    object: str
    source_line: str
    line_number: int


@dataclass(frozen=True)
class Triple:
    """A normalized triple with provenance and generic-term flags."""

    subject: str
    predicate: str
    object: str
    doc_id: str
    article_id: str
    chunk_index: int
    variant: PromptVariant
    generic_subject: bool = False
    generic_object: bool = False


@dataclass
class ExtractionRun:
    """One variant's pass over a corpus."""

    variant: PromptVariant
    triples: list[Triple]
    stats: dict[str, int]
    endpoint_fingerprint: str
    prompt_fingerprint: str


def _empty_stats() -> dict[str, int]:
    return {
        "chunks_processed": 0,
        "chunks_failed": 0,
        "lines_seen": 0,
        "lines_parsed": 0,
        "lines_rejected": 0,
        "duplicates_removed": 0,
        "capped_count": 0,
        "generic_flagged": 0,
        "refined_count": 0,
        "refine_failures": 0,
        "complex_predicates": 0,
    }


def parse_triples(raw_text: str) -> tuple[list[TripleCandidate], list[tuple[int, str, str]]]:
    """Split ``raw_text`` into candidates and rejections.

    Returns ``(candidates, rejections)`` where each rejection is
    ``(line_number, line, reason)``. Total: every line lands in exactly one
    of the two lists, and no input ever raises.
    """
    candidates: list[TripleCandidate] = []
    rejections: list[tuple[int, str, str]] = []
    for number, raw_line in enumerate(raw_text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            rejections.append((number, raw_line, "blank line"))
            continue
        if "|" in line:
            body = line.rstrip(".,;")
            if body.startswith("(") and body.endswith(")"):
                body = body[1:-1]
            parts = [part.strip() for part in body.split("|")]
            if len(parts) != 3:
                rejections.append(
                    (number, raw_line, f"expected 3 fields separated by '|', got {len(parts)}")
                )
                continue
            empty = [name for name, part in zip(("subject", "predicate", "object"), parts) if not part]
            if empty:
                rejections.append((number, raw_line, f"empty {', '.join(empty)}"))
                continue
            candidates.append(
                TripleCandidate(
                    subject=parts[0],
                    predicate=parts[1],
                    object=parts[2],
                    source_line=raw_line,
                    line_number=number,
                )
            )
            continue
        quoted = _QUOTED_TUPLE_RE.match(line)
        if quoted:
            fields = {name: quoted.group(name).strip() for name in ("s", "p", "o")}
            empty = [
                full
                for short, full in (("s", "subject"), ("p", "predicate"), ("o", "object"))
                if not fields[short]
            ]
            if empty:
                rejections.append((number, raw_line, f"empty {', '.join(empty)}"))
                continue
            candidates.append(
                TripleCandidate(
                    subject=fields["s"],
                    predicate=fields["p"],
                    object=fields["o"],
                    source_line=raw_line,
                    line_number=number,
                )
            )
            continue
        rejections.append((number, raw_line, "not a recognizable triple line"))
    return candidates, rejections


def normalize_field(value: str) -> str:
    """Lowercase, collapse whitespace, strip wrapping quotes/parens and trailing periods.

    Idempotent: normalizing an already normalized value changes nothing.
    """
    text = value.strip()
    while True:
        before = text
        for opener, closer in _WRAPPER_PAIRS:
            if len(text) >= 2 and text.startswith(opener) and text.endswith(closer):
                text = text[1:-1].strip()
        text = text.rstrip(".").strip()
        if text == before:
            break
    return " ".join(text.split()).lower()


def flag_generic(field_value: str, lexicon: frozenset[str] | None = None) -> bool:
    """True when a normalized field equals a known generic term."""
    terms = lexicon if lexicon is not None else default_generic_terms()
    return field_value in terms


def _normalize_candidate(
    candidate: TripleCandidate,
    doc_id: str,
    article_id: str,
    chunk_index: int,
    variant: PromptVariant,
    lexicon: frozenset[str],
) -> Triple | None:
    subject = normalize_field(candidate.subject)
    predicate = normalize_field(candidate.predicate)
    obj = normalize_field(candidate.object)
    if not subject or not predicate or not obj:
        return None
    return Triple(
        subject=subject,
        predicate=predicate,
        object=obj,
        doc_id=doc_id,
        article_id=article_id,
        chunk_index=chunk_index,
        variant=variant,
        generic_subject=flag_generic(subject, lexicon),
        generic_object=flag_generic(obj, lexicon),
    )


def refine_generic(
    triples: list[Triple],
    chunk_text: str,
    client: LlmClient,
    lexicon: frozenset[str] | None = None,
) -> tuple[list[Triple], int, int]:
    """Ask the model to replace generic subjects/objects, one follow-up per triple.

    A replacement field is accepted only when it parses and is itself
    non-generic; otherwise the original field survives. Triples without a
    generic flag pass through untouched. Returns
    ``(triples, refined_count, failures)``; the triple count never changes.
    """
    terms = lexicon if lexicon is not None else default_generic_terms()
    refined: list[Triple] = []
    refined_count = 0
    failures = 0
    for triple in triples:
        if not (triple.generic_subject or triple.generic_object):
            refined.append(triple)
            continue
        generic_fields = []
        if triple.generic_subject:
            generic_fields.append(triple.subject)
        if triple.generic_object:
            generic_fields.append(triple.object)
        prompt = REFINEMENT_PROMPT.format(
            terms="; ".join(generic_fields),
            s=triple.subject,
            p=triple.predicate,
            o=triple.object,
            chunk=chunk_text,
        )
        try:
            reply = client.complete(prompt)
        except TransportError:
            failures += 1
            refined.append(triple)
            continue
        candidates, _ = parse_triples(reply)
        if not candidates:
            refined.append(triple)
            continue
        candidate = candidates[0]
        new_subject, new_object = triple.subject, triple.object
        if triple.generic_subject:
            replacement = normalize_field(candidate.subject)
            if replacement and not flag_generic(replacement, terms):
                new_subject = replacement
        if triple.generic_object:
            replacement = normalize_field(candidate.object)
            if replacement and not flag_generic(replacement, terms):
                new_object = replacement
        if new_subject == triple.subject and new_object == triple.object:
            refined.append(triple)
            continue
        refined_count += 1
        refined.append(
            replace(
                triple,
                subject=new_subject,
                object=new_object,
                generic_subject=flag_generic(new_subject, terms),
                generic_object=flag_generic(new_object, terms),
            )
        )
    return refined, refined_count, failures


def dedupe_and_cap(
    triples: list[Triple], cap: int = DEFAULT_TRIPLE_CAP
) -> tuple[list[Triple], int, int]:
    """Drop repeated (subject, predicate, object) per document, then cap per document.

    Both passes keep first occurrences in input order. Returns
    ``(kept, duplicates_removed, capped_count)``.
    """
    seen: set[tuple[str, str, str, str]] = set()
    per_doc: dict[str, int] = {}
    kept: list[Triple] = []
    duplicates = 0
    capped = 0
    for triple in triples:
        key = (triple.doc_id, triple.subject, triple.predicate, triple.object)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        count = per_doc.get(triple.doc_id, 0)
        if count >= cap:
            capped += 1
            continue
        per_doc[triple.doc_id] = count + 1
        kept.append(triple)
    return kept, duplicates, capped


def _predicate_is_complex(predicate: str) -> bool:
    return len(predicate.split()) > COMPLEX_PREDICATE_TOKENS


def run_extraction(
    corpus: CorpusIndex,
    variant: PromptVariant,
    bank: ExampleBank,
    client: LlmClient,
    preprocess_config: PreprocessConfig,
    templates: PromptTemplates | None = None,
    generic_lexicon: frozenset[str] | None = None,
    cap: int = DEFAULT_TRIPLE_CAP,
) -> ExtractionRun:
    """Extract triples from every chunk of every document with one variant.

    Chunks are processed in parallel up to the client's request bound; the
    merge is ordered by (doc_id, article_id, chunk_index) so repeated runs
    produce identical output. A chunk whose request ultimately fails is
    recorded in the stats and skipped; the run only fails when every chunk
    does.
    """
    templates = templates or PromptTemplates.default()
    lexicon = generic_lexicon if generic_lexicon is not None else default_generic_terms()
    tasks: list[tuple[str, str, int, str]] = []
    for doc in corpus.documents:
        for article_id, chunk_index, text in chunk_document(doc, preprocess_config):
            tasks.append((doc.doc_id, article_id, chunk_index, text))

    stats = _empty_stats()
    run = ExtractionRun(
        variant=variant,
        triples=[],
        stats=stats,
        endpoint_fingerprint=client.config.fingerprint(),
        prompt_fingerprint=templates.fingerprint(variant),
    )
    if not tasks:
        return run

    def process(task: tuple[str, str, int, str]):
        doc_id, article_id, chunk_index, text = task
        prompt = build_prompt(variant, bank, text, templates)
        try:
            reply = client.complete(prompt)
        except TransportError as exc:
            return (doc_id, article_id, chunk_index, None, str(exc))
        candidates, rejections = parse_triples(reply)
        triples: list[Triple] = []
        norm_rejected = 0
        for candidate in candidates:
            triple = _normalize_candidate(
                candidate, doc_id, article_id, chunk_index, variant, lexicon
            )
            if triple is None:
                norm_rejected += 1
            else:
                triples.append(triple)
        flagged = sum(1 for t in triples if t.generic_subject or t.generic_object)
        refined_count = 0
        refine_failures = 0
        if variant is PromptVariant.NEGATIVE_EXAMPLES and flagged:
            triples, refined_count, refine_failures = refine_generic(
                triples, text, client, lexicon
            )
        lines_seen = len(candidates) + len(rejections)
        chunk_stats = {
            "lines_seen": lines_seen,
            "lines_parsed": len(triples),
            "lines_rejected": len(rejections) + norm_rejected,
            "generic_flagged": flagged,
            "refined_count": refined_count,
            "refine_failures": refine_failures,
            "complex_predicates": sum(
                1 for t in triples if _predicate_is_complex(t.predicate)
            ),
        }
        return (doc_id, article_id, chunk_index, (triples, chunk_stats), None)

    max_workers = max(1, client.config.max_parallel_requests)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(process, tasks))

    results.sort(key=lambda r: (r[0], r[1], r[2]))
    collected: list[Triple] = []
    failures = 0
    for doc_id, article_id, chunk_index, payload, error in results:
        if error is not None:
            failures += 1
            continue
        triples, chunk_stats = payload
        stats["chunks_processed"] += 1
        for key, value in chunk_stats.items():
            stats[key] += value
        collected.extend(triples)
    stats["chunks_failed"] = failures
    if failures == len(tasks):
        raise ExtractionError(
            f"all {failures} chunks failed; last resort is checking the endpoint"
        )
    kept, duplicates, capped = dedupe_and_cap(collected, cap)
    stats["duplicates_removed"] = duplicates
    stats["capped_count"] = capped
    run.triples = kept
    return run


def _triple_record(triple: Triple) -> dict:
    return {
        "subject": triple.subject,
        "predicate": triple.predicate,
        "object": triple.object,
        "doc_id": triple.doc_id,
        "article_id": triple.article_id,
        "chunk_index": triple.chunk_index,
        "variant": triple.variant.value,
        "generic_subject": triple.generic_subject,
        "generic_object": triple.generic_object,
    }


def write_run(run: ExtractionRun, path: str | Path, stats_path: str | Path | None = None) -> None:
    """Write a run as JSONL (one triple per line) plus a stats sidecar."""
    target = Path(path)
    lines = [json.dumps(_triple_record(t), ensure_ascii=False) for t in run.triples]
    target.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    sidecar = Path(stats_path) if stats_path else target.with_suffix(".stats.json")
    sidecar.write_text(
        json.dumps(
            {
                "variant": run.variant.value,
                "stats": run.stats,
                "endpoint_fingerprint": run.endpoint_fingerprint,
                "prompt_fingerprint": run.prompt_fingerprint,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )


def read_run(path: str | Path) -> ExtractionRun:
    """Rehydrate a run written by :func:`write_run`."""
    target = Path(path)
    triples: list[Triple] = []
    variant: PromptVariant | None = None
    for line in target.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        variant = PromptVariant.from_name(record["variant"])
        triples.append(
            Triple(
                subject=record["subject"],
                predicate=record["predicate"],
                object=record["object"],
                doc_id=record["doc_id"],
                article_id=record["article_id"],
                chunk_index=record["chunk_index"],
                variant=variant,
                generic_subject=record.get("generic_subject", False),
                generic_object=record.get("generic_object", False),
            )
        )
    stats = _empty_stats()
    endpoint_fingerprint = ""
    prompt_fingerprint = ""
    sidecar = target.with_suffix(".stats.json")
    if sidecar.is_file():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        stats.update(meta.get("stats", {}))
        endpoint_fingerprint = meta.get("endpoint_fingerprint", "")
        prompt_fingerprint = meta.get("prompt_fingerprint", "")
        if variant is None and "variant" in meta:
            variant = PromptVariant.from_name(meta["variant"])
    if variant is None:
        stem_name = target.stem
        variant = PromptVariant.from_name(stem_name)
    return ExtractionRun(
        variant=variant,
        triples=triples,
        stats=stats,
        endpoint_fingerprint=endpoint_fingerprint,
        prompt_fingerprint=prompt_fingerprint,
    )
