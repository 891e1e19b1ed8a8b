"""Trade agreement corpus: XML ingestion, preprocessing, and chunking.

A corpus is a directory of XML files, one agreement per file. Elements whose
tag name contains ``article`` or ``chapter`` (case-insensitive) are treated as
text units; party names come from metadata elements when present, then from
the ``<partyA>-<partyB>*.xml`` filename pattern, and are otherwise left
unknown rather than invented.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from pathlib import Path

from .defaults import default_filler_terms, default_stopwords
from .errors import ConfigurationError

__all__ = [
    "ArticleUnit",
    "AgreementDocument",
    "CorpusIndex",
    "PreprocessConfig",
    "load_corpus",
    "preprocess",
    "preprocess_document",
    "preprocess_index",
    "chunk_document",
    "chunk_text",
    "write_corpus_jsonl",
    "read_corpus_jsonl",
]

MIN_CHUNK_CHARS = 200
DEFAULT_MAX_CHUNK_CHARS = 4000

_TOKEN_RE = re.compile(r"\w+|[^\w\s]+")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_UNIT_TAG_RE = re.compile(r"article|chapter", re.IGNORECASE)


@dataclass(frozen=True)
class ArticleUnit:
    """One article or chapter worth of text from an agreement."""

    article_id: str
    raw_text: str
    clean_text: str = ""


@dataclass(frozen=True)
class AgreementDocument:
    """A single agreement: its parties, sector tags, and text units."""

    doc_id: str
    party_a: str | None
    party_b: str | None
    sectors: tuple[str, ...]
    articles: tuple[ArticleUnit, ...]


@dataclass(frozen=True)
class CorpusIndex:
    """All documents loaded from one source directory, plus load failures."""

    source_dir: str
    documents: tuple[AgreementDocument, ...]
    load_errors: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PreprocessConfig:
    """Settings for text cleaning and chunking."""

    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    domain_filler_terms: frozenset[str] = field(default_factory=default_filler_terms)
    lowercase: bool = False
    collapse_whitespace: bool = True
    max_chunk_chars: int = DEFAULT_MAX_CHUNK_CHARS

    def __post_init__(self) -> None:
        if self.max_chunk_chars < MIN_CHUNK_CHARS:
            raise ConfigurationError(
                f"max_chunk_chars must be at least {MIN_CHUNK_CHARS}, "
                f"got {self.max_chunk_chars}"
            )

    @property
    def removal_terms(self) -> frozenset[str]:
        return self.stopwords | self.domain_filler_terms


def _local_tag(tag: object) -> str:
    # ElementTree uses "{namespace}tag" for namespaced elements; comments and
    # processing instructions have non-string tags and are never units.
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1].lower()


def _is_unit(elem: ET.Element) -> bool:
    return bool(_UNIT_TAG_RE.search(_local_tag(elem.tag)))


def _has_unit_descendant(elem: ET.Element) -> bool:
    return any(_is_unit(child) or _has_unit_descendant(child) for child in elem)


def _collect_units(elem: ET.Element, prefix: str, out: list[tuple[str, str]]) -> None:
    """Walk the tree collecting leaf text units.

    A chapter that contains articles contributes a path component; only the
    innermost article/chapter elements yield text, so no passage is counted
    twice.
    """
    counters: dict[str, int] = {}
    for child in elem:
        if _is_unit(child):
            tag = _local_tag(child.tag)
            counters[tag] = counters.get(tag, 0) + 1
            label = f"{tag}:{counters[tag]:03d}"
            path = f"{prefix}/{label}" if prefix else label
            if _has_unit_descendant(child):
                _collect_units(child, path, out)
            else:
                text = "".join(child.itertext())
                if text.strip():
                    out.append((path, text))
        else:
            _collect_units(child, prefix, out)


def _extract_parties(root: ET.Element, filename: str) -> tuple[str | None, str | None]:
    names: list[str] = []
    for elem in root.iter():
        if "party" in _local_tag(elem.tag):
            text = " ".join("".join(elem.itertext()).split())
            if text:
                names.append(text)
    if not names:
        # <partyA>-<partyB>*.xml fallback; numeric segments are years, not parties
        stem = Path(filename).stem
        names = [seg for seg in stem.split("-") if seg and not seg.isdigit()]
    party_a = names[0] if names else None
    party_b = next((n for n in names[1:] if n != party_a), None)
    return party_a, party_b


def _extract_sectors(root: ET.Element) -> tuple[str, ...]:
    sectors: set[str] = set()
    for elem in root.iter():
        if "sector" in _local_tag(elem.tag):
            text = " ".join("".join(elem.itertext()).split())
            for part in re.split(r"[,;]", text):
                part = part.strip().lower()
                if part:
                    sectors.add(part)
    return tuple(sorted(sectors))


def _parse_file(path: Path) -> AgreementDocument:
    root = ET.parse(path).getroot()
    units: list[tuple[str, str]] = []
    if _is_unit(root):
        # whole document is a single unit element
        if _has_unit_descendant(root):
            _collect_units(root, f"{_local_tag(root.tag)}:001", units)
        else:
            text = "".join(root.itertext())
            if text.strip():
                units.append((f"{_local_tag(root.tag)}:001", text))
    else:
        _collect_units(root, "", units)
    party_a, party_b = _extract_parties(root, path.name)
    return AgreementDocument(
        doc_id=path.stem,
        party_a=party_a,
        party_b=party_b,
        sectors=_extract_sectors(root),
        articles=tuple(ArticleUnit(article_id, text) for article_id, text in units),
    )


def load_corpus(source_dir: str | Path, limit: int | None = None) -> CorpusIndex:
    """Load every ``*.xml`` file under ``source_dir`` (non-recursive).

    Files are visited in lexicographic order; ``limit`` keeps only the first
    N of them. A file that fails to parse becomes a ``load_errors`` entry
    instead of aborting the load, so the number of documents plus the number
    of errors always equals the number of files scanned.
    """
    directory = Path(source_dir)
    if not directory.is_dir():
        raise ConfigurationError(f"corpus directory not found: {directory}")
    files = sorted(directory.glob("*.xml"), key=lambda p: p.name)
    if limit is not None:
        files = files[: max(limit, 0)]
    documents: list[AgreementDocument] = []
    errors: list[tuple[str, str]] = []
    for path in files:
        try:
            documents.append(_parse_file(path))
        except ET.ParseError as exc:
            errors.append((path.name, f"XML parse error: {exc}"))
        except OSError as exc:
            errors.append((path.name, f"read error: {exc}"))
    documents.sort(key=lambda d: d.doc_id)
    return CorpusIndex(
        source_dir=str(directory),
        documents=tuple(documents),
        load_errors=tuple(errors),
    )


def preprocess(text: str, config: PreprocessConfig) -> str:
    """Remove stopwords and treaty boilerplate from ``text``.

    Tokens are maximal runs of word characters or of punctuation; a token is
    dropped when its lowercase form is in the removal set. Remaining tokens
    keep their original order, so the function never introduces new tokens
    and applying it twice gives the same result as applying it once.
    """
    removal = config.removal_terms
    pieces: list[str] = []
    pending_gap: str | None = None
    pos = 0
    for m in _TOKEN_RE.finditer(text):
        gap = text[pos : m.start()]
        pos = m.end()
        token = m.group()
        if token.lower() in removal:
            if pieces:
                pending_gap = (pending_gap or "") + gap
            continue
        if pieces:
            sep = (pending_gap or "") + gap
            if config.collapse_whitespace:
                sep = " " if sep else ""
            pieces.append(sep)
        pending_gap = None
        pieces.append(token.lower() if config.lowercase else token)
    return "".join(pieces)


def preprocess_document(doc: AgreementDocument, config: PreprocessConfig) -> AgreementDocument:
    """Return a copy of ``doc`` with ``clean_text`` filled for every article."""
    articles = tuple(
        replace(article, clean_text=preprocess(article.raw_text, config))
        for article in doc.articles
    )
    return replace(doc, articles=articles)


def preprocess_index(index: CorpusIndex, config: PreprocessConfig) -> CorpusIndex:
    documents = tuple(preprocess_document(doc, config) for doc in index.documents)
    return replace(index, documents=documents)


def _split_long_sentence(sentence: str, max_chars: int) -> list[str]:
    parts: list[str] = []
    current = ""
    for word in sentence.split(" "):
        while len(word) > max_chars:
            # pathological unbroken run longer than a whole chunk: hard cut
            if current:
                parts.append(current)
                current = ""
            parts.append(word[:max_chars])
            word = word[max_chars:]
        candidate = f"{current} {word}" if current else word
        if len(candidate) <= max_chars:
            current = candidate
        else:
            if current:
                parts.append(current)
            current = word
    if current:
        parts.append(current)
    return parts


def chunk_text(text: str, max_chars: int) -> list[str]:
    """Split ``text`` at sentence boundaries into chunks of at most ``max_chars``."""
    chunks: list[str] = []
    current = ""
    for sentence in _SENTENCE_SPLIT.split(text):
        if not sentence:
            continue
        if len(sentence) > max_chars:
            pieces = _split_long_sentence(sentence, max_chars)
        else:
            pieces = [sentence]
        for piece in pieces:
            candidate = f"{current} {piece}" if current else piece
            if len(candidate) <= max_chars:
                current = candidate
            else:
                if current:
                    chunks.append(current)
                current = piece
    if current:
        chunks.append(current)
    return [c for c in chunks if c.strip()]


def chunk_document(
    doc: AgreementDocument, config: PreprocessConfig
) -> list[tuple[str, int, str]]:
    """Return ``(article_id, chunk_index, chunk_text)`` tuples for one document.

    An article's ``clean_text`` is used when present; otherwise its raw text
    is preprocessed with ``config`` first, so both freshly loaded and cached
    corpora chunk the same way. Joining the chunks of an article with a
    single space reproduces its clean text up to whitespace.
    """
    out: list[tuple[str, int, str]] = []
    for article in doc.articles:
        text = article.clean_text or preprocess(article.raw_text, config)
        for i, chunk in enumerate(chunk_text(text, config.max_chunk_chars)):
            out.append((article.article_id, i, chunk))
    return out


def _document_record(doc: AgreementDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "party_a": doc.party_a,
        "party_b": doc.party_b,
        "sectors": list(doc.sectors),
        "articles": [
            {"article_id": a.article_id, "clean_text": a.clean_text}
            for a in doc.articles
        ],
    }


def write_corpus_jsonl(index: CorpusIndex, path: str | Path) -> None:
    """Write one JSON object per document, in doc_id order, UTF-8."""
    lines = [
        json.dumps(_document_record(doc), ensure_ascii=False)
        for doc in index.documents
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_corpus_jsonl(path: str | Path) -> CorpusIndex:
    """Rehydrate a corpus cache written by :func:`write_corpus_jsonl`.

    The cache stores clean text only, so ``raw_text`` comes back empty.
    """
    cache = Path(path)
    if not cache.is_file():
        raise ConfigurationError(f"corpus cache not found: {cache}")
    documents: list[AgreementDocument] = []
    for line in cache.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        documents.append(
            AgreementDocument(
                doc_id=record["doc_id"],
                party_a=record.get("party_a"),
                party_b=record.get("party_b"),
                sectors=tuple(record.get("sectors", ())),
                articles=tuple(
                    ArticleUnit(
                        article_id=a["article_id"],
                        raw_text="",
                        clean_text=a.get("clean_text", ""),
                    )
                    for a in record.get("articles", ())
                ),
            )
        )
    documents.sort(key=lambda d: d.doc_id)
    return CorpusIndex(source_dir=str(cache), documents=tuple(documents))
