"""Chat and embedding client for locally served models, plus a mock backend.

The live transport speaks the JSON-over-HTTP dialect of common local model
servers (Ollama-style by default, an OpenAI-style profile as an alternative).
The mock transport is a pure function of the prompt text and the configured
seed, which makes every pipeline run on it reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
import requests

from .errors import ConfigurationError, TransportError

__all__ = [
    "EndpointConfig",
    "EmbeddingVector",
    "LlmClient",
    "MockTransport",
    "HttpTransport",
    "make_client",
    "mock_embedding",
]

EMBEDDING_DIM = 256
ENDPOINT_ENV_VAR = "TRIPLEX_ENDPOINT"

_PROFILES = ("ollama", "openai")
_TRIGRAM_SALT = b"triplex-mock-embed-v1:"


@dataclass(frozen=True)
class EndpointConfig:
    """Connection and decoding settings for the model endpoint."""

    base_url: str = "http://localhost:11434"
    model_name: str = "llama3.1:70b"
    embedding_model: str = "nomic-embed-text"
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout_ms: int = 120_000
    max_retries: int = 3
    max_parallel_requests: int = 4
    seed: int | None = 42
    profile: str = "ollama"
    chat_path: str | None = None
    embeddings_path: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigurationError(f"temperature out of range [0, 2]: {self.temperature}")
        if self.max_parallel_requests < 1:
            raise ConfigurationError("max_parallel_requests must be at least 1")
        if self.max_retries < 0:
            raise ConfigurationError("max_retries must not be negative")
        if self.timeout_ms <= 0:
            raise ConfigurationError("timeout_ms must be positive")
        if self.profile not in _PROFILES:
            raise ConfigurationError(
                f"unknown endpoint profile {self.profile!r}; valid: {', '.join(_PROFILES)}"
            )

    def fingerprint(self) -> str:
        key = "|".join(
            str(v)
            for v in (
                self.model_name,
                self.embedding_model,
                self.temperature,
                self.max_tokens,
                self.seed,
                self.profile,
            )
        )
        return hashlib.sha256(key.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """A unit-length embedding."""

    values: np.ndarray
    dimension: int

    def cosine(self, other: "EmbeddingVector") -> float:
        return float(np.clip(np.dot(self.values, other.values), -1.0, 1.0))


def _bucket(feature: str) -> int:
    digest = hashlib.sha256(_TRIGRAM_SALT + feature.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % EMBEDDING_DIM


def mock_embedding(text: str) -> np.ndarray:
    """Hashed character-trigram counts of ``text``, L2-normalized.

    Words are padded with ``#`` on both sides before trigram extraction so
    that short words still contribute features and word boundaries matter.
    """
    words = text.lower().split()
    if not words:
        raise ValueError("cannot embed empty text")
    vec = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    for word in words:
        padded = f"#{word}#"
        if len(padded) < 3:
            vec[_bucket(padded)] += 1.0
        else:
            for i in range(len(padded) - 2):
                vec[_bucket(padded[i : i + 3])] += 1.0
    norm = float(np.linalg.norm(vec))
    return vec / norm


# ---------------------------------------------------------------------------
# Mock chat fixtures
# ---------------------------------------------------------------------------

EMPTY_CASE_TOKEN = "EMPTY_CASE"

_FALLBACK_ENTITIES = ("Japan", "Thailand", "Canada", "Norway", "Chile", "Singapore")
_MOCK_PREDICATES = (
    "signed",
    "signs",
    "ratifies",
    "exports",
    "imports",
    "eliminates",
    "reduces",
    "grants",
    "establishes",
    "expand trade with",
    "expands trade with",
    "cooperates with",
    "invests in",
    "liberalises",
    "means",
    "includes",
)
_MOCK_OBJECTS = (
    "customs duties",
    "import tariffs",
    "a free trade agreement",
    "import quotas",
    "rules of origin",
    "safeguard measures",
    "market access",
    "trade in services",
)
_MOCK_GENERIC_LINES = (
    "(The Parties | signed | contract)",
    "(They | agree | the Agreement)",
    "(The Parties | establishes | a joint committee)",
)
_MOCK_JUNK_LINES = (
    "Here are the extracted triples:",
    "Note: some passages contain no extractable relations.",
    "- subject: see above",
    "(incomplete |)",
)

_ENTITY_SPAN_RE = re.compile(r"(?:[A-Z][A-Za-z]+)(?:\s+[A-Z][A-Za-z]+)*")
_ENTITY_BLOCKLIST = {"the", "a", "an", "this", "each", "both", "it", "they", "text"}

REFINEMENT_MARKER = "Rewrite the triple below"


def _chunk_part(prompt_text: str) -> str:
    return prompt_text.rsplit("\nText:\n", 1)[-1]


def _chunk_entities(chunk: str) -> list[str]:
    seen: list[str] = []
    for m in _ENTITY_SPAN_RE.finditer(chunk):
        span = m.group()
        if span.lower() in _ENTITY_BLOCKLIST or len(span) < 3:
            continue
        if span not in seen:
            seen.append(span)
        if len(seen) >= 10:
            break
    return seen


def _mock_refinement_reply(prompt_text: str) -> str:
    terms: list[str] = []
    original = None
    for line in prompt_text.splitlines():
        if line.startswith("Generic terms:"):
            terms = [t.strip().lower() for t in line.split(":", 1)[1].split(";") if t.strip()]
        if line.startswith("Original triple:"):
            original = line.split(":", 1)[1].strip()
    if original is None:
        return "(unknown | unknown | unknown)"
    body = original.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    fields = [f.strip() for f in body.split("|")]
    if len(fields) != 3:
        return original
    entities = _chunk_entities(_chunk_part(prompt_text))
    if len(entities) >= 2:
        replacement = f"{entities[0]} and {entities[1]}"
    elif entities:
        replacement = entities[0]
    else:
        replacement = None
    if replacement is not None:
        fields = [
            replacement if field.lower().strip(".") in terms else field
            for field in fields
        ]
    return "({} | {} | {})".format(*fields)


def _mock_chat_reply(prompt_text: str, seed: int) -> str:
    if EMPTY_CASE_TOKEN in prompt_text:
        return "No subject-predicate-object relations could be identified in the supplied text."
    if REFINEMENT_MARKER in prompt_text:
        return _mock_refinement_reply(prompt_text)
    digest = hashlib.sha256(f"{seed}\x00{prompt_text}".encode("utf-8")).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    entities = _chunk_entities(_chunk_part(prompt_text)) or list(_FALLBACK_ENTITIES)
    # prompts that warn about generic terms get cleaner output
    generic_rate = 0.15 if "generic term" in prompt_text else 0.35
    lines: list[str] = []
    if rng.random() < 0.5:
        lines.append(rng.choice(_MOCK_JUNK_LINES))
    for _ in range(3 + rng.randrange(4)):
        roll = rng.random()
        if roll < generic_rate:
            lines.append(rng.choice(_MOCK_GENERIC_LINES))
            continue
        if roll < generic_rate + 0.1:
            lines.append(rng.choice(_MOCK_JUNK_LINES))
            continue
        subject = rng.choice(entities)
        predicate = rng.choice(_MOCK_PREDICATES)
        obj = rng.choice(entities + list(_MOCK_OBJECTS))
        if obj == subject:
            obj = rng.choice(_MOCK_OBJECTS)
        if roll > 0.9:
            lines.append(f"('{subject}', '{predicate}', '{obj}')")
        else:
            lines.append(f"({subject} | {predicate} | {obj})")
    return "\n".join(lines)


class Transport(Protocol):
    def chat(self, prompt_text: str) -> str: ...

    def embed_one(self, text: str) -> Sequence[float]: ...


class MockTransport:
    """Deterministic stand-in for a model server. Never fails."""

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def chat(self, prompt_text: str) -> str:
        return _mock_chat_reply(prompt_text, self.seed)

    def embed_one(self, text: str) -> Sequence[float]:
        return mock_embedding(text)


class HttpTransport:
    """JSON-over-HTTP transport with retries and exponential backoff."""

    def __init__(
        self,
        config: EndpointConfig,
        session: requests.Session | None = None,
        sleeper=time.sleep,
        backoff_base: float = 0.25,
    ) -> None:
        self.config = config
        self.base_url = os.environ.get(ENDPOINT_ENV_VAR) or config.base_url
        self.session = session or requests.Session()
        self._sleep = sleeper
        self._backoff_base = backoff_base

    def _paths(self) -> tuple[str, str]:
        if self.config.profile == "openai":
            chat, embed = "/v1/chat/completions", "/v1/embeddings"
        else:
            chat, embed = "/api/chat", "/api/embeddings"
        return (self.config.chat_path or chat, self.config.embeddings_path or embed)

    def _request(self, path: str, payload: dict) -> dict:
        url = self.base_url.rstrip("/") + path
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(self._backoff_base * 2 ** (attempt - 1))
            try:
                response = self.session.post(
                    url, json=payload, timeout=self.config.timeout_ms / 1000.0
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                continue
            if 400 <= response.status_code < 500:
                raise ConfigurationError(
                    f"endpoint rejected request ({response.status_code}): "
                    f"{response.text[:200]}"
                )
            if response.status_code >= 500:
                last_error = TransportError(
                    f"server error {response.status_code} from {url}"
                )
                continue
            try:
                return response.json()
            except ValueError as exc:
                last_error = TransportError(f"non-JSON response from {url}: {exc}")
                continue
        raise TransportError(
            f"request to {url} failed after {self.config.max_retries + 1} attempts: "
            f"{last_error}"
        )

    def chat(self, prompt_text: str) -> str:
        chat_path, _ = self._paths()
        if self.config.profile == "openai":
            payload = {
                "model": self.config.model_name,
                "messages": [{"role": "user", "content": prompt_text}],
                "temperature": self.config.temperature,
                "max_tokens": self.config.max_tokens,
            }
            if self.config.seed is not None:
                payload["seed"] = self.config.seed
            data = self._request(chat_path, payload)
            try:
                return data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError):
                raise TransportError(f"unexpected chat response shape: {str(data)[:200]}")
        options = {
            "temperature": self.config.temperature,
            "num_predict": self.config.max_tokens,
        }
        if self.config.seed is not None:
            options["seed"] = self.config.seed
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt_text}],
            "stream": False,
            "options": options,
        }
        data = self._request(chat_path, payload)
        try:
            return data["message"]["content"]
        except (KeyError, TypeError):
            raise TransportError(f"unexpected chat response shape: {str(data)[:200]}")

    def embed_one(self, text: str) -> Sequence[float]:
        _, embed_path = self._paths()
        if self.config.profile == "openai":
            data = self._request(
                embed_path, {"model": self.config.embedding_model, "input": [text]}
            )
            try:
                return data["data"][0]["embedding"]
            except (KeyError, IndexError, TypeError):
                raise TransportError(
                    f"unexpected embedding response shape: {str(data)[:200]}"
                )
        data = self._request(
            embed_path, {"model": self.config.embedding_model, "prompt": text}
        )
        try:
            return data["embedding"]
        except (KeyError, TypeError):
            raise TransportError(f"unexpected embedding response shape: {str(data)[:200]}")


class LlmClient:
    """Facade over a transport: bounded parallelism, latency accounting."""

    def __init__(self, config: EndpointConfig, transport: Transport) -> None:
        self.config = config
        self.transport = transport
        self._gate = threading.Semaphore(config.max_parallel_requests)
        self._lock = threading.Lock()
        self.stats = {"requests": 0, "failures": 0, "total_latency_ms": 0.0}

    def _timed(self, call, *args):
        started = time.perf_counter()
        try:
            with self._gate:
                result = call(*args)
        except Exception:
            with self._lock:
                self.stats["requests"] += 1
                self.stats["failures"] += 1
            raise
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        with self._lock:
            self.stats["requests"] += 1
            self.stats["total_latency_ms"] += elapsed_ms
        return result

    def complete(self, prompt) -> str:
        """Send one chat request. Accepts a RenderedPrompt or a plain string."""
        text = getattr(prompt, "text", prompt)
        if not isinstance(text, str) or not text.strip():
            raise ValueError("complete requires a non-empty prompt")
        return self._timed(self.transport.chat, text)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        """Embed each text, returning unit-length vectors in input order."""
        if not texts:
            raise ValueError("embed requires a non-empty list of texts")
        for i, text in enumerate(texts):
            if not isinstance(text, str) or not text.strip():
                raise ValueError(f"embed text at index {i} is empty")
        vectors: list[EmbeddingVector] = []
        for text in texts:
            raw = np.asarray(self._timed(self.transport.embed_one, text), dtype=np.float64)
            norm = float(np.linalg.norm(raw))
            if not np.isfinite(norm) or norm <= 0.0:
                raise TransportError(
                    f"embedding for {text[:40]!r} has invalid norm {norm}"
                )
            vectors.append(EmbeddingVector(values=raw / norm, dimension=raw.size))
        return vectors


def make_client(config: EndpointConfig, backend: str = "mock") -> LlmClient:
    """Build a client for ``backend``, either ``"mock"`` or ``"live"``."""
    if backend == "mock":
        return LlmClient(config, MockTransport(seed=config.seed or 0))
    if backend == "live":
        return LlmClient(config, HttpTransport(config))
    raise ConfigurationError(f"unknown backend {backend!r}; valid: live, mock")
