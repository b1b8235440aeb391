"""Prompt construction, chat-LLM providers, and response parsing.

Every outbound call goes through the small :class:`ChatProvider` interface,
so the whole pipeline runs offline against :class:`MockProvider`, which
serves canned responses from a fixture directory keyed by request hash.

Responses are never repaired: a line that fails the chord grammar or has the
wrong bar count is dropped and logged, keeping the observed distribution of
model output intact for the proposal prior trained on it.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import math
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import httpx

from .assets import keyword_list_block, read_asset_text
from .chords import Key, Mode, ParseError, Progression, parse_progression

__all__ = [
    "UpstreamLLMError",
    "EmptyResponse",
    "AllCandidatesMalformed",
    "ImageTooLarge",
    "KeywordSet",
    "PromptTemplate",
    "PROMPT_IDS",
    "prompt_template",
    "ChatRequest",
    "ChatProvider",
    "LLMProviderConfig",
    "OpenAIChatProvider",
    "MockProvider",
    "extract_keywords",
    "generate_candidates_batch",
    "generate_candidate_single",
]

log = logging.getLogger(__name__)

MAX_IMAGE_BYTES = 8 * 1024 * 1024

PROMPT_IDS = ("keyword_extraction", "chord_batch_diverse", "chord_single_baseline")

_PROMPT_FILES = {
    "keyword_extraction": "keyword_extraction_system.txt",
    "chord_batch_diverse": "chord_batch_system.txt",
    "chord_single_baseline": "chord_single_system.txt",
}

# Few-shot turns appended after the keyword-extraction system prompt.
KEYWORD_EXAMPLES: tuple[tuple[str, str], ...] = (
    (
        "Image: [A base64-encoded image of a city skyline at sunset]",
        "ambient, lo-fi house moods, mellow, smooth jazz, chillwave, urban pop, dreamy, city pop",
    ),
    (
        "Image: [A base64-encoded image of a long-distance couple reuniting at the airport] | "
        "Text Note: Met after three years at the airport. Felt like a movie scene. I scanned the "
        "crowd, and there you were, smiling. I knew I was home.",
        "cinematic, indie, nostalgic, intimate, troubadour, americana, orchestral, piano",
    ),
    (
        "Text Note: “Hope” is the thing with feathers - That perches in the soul - And "
        "sings the tune without the words - And never stops at all. | User Keywords: hopeful",
        "emotional, ethereal, acoustic guitar, folk, atmospheric, storytelling ballad, "
        "soft-spoken harmonies",
    ),
)


class UpstreamLLMError(RuntimeError):
    """Provider call failed after exhausting retries."""


class EmptyResponse(RuntimeError):
    """Provider returned no usable content."""


class AllCandidatesMalformed(RuntimeError):
    """No response line survived grammar and bar-count validation."""


class ImageTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class KeywordSet:
    """Ordered, case-folded, deduplicated music keywords with origin tags."""

    keywords: tuple[str, ...]
    origins: tuple[str, ...]  # "llm_suggested" | "user_written", parallel to keywords

    def __post_init__(self):
        if len(self.keywords) != len(self.origins):
            raise ValueError("keywords and origins must be parallel")
        if len({k.casefold() for k in self.keywords}) != len(self.keywords):
            raise ValueError("duplicate keywords after case-folding")

    @staticmethod
    def from_words(words: list[str], user_words: set[str] | None = None) -> "KeywordSet":
        user_words = {w.casefold() for w in (user_words or set())}
        seen: list[str] = []
        origins: list[str] = []
        for word in words:
            w = word.strip().casefold()
            if not w or w in seen:
                continue
            seen.append(w)
            origins.append("user_written" if w in user_words else "llm_suggested")
        return KeywordSet(tuple(seen), tuple(origins))

    def render(self) -> str:
        return ", ".join(self.keywords)


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    def render(self, **params) -> str:
        return self.body.format(**params)


def prompt_template(prompt_id: str) -> PromptTemplate:
    if prompt_id not in _PROMPT_FILES:
        raise KeyError(f"unknown prompt id {prompt_id!r}; expected one of {PROMPT_IDS}")
    body = read_asset_text("prompts", _PROMPT_FILES[prompt_id]).rstrip("\n")
    return PromptTemplate(id=prompt_id, body=body)


@dataclass(frozen=True)
class ChatRequest:
    """A provider-agnostic chat completion request.

    ``kind`` tags the pipeline stage so the mock provider can pick a default
    fixture when it has no exact match for the request hash.
    """

    kind: str
    system: str
    user: str
    examples: tuple[tuple[str, str], ...] = ()
    image_b64: str | None = None
    temperature: float = 1.0
    # Routing hint for fixture fallback only (e.g. "bars4"); not part of the
    # request identity.
    hint: str | None = None

    def canonical_hash(self) -> str:
        image_digest = (
            hashlib.sha256(self.image_b64.encode()).hexdigest() if self.image_b64 else None
        )
        payload = json.dumps(
            {
                "kind": self.kind,
                "system": self.system,
                "examples": [list(pair) for pair in self.examples],
                "user": self.user,
                "image": image_digest,
                "temperature": self.temperature,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()


class ChatProvider(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


@dataclass(frozen=True)
class LLMProviderConfig:
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-2024-05-13"
    temperature: float = 1.0
    timeout_s: float = 60.0
    max_retries: int = 3
    api_key_env: str = "OPENAI_API_KEY"


class OpenAIChatProvider:
    """Chat-completions client for any OpenAI-compatible endpoint.

    Transport errors and 5xx responses are retried with exponential backoff
    (``max_retries`` attempts total); everything else surfaces immediately as
    :class:`UpstreamLLMError`.
    """

    def __init__(self, config: LLMProviderConfig, api_key: str):
        self.config = config
        self._api_key = api_key

    def _messages(self, request: ChatRequest) -> list[dict]:
        messages: list[dict] = [{"role": "system", "content": request.system}]
        for user, assistant in request.examples:
            messages.append({"role": "user", "content": user})
            messages.append({"role": "assistant", "content": assistant})
        if request.image_b64:
            content: list[dict] = [{"type": "text", "text": request.user}]
            content.append(
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:image/png;base64,{request.image_b64}"},
                }
            )
            messages.append({"role": "user", "content": content})
        else:
            messages.append({"role": "user", "content": request.user})
        return messages

    def complete(self, request: ChatRequest) -> str:
        body = {
            "model": self.config.model,
            "temperature": request.temperature,
            "messages": self._messages(request),
        }
        delay = 1.0
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(delay)
                delay *= 2
            try:
                response = httpx.post(
                    f"{self.config.endpoint}/chat/completions",
                    json=body,
                    headers={"Authorization": f"Bearer {self._api_key}"},
                    timeout=self.config.timeout_s,
                )
                if response.status_code >= 500:
                    last_error = UpstreamLLMError(f"server error {response.status_code}")
                    continue
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except httpx.TransportError as err:
                last_error = err
            except (httpx.HTTPStatusError, KeyError, ValueError) as err:
                raise UpstreamLLMError(f"bad response from provider: {err}") from err
        raise UpstreamLLMError(
            f"provider unreachable after {self.config.max_retries} retries: {last_error}"
        )


class MockProvider:
    """Deterministic offline provider backed by a fixture directory.

    Responses live at ``<dir>/<sha256(request)>.txt``; a request with no
    exact fixture falls back to ``<dir>/default_<kind>.txt``. Every call is
    appended to an in-memory transcript (thread-safe).
    """

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)
        self.transcript: list[dict] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        digest = request.canonical_hash()
        names = [f"{digest}.txt"]
        if request.hint:
            names.append(f"default_{request.kind}_{request.hint}.txt")
        names.append(f"default_{request.kind}.txt")
        for name in names:
            path = self.fixture_dir / name
            if path.exists():
                break
        else:
            raise UpstreamLLMError(
                f"no fixture for request {digest} and no default_{request.kind}.txt"
            )
        response = path.read_text(encoding="utf-8")
        with self._lock:
            self.transcript.append(
                {"hash": digest, "kind": request.kind, "fixture": path.name}
            )
        return response


def _request_line(keywords: KeywordSet, key: Key, mode: Mode, bars: int) -> str:
    return (
        f"User keywords: {keywords.render()} | Key: {key.render()} | "
        f"Mode: {mode.render()} | Bars: {bars}"
    )


def extract_keywords(
    image: bytes | None = None,
    text: str | None = None,
    user_keywords: list[str] | None = None,
    provider: ChatProvider | None = None,
    temperature: float = 1.0,
) -> KeywordSet:
    """Turn multimodal inputs into a keyword set via the extraction prompt."""
    if image is None and not text and not user_keywords:
        raise ValueError("need at least one of image, text, user_keywords")
    if provider is None:
        raise ValueError("a chat provider is required")
    if image is not None and len(image) > MAX_IMAGE_BYTES:
        raise ImageTooLarge(f"image is {len(image)} bytes; limit {MAX_IMAGE_BYTES}")

    parts = []
    if image is not None:
        parts.append("Image: [attached]")
    if text:
        parts.append(f"Text Note: {text}")
    if user_keywords:
        parts.append(f"User Keywords: {', '.join(user_keywords)}")

    request = ChatRequest(
        kind="keyword_extraction",
        system=prompt_template("keyword_extraction").render(keyword_list=keyword_list_block()),
        user=" | ".join(parts),
        examples=KEYWORD_EXAMPLES,
        image_b64=base64.b64encode(image).decode() if image is not None else None,
        temperature=temperature,
    )
    response = provider.complete(request)
    result = KeywordSet.from_words(
        response.split(","), user_words=set(user_keywords or [])
    )
    if not result.keywords:
        raise EmptyResponse("provider returned no keywords")
    return result


def _parse_candidate_lines(
    response: str, key: Key, mode: Mode, bars: int
) -> list[Progression]:
    out = []
    for lineno, line in enumerate(response.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            p = parse_progression(line, key, mode)
        except ParseError as err:
            log.info("dropped candidate line %d (%r): %s", lineno, line, err)
            continue
        if p.bars != bars:
            log.info("dropped candidate line %d: %d chords, expected %d", lineno, p.bars, bars)
            continue
        out.append(p)
    return out


def generate_candidates_batch(
    keywords: KeywordSet,
    key: Key,
    mode: Mode,
    bars: int,
    n: int,
    provider: ChatProvider,
    temperature: float = 1.0,
) -> list[Progression]:
    """One batched call requesting ``n`` diverse progressions.

    Invalid lines are dropped; if fewer than 80% of ``n`` survive, the same
    prompt is retried once and the results concatenated (capped at ``n``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not keywords.keywords:
        raise ValueError("keywords must be non-empty")
    request = ChatRequest(
        kind="chord_batch",
        system=prompt_template("chord_batch_diverse").render(n=n),
        user=_request_line(keywords, key, mode, bars),
        temperature=temperature,
        hint=f"bars{bars}",
    )
    candidates = _parse_candidate_lines(provider.complete(request), key, mode, bars)
    if len(candidates) < math.ceil(0.8 * n):
        log.warning("batch yielded %d/%d valid lines, retrying once", len(candidates), n)
        candidates += _parse_candidate_lines(provider.complete(request), key, mode, bars)
        candidates = candidates[:n]
    if not candidates:
        raise AllCandidatesMalformed("no valid progressions in batch response")
    return candidates


def generate_candidate_single(
    keywords: KeywordSet,
    key: Key,
    mode: Mode,
    bars: int,
    provider: ChatProvider,
    temperature: float = 1.0,
) -> Progression:
    """One call producing a single progression (the repeated-query baseline)."""
    if not keywords.keywords:
        raise ValueError("keywords must be non-empty")
    request = ChatRequest(
        kind="chord_single",
        system=prompt_template("chord_single_baseline").render(),
        user=_request_line(keywords, key, mode, bars),
        temperature=temperature,
        hint=f"bars{bars}",
    )
    response = provider.complete(request)
    if not response.strip():
        raise EmptyResponse("provider returned an empty progression")
    candidates = _parse_candidate_lines(response, key, mode, bars)
    if not candidates:
        raise AllCandidatesMalformed(f"response {response!r} did not parse")
    return candidates[0]
