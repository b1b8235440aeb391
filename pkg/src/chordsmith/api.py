"""HTTP API: keyword extraction, chord suggestions, and audio transcription.

The app is a pure composition root: every endpoint delegates to the library
modules, providers are injected through :class:`~chordsmith.settings.Settings`,
and with the mock providers the whole API works with networking disabled.
"""

from __future__ import annotations

import json
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import llm, priors, sampler
from .chords import MODES, ParseError, parse_key, parse_mode
from .sampler import SamplerConfig, SamplerDeps
from .settings import Settings
from .transcribe import (
    MAX_SEGMENT_SECONDS,
    MockTranscriptionProvider,
    TranscriptionError,
    convert_to_key,
)

__all__ = ["create_app", "AuditStore", "SEED_HEADER"]

SEED_HEADER = "x-test-seed"


class AuditStore:
    """Append-only JSONL store of acceptance records, keyed by audit id."""

    def __init__(self, data_dir: Path, retention_days: int = 7):
        self.root = Path(data_dir) / "audits"
        self.root.mkdir(parents=True, exist_ok=True)
        self.retention_days = retention_days
        self.prune()

    def write(self, suggestion_set: sampler.SuggestionSet) -> str:
        audit_id = uuid.uuid4().hex
        with open(self.root / f"{audit_id}.jsonl", "w", encoding="utf-8") as fh:
            for record in suggestion_set.audit:
                fh.write(json.dumps(record.to_json_obj(), sort_keys=True) + "\n")
        return audit_id

    def prune(self) -> int:
        cutoff = time.time() - self.retention_days * 86400
        removed = 0
        for path in self.root.glob("*.jsonl"):
            if path.stat().st_mtime < cutoff:
                path.unlink(missing_ok=True)
                removed += 1
        return removed


class ChordsRequest(BaseModel):
    keywords: list[str]
    key: str
    mode: str
    bars: int


class TranscribeRequest(BaseModel):
    audio_url: str | None = None
    file_id: str | None = None
    start_s: float
    end_s: float
    convert_to_key: str | None = None
    convert_to_mode: str | None = None


def _build_llm_provider(settings: Settings) -> llm.ChatProvider:
    if settings.llm_provider == "mock":
        return llm.MockProvider(settings.fixture_dir)
    if settings.llm_provider == "openai":
        return llm.OpenAIChatProvider(settings.llm, settings.api_key())
    raise ValueError(f"unknown llm provider {settings.llm_provider!r}")


def create_app(settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings()
    app = FastAPI(title="chordsmith", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    provider = _build_llm_provider(settings)
    prior = priors.load(settings.prior_model_path)
    proposal = priors.load(settings.proposal_model_path, expect_vocab=prior.vocab)
    cfg = (
        SamplerConfig.load(settings.sampler_config_path)
        if settings.sampler_config_path
        else SamplerConfig()
    )
    audits = AuditStore(settings.data_dir, settings.audit_retention_days)
    transcriber = (
        MockTranscriptionProvider(settings.transcription_fixture)
        if settings.transcription_provider == "mock"
        else None
    )

    app.state.settings = settings
    app.state.provider = provider
    app.state.deps = SamplerDeps(provider=provider, prior=prior, proposal=proposal, cfg=cfg)

    def _request_rng(request: Request) -> np.random.Generator:
        seed = request.headers.get(SEED_HEADER)
        if seed is not None and settings.allow_seed_header:
            return np.random.default_rng(int(seed))
        return np.random.default_rng()

    @app.get("/health")
    def health() -> dict:
        return {"ok": True}

    @app.post("/keywords")
    async def keywords(
        image: UploadFile | None = File(default=None),
        text: str | None = Form(default=None),
        user_keywords: str | None = Form(default=None),
    ) -> dict:
        image_bytes = await image.read() if image is not None else None
        if image_bytes is not None and len(image_bytes) > settings.max_image_bytes:
            raise HTTPException(413, "image exceeds size limit")
        user_words = [w.strip() for w in user_keywords.split(",")] if user_keywords else None
        if image_bytes is None and not text and not user_words:
            raise HTTPException(400, "provide an image, a text note, or keywords")
        try:
            result = llm.extract_keywords(
                image=image_bytes,
                text=text,
                user_keywords=user_words,
                provider=provider,
                temperature=settings.llm.temperature,
            )
        except llm.ImageTooLarge:
            raise HTTPException(413, "image exceeds size limit")
        except (llm.UpstreamLLMError, llm.EmptyResponse) as err:
            raise HTTPException(502, str(err))
        return {
            "keywords": [
                {"keyword": kw, "origin": origin}
                for kw, origin in zip(result.keywords, result.origins)
            ]
        }

    @app.post("/chords")
    def chords(body: ChordsRequest, request: Request) -> dict:
        if body.bars not in (3, 4):
            raise HTTPException(400, "bars must be 3 or 4")
        if body.mode not in MODES:
            raise HTTPException(400, f"mode must be one of {sorted(MODES)}")
        try:
            key = parse_key(body.key)
        except (ParseError, ValueError) as err:
            raise HTTPException(400, f"invalid key: {err}")
        if not body.keywords:
            raise HTTPException(400, "keywords must be non-empty")
        keyword_set = llm.KeywordSet.from_words(body.keywords, user_words=set(body.keywords))

        try:
            result = sampler.generate_suggestions(
                keyword_set,
                key,
                parse_mode(body.mode),
                body.bars,
                app.state.deps,
                _request_rng(request),
            )
        except llm.UpstreamLLMError as err:
            raise HTTPException(502, str(err))
        except llm.AllCandidatesMalformed as err:
            raise HTTPException(500, str(err))

        audit_id = audits.write(result)
        return {
            "suggestions": [
                {"chords": list(p.tokens()), "provenance": tag}
                for p, tag in zip(result.suggestions, result.provenance)
            ],
            "audit_id": audit_id,
        }

    @app.post("/transcribe")
    def transcribe(body: TranscribeRequest) -> dict:
        if not body.audio_url and not body.file_id:
            raise HTTPException(400, "provide audio_url or file_id")
        if not 0 <= body.start_s < body.end_s:
            raise HTTPException(400, "need 0 <= start_s < end_s")
        if body.end_s - body.start_s > MAX_SEGMENT_SECONDS:
            raise HTTPException(400, f"segment longer than {MAX_SEGMENT_SECONDS:.0f} s")
        if transcriber is None:
            raise HTTPException(501, "no transcription provider configured")
        try:
            result = transcriber.transcribe(
                body.audio_url or body.file_id, body.start_s, body.end_s
            )
        except TranscriptionError as err:
            raise HTTPException(502, str(err))

        converted = None
        if body.convert_to_key:
            try:
                target = parse_key(body.convert_to_key)
            except (ParseError, ValueError) as err:
                raise HTTPException(400, f"invalid convert_to_key: {err}")
            converted = [
                {"symbol": t.symbol, "start_s": t.start_s, "end_s": t.end_s}
                for t in convert_to_key(result, target)
            ]
        return {
            "detected_key": {
                "root": result.detected_root.render(),
                "mode": result.detected_mode.render(),
            },
            "chords": [
                {"symbol": t.symbol, "start_s": t.start_s, "end_s": t.end_s}
                for t in result.chords
            ],
            "converted": converted,
        }

    return app
