"""Runtime configuration for the HTTP service and CLI composition."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .assets import asset_path
from .llm import LLMProviderConfig, MAX_IMAGE_BYTES

__all__ = ["Settings"]


@dataclass
class Settings:
    """Composition-root settings: providers, model artifacts, storage.

    The defaults point at the packaged desk-scale artifacts and fixtures, so
    a bare ``Settings()`` runs fully offline.
    """

    llm_provider: str = "mock"  # "mock" | "openai"
    fixture_dir: Path = field(default_factory=lambda: asset_path("fixtures"))
    prior_model_path: Path = field(default_factory=lambda: asset_path("models", "prior.pt"))
    proposal_model_path: Path = field(default_factory=lambda: asset_path("models", "proposal.pt"))
    sampler_config_path: Path | None = None  # None -> shipped defaults
    transcription_provider: str = "mock"  # "mock" | "none"
    transcription_fixture: Path = field(
        default_factory=lambda: asset_path("fixtures", "transcription_default.json")
    )
    data_dir: Path = field(default_factory=lambda: Path("chordsmith_data"))
    allow_seed_header: bool = False
    max_image_bytes: int = MAX_IMAGE_BYTES
    audit_retention_days: int = 7
    llm: LLMProviderConfig = field(default_factory=LLMProviderConfig)

    def api_key(self) -> str:
        key = os.environ.get(self.llm.api_key_env, "")
        if not key and self.llm_provider == "openai":
            raise RuntimeError(f"set {self.llm.api_key_env} to use the live provider")
        return key

    @staticmethod
    def from_dict(obj: dict) -> "Settings":
        llm = LLMProviderConfig(**obj.pop("llm", {}))
        paths = {
            k: Path(v)
            for k, v in obj.items()
            if k.endswith(("_dir", "_path", "_fixture")) and v is not None
        }
        rest = {k: v for k, v in obj.items() if k not in paths}
        return Settings(llm=llm, **paths, **rest)

    @staticmethod
    def load(path: str | Path) -> "Settings":
        with open(path, encoding="utf-8") as fh:
            return Settings.from_dict(json.load(fh))
