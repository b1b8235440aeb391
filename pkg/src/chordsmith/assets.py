"""Access to packaged data files: prompt templates, keyword list, fixtures."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def asset_path(*parts: str) -> Path:
    return Path(resources.files("chordsmith").joinpath("assets", *parts))  # type: ignore[arg-type]


def read_asset_text(*parts: str) -> str:
    return asset_path(*parts).read_text(encoding="utf-8")


def load_keyword_list() -> list[str]:
    """Flat list of music keywords from the shipped keyword file."""
    out: list[str] = []
    for line in read_asset_text("keyword_list.txt").splitlines():
        _, _, items = line.partition(":")
        out.extend(kw.strip() for kw in items.split(",") if kw.strip())
    return out


def keyword_list_block() -> str:
    """The keyword file exactly as injected into the extraction prompt."""
    return read_asset_text("keyword_list.txt").rstrip("\n")
