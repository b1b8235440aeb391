"""Shared fixtures: tiny corpora, vocabularies, and fixture directories."""

from __future__ import annotations

import numpy as np
import pytest

from chordsmith import deskdata
from chordsmith.corpus import build_vocab, normalize_to_c


@pytest.fixture(scope="session")
def desk_corpus():
    rng = np.random.default_rng(1234)
    return normalize_to_c(deskdata.synthetic_human_corpus(400, rng))


@pytest.fixture(scope="session")
def desk_llm_corpus():
    rng = np.random.default_rng(4321)
    return deskdata.synthetic_llm_corpus(400, rng)


@pytest.fixture(scope="session")
def desk_vocab(desk_corpus, desk_llm_corpus):
    return build_vocab(desk_corpus + desk_llm_corpus)
