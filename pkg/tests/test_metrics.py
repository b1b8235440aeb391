"""Metric correctness: Self-BLEU behavior and JSD against an independent oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import jensenshannon

from chordsmith.chords import parse_key, parse_mode, parse_progression
from chordsmith.metrics import NGramDistribution, OrderMismatch, bleu, jsd, self_bleu

KEY_C, MAJ = parse_key("C"), parse_mode("Maj")


def _progs(*lines):
    return [parse_progression(line, KEY_C, MAJ) for line in lines]


def _dist(counts: dict, order=1):
    counts = {k if isinstance(k, tuple) else (k,): v for k, v in counts.items()}
    return NGramDistribution(order=order, counts=counts, total=sum(counts.values()))


class TestJsd:
    def test_identical_is_zero(self):
        a = _dist({"C": 3, "G": 1})
        assert jsd(a, a) == 0.0

    def test_disjoint_is_one(self):
        assert jsd(_dist({"C": 5}), _dist({"G": 7})) == 1.0

    def test_hand_computed_value(self):
        # a = {C: 1}, b = {C: 1/2, G: 1/2}: 0.5*1*log2(1/0.75)
        #   + 0.5*(0.5*log2(0.5/0.75) + 0.5*log2(0.5/0.25))
        a = _dist({"C": 2})
        b = _dist({"C": 1, "G": 1})
        expected = 0.5 * math.log2(1 / 0.75) + 0.5 * (
            0.5 * math.log2(0.5 / 0.75) + 0.5 * math.log2(0.5 / 0.25)
        )
        assert jsd(a, b) == pytest.approx(expected, abs=1e-12)
        assert jsd(a, b) == pytest.approx(0.3113, abs=5e-5)

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatch):
            jsd(_dist({"C": 1}), _dist({("C", "G"): 1}, order=2))

    def test_matches_scipy_on_random_histograms(self):
        rng = np.random.default_rng(0)
        support = [f"t{i}" for i in range(12)]
        for _ in range(1000):
            a_counts = {tok: int(n) for tok, n in zip(support, rng.integers(0, 20, 12)) if n}
            b_counts = {tok: int(n) for tok, n in zip(support, rng.integers(0, 20, 12)) if n}
            if not a_counts or not b_counts:
                continue
            a, b = _dist(a_counts), _dist(b_counts)
            grams = sorted(set(a.counts) | set(b.counts))
            pa = np.array([a.prob(g) for g in grams])
            pb = np.array([b.prob(g) for g in grams])
            oracle = jensenshannon(pa, pb, base=2) ** 2
            assert jsd(a, b) == pytest.approx(oracle, abs=1e-12)
            assert jsd(a, b) == pytest.approx(jsd(b, a), abs=1e-15)
            assert 0.0 <= jsd(a, b) <= 1.0


class TestBleu:
    def test_perfect_match(self):
        assert bleu(["C", "Am", "F", "G"], [["C", "Am", "F", "G"]]) == 1.0

    def test_disjoint_tokens_floor(self):
        assert bleu(["C", "Am"], [["F", "G"]]) < 1e-8

    def test_brevity_penalty(self):
        score = bleu(["C", "Am"], [["C", "Am", "F", "G"]])
        assert score == pytest.approx(math.exp(1 - 4 / 2) * math.exp(
            (math.log(1.0) + math.log(1.0)) / 2
        ))

    def test_short_hypothesis_caps_order(self):
        # a 3-token hypothesis is scored on orders 1..3 only
        assert bleu(["C", "Am", "F"], [["C", "Am", "F"]], max_n=4) == 1.0


class TestSelfBleu:
    def test_identical_set_scores_one(self):
        assert self_bleu(_progs(*["C Am F G"] * 30)) == 1.0

    def test_disjoint_sets_hit_smoothing_floor(self):
        lines = ["C C C C", "Dm Dm Dm Dm", "Em Em Em Em", "F F F F",
                 "G G G G", "Am Am Am Am", "Bdim Bdim Bdim Bdim",
                 "C7 C7 C7 C7", "D7 D7 D7 D7", "E7 E7 E7 E7"]
        assert self_bleu(_progs(*lines)) < 0.01

    def test_needs_two_items(self):
        with pytest.raises(ValueError):
            self_bleu(_progs("C Am F G"))

    def test_accepts_token_sequences(self):
        assert self_bleu([("C", "G"), ("C", "G")]) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(
            st.lists(st.sampled_from(["C", "Dm", "Em", "F", "G", "Am"]), min_size=4, max_size=4),
            min_size=2,
            max_size=8,
        ),
        st.randoms(),
    )
    def test_order_invariance(self, seqs, rnd):
        shuffled = list(seqs)
        rnd.shuffle(shuffled)
        assert self_bleu(shuffled) == pytest.approx(self_bleu(seqs), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(
            st.lists(st.sampled_from(["C", "Dm", "Em", "F", "G", "Am"]), min_size=4, max_size=4),
            min_size=2,
            max_size=8,
        ),
        st.data(),
    )
    def test_duplicate_never_decreases_score(self, seqs, data):
        duplicated = seqs + [seqs[data.draw(st.integers(0, len(seqs) - 1))]]
        assert self_bleu(duplicated) >= self_bleu(seqs) - 1e-12
