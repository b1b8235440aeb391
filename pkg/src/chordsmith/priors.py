"""Autoregressive priors over chord-token sequences.

Two implementations share one scoring/sampling protocol:

* :class:`PriorModel` wraps a stacked-LSTM next-token model (the trainable
  prior used in production, in both the human-corpus "prior" role and the
  generated-corpus "proposal" role).
* :class:`TablePrior` is an exact lookup-table model whose chain
  probabilities are fully specified; it exists for calibration experiments
  and as an oracle in tests.

Scoring is the sum over steps of ``log softmax(logits / temperature)`` at
the realized next token, so ``temperature=1`` recovers the trained
distribution and larger values flatten it.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .chords import Key, Mode, Progression, parse_key, parse_mode, parse_progression
from .corpus import BOS_ID, EOS_ID, PAD_ID, UNK_ID, DatasetSplit, TokenVocab

__all__ = [
    "DivergenceError",
    "VocabMismatch",
    "SamplingExhausted",
    "VersionMismatch",
    "CorruptArtifactError",
    "ModelConfig",
    "PRIOR_CONFIG",
    "PROPOSAL_CONFIG",
    "ROLES",
    "PriorModel",
    "TablePrior",
    "TrainReport",
    "train",
    "evaluate_nll",
    "batch_nll",
    "save",
    "load",
]

ROLES = ("prior", "proposal")

ARTIFACT_FORMAT_VERSION = 1

MAX_SAMPLE_ATTEMPTS = 100


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


class VocabMismatch(ValueError):
    """Sequence ids or a vocabulary do not match the model's vocabulary."""


class SamplingExhausted(RuntimeError):
    """No sample of the requested length within the attempt budget."""


class VersionMismatch(ValueError):
    """Artifact format or vocabulary version differs from what was expected."""


class CorruptArtifactError(ValueError):
    """Artifact checksum does not match its weight payload."""


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 2
    embed_dim: int = 512
    hidden_dim: int = 512
    dropout: float = 0.2
    learning_rate: float = 1e-5
    max_epochs: int = 200
    batch_size: int = 64
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.layers < 1 or self.embed_dim < 1 or self.hidden_dim < 1:
            raise ValueError("layers and dims must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.learning_rate <= 0 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("bad optimizer settings")


# Reference configurations for the two roles: the human-corpus prior uses
# 512-dim embeddings/hidden states, the generated-corpus proposal 256.
PRIOR_CONFIG = ModelConfig(layers=2, embed_dim=512, hidden_dim=512)
PROPOSAL_CONFIG = ModelConfig(layers=2, embed_dim=256, hidden_dim=256)


class _ChordLstm(nn.Module):
    def __init__(self, vocab_size: int, cfg: ModelConfig):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, cfg.embed_dim, padding_idx=PAD_ID)
        self.lstm = nn.LSTM(
            cfg.embed_dim,
            cfg.hidden_dim,
            num_layers=cfg.layers,
            batch_first=True,
            dropout=cfg.dropout if cfg.layers > 1 else 0.0,
        )
        self.proj = nn.Linear(cfg.hidden_dim, vocab_size)

    def forward(self, ids: torch.Tensor, state=None):
        out, state = self.lstm(self.embed(ids), state)
        return self.proj(out), state


def _pad_batch(seqs: Sequence[Sequence[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    """Inputs (all but last id) and targets (all but first), PAD-padded."""
    width = max(len(s) for s in seqs) - 1
    inputs = torch.full((len(seqs), width), PAD_ID, dtype=torch.long)
    targets = torch.full((len(seqs), width), PAD_ID, dtype=torch.long)
    for row, seq in enumerate(seqs):
        t = torch.as_tensor(seq, dtype=torch.long)
        inputs[row, : len(seq) - 1] = t[:-1]
        targets[row, : len(seq) - 1] = t[1:]
    return inputs, targets


def batch_nll(net: nn.Module, seqs: Sequence[Sequence[int]]) -> tuple[torch.Tensor, int]:
    """Summed next-token negative log-likelihood and the target-token count."""
    inputs, targets = _pad_batch(seqs)
    logits, _ = net(inputs)
    loss = nn.functional.cross_entropy(
        logits.reshape(-1, logits.shape[-1]),
        targets.reshape(-1),
        ignore_index=PAD_ID,
        reduction="sum",
    )
    return loss, int((targets != PAD_ID).sum())


@dataclass
class TrainReport:
    epochs_run: int
    train_nll: float
    validation_nll: float
    wall_time_s: float


class PriorModel:
    """A trained (or trainable) LSTM next-token model over chord tokens."""

    def __init__(self, config: ModelConfig, vocab: TokenVocab, role: str, net: nn.Module | None = None):
        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        self.config = config
        self.vocab = vocab
        self.role = role
        if net is None:
            torch.manual_seed(config.seed)
            net = _ChordLstm(len(vocab), config)
        self.net = net
        self.net.eval()

    def _check_ids(self, ids: Sequence[int]) -> None:
        if len(ids) < 2 or ids[0] != BOS_ID or ids[-1] != EOS_ID:
            raise VocabMismatch("sequence must start with BOS and end with EOS")
        if any(i < 0 or i >= len(self.vocab) for i in ids):
            raise VocabMismatch("sequence references ids outside the vocabulary")

    def step_distributions(self, ids: Sequence[int], temperature: float = 1.0) -> np.ndarray:
        """Next-token probability matrix, one row per decoding step."""
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        self._check_ids(ids)
        self.net.eval()
        with torch.no_grad():
            inputs = torch.as_tensor(ids[:-1], dtype=torch.long).unsqueeze(0)
            logits, _ = self.net(inputs)
            probs = torch.softmax(logits[0] / temperature, dim=-1)
        return probs.numpy()

    def log_prob(self, ids: Sequence[int], temperature: float = 1.0) -> float:
        """Total log-probability of an encoded BOS...EOS sequence."""
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        self._check_ids(ids)
        self.net.eval()
        with torch.no_grad():
            inputs = torch.as_tensor(ids[:-1], dtype=torch.long).unsqueeze(0)
            targets = torch.as_tensor(ids[1:], dtype=torch.long)
            logits, _ = self.net(inputs)
            steps = torch.log_softmax(logits[0] / temperature, dim=-1)
            total = steps.gather(1, targets.unsqueeze(1)).sum()
        return float(total)

    def sequence_log_prob(self, p: Progression, temperature: float = 1.0) -> float:
        from .corpus import encode

        return self.log_prob(encode(p, self.vocab), temperature)

    def sample(
        self,
        bars: int,
        rng: np.random.Generator,
        temperature: float = 1.0,
        key: Key | None = None,
        mode: Mode | None = None,
    ) -> Progression:
        """Ancestral sample with exactly ``bars`` chord tokens.

        Reserved tokens are masked out (EOS stays available as a terminator);
        a draw that emits EOS before ``bars`` tokens is discarded and
        resampled, up to :data:`MAX_SAMPLE_ATTEMPTS` attempts.
        """
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        mask = torch.zeros(len(self.vocab))
        mask[[PAD_ID, BOS_ID, UNK_ID]] = float("-inf")
        self.net.eval()
        with torch.no_grad():
            for _ in range(MAX_SAMPLE_ATTEMPTS):
                tokens: list[str] = []
                state = None
                last = BOS_ID
                for _step in range(bars):
                    inputs = torch.tensor([[last]], dtype=torch.long)
                    logits, state = self.net(inputs, state)
                    probs = torch.softmax(logits[0, 0] / temperature + mask, dim=-1).numpy().astype(np.float64)
                    last = int(rng.choice(len(probs), p=probs / probs.sum()))
                    if last == EOS_ID:
                        break
                    tokens.append(self.vocab.token_of(last))
                if len(tokens) == bars:
                    key = key or parse_key("C")
                    mode = mode or parse_mode("Maj")
                    return parse_progression(" ".join(tokens), key, mode)
        raise SamplingExhausted(f"no {bars}-bar sample in {MAX_SAMPLE_ATTEMPTS} attempts")


def train(
    split: DatasetSplit,
    config: ModelConfig,
    vocab: TokenVocab,
    role: str = "prior",
) -> tuple[PriorModel, TrainReport]:
    """Fit an LSTM prior by next-token cross-entropy with early stopping.

    Stops when validation NLL has not improved for ``config.patience``
    epochs and restores the best weights seen. Fully reproducible from
    ``config.seed``. Raises :class:`DivergenceError` if the loss becomes
    non-finite.
    """
    if not split.train:
        raise ValueError("training split is empty")
    start = time.perf_counter()
    torch.manual_seed(config.seed)
    net = _ChordLstm(len(vocab), config)
    opt = torch.optim.Adam(net.parameters(), lr=config.learning_rate)
    shuffle_rng = np.random.default_rng(config.seed)
    # Small corpora may not leave a holdout; fall back to the training set
    # so early stopping still has a signal.
    val_seqs = split.validation or split.train

    best_val = math.inf
    best_state = {k: v.clone() for k, v in net.state_dict().items()}
    bad_epochs = 0
    epochs_run = 0
    train_nll = math.inf

    for epoch in range(config.max_epochs):
        epochs_run = epoch + 1
        net.train()
        order = shuffle_rng.permutation(len(split.train))
        total_loss, total_count = 0.0, 0
        for lo in range(0, len(order), config.batch_size):
            batch = [split.train[i] for i in order[lo: lo + config.batch_size]]
            loss, count = batch_nll(net, batch)
            if not torch.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epochs_run}")
            opt.zero_grad()
            (loss / count).backward()
            opt.step()
            total_loss += loss.item()
            total_count += count
        train_nll = total_loss / total_count

        val_nll = evaluate_nll(net, val_seqs)
        if not math.isfinite(val_nll):
            raise DivergenceError(f"non-finite validation NLL at epoch {epochs_run}")
        if val_nll < best_val:
            best_val = val_nll
            best_state = {k: v.clone() for k, v in net.state_dict().items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                break

    net.load_state_dict(best_state)
    net.eval()
    report = TrainReport(
        epochs_run=epochs_run,
        train_nll=train_nll,
        validation_nll=best_val,
        wall_time_s=time.perf_counter() - start,
    )
    return PriorModel(config, vocab, role, net=net), report


def evaluate_nll(net: nn.Module, seqs: Sequence[Sequence[int]]) -> float:
    """Per-token NLL of ``seqs`` under ``net`` (no gradient)."""
    net.eval()
    with torch.no_grad():
        loss, count = batch_nll(net, seqs)
    return float(loss) / count


def _weights_checksum(state: dict) -> str:
    digest = hashlib.sha256()
    for name in sorted(state):
        tensor = state[name].detach().cpu().contiguous()
        digest.update(name.encode())
        digest.update(str(tuple(tensor.shape)).encode())
        digest.update(str(tensor.dtype).encode())
        digest.update(tensor.numpy().tobytes())
    return digest.hexdigest()


def save(model: PriorModel, path: str | Path) -> None:
    """Write a self-contained artifact: header, vocabulary, and weights."""
    state = model.net.state_dict()
    payload = {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "role": model.role,
        "config": asdict(model.config),
        "vocab": model.vocab.to_dict(),
        "vocab_version": model.vocab.version,
        "checksum": _weights_checksum(state),
        "state": state,
    }
    torch.save(payload, path)


def load(path: str | Path, expect_vocab: TokenVocab | None = None) -> PriorModel:
    """Load an artifact, verifying checksum and (optionally) vocab version."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("format_version") != ARTIFACT_FORMAT_VERSION:
        raise VersionMismatch(f"unsupported artifact format {payload.get('format_version')!r}")
    if _weights_checksum(payload["state"]) != payload["checksum"]:
        raise CorruptArtifactError(f"{path}: weight checksum mismatch")
    vocab = TokenVocab.from_dict(payload["vocab"])
    if vocab.version != payload["vocab_version"]:
        raise CorruptArtifactError(f"{path}: vocab version stamp mismatch")
    if expect_vocab is not None and expect_vocab.version != vocab.version:
        raise VersionMismatch(
            f"artifact vocab {vocab.version} != expected {expect_vocab.version}"
        )
    config = ModelConfig(**payload["config"])
    model = PriorModel(config, vocab, payload["role"])
    model.net.load_state_dict(payload["state"])
    model.net.eval()
    return model


class TablePrior:
    """Exact autoregressive model defined by per-prefix conditional tables.

    ``table`` maps a prefix of chord tokens (the empty tuple at the start)
    to the conditional distribution over the next token, where the EOS
    terminator appears under the name ``"EOS"``. Temperature reweights each
    conditional as ``p ** (1/t)`` renormalized, matching the softmax
    semantics of the LSTM prior.
    """

    def __init__(self, vocab: TokenVocab, table: dict[tuple[str, ...], dict[str, float]]):
        self.vocab = vocab
        self.table = table

    @staticmethod
    def from_sequence_probs(seq_probs: dict[tuple[str, ...], float], vocab: TokenVocab) -> "TablePrior":
        """Chain-factorize an explicit distribution over whole sequences."""
        total = sum(seq_probs.values())
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"sequence probabilities sum to {total}, not 1")
        table: dict[tuple[str, ...], dict[str, float]] = {}

        def mass(prefix: tuple[str, ...]) -> float:
            return sum(p for seq, p in seq_probs.items() if seq[: len(prefix)] == prefix)

        prefixes = {seq[:i] for seq in seq_probs for i in range(len(seq) + 1)}
        for prefix in prefixes:
            m = mass(prefix)
            dist: dict[str, float] = {}
            terminal = seq_probs.get(prefix, 0.0)
            if terminal:
                dist["EOS"] = terminal / m
            nexts = {seq[len(prefix)] for seq in seq_probs if len(seq) > len(prefix) and seq[: len(prefix)] == prefix}
            for tok in sorted(nexts):
                dist[tok] = mass(prefix + (tok,)) / m
            table[prefix] = dist
        return TablePrior(vocab, table)

    def _conditional(self, prefix: tuple[str, ...], temperature: float) -> dict[str, float]:
        dist = self.table.get(prefix)
        if dist is None:
            return {}
        if temperature == 1.0:
            return dist
        weights = {k: p ** (1.0 / temperature) for k, p in dist.items() if p > 0}
        z = sum(weights.values())
        return {k: w / z for k, w in weights.items()}

    def log_prob(self, ids: Sequence[int], temperature: float = 1.0) -> float:
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        if len(ids) < 2 or ids[0] != BOS_ID or ids[-1] != EOS_ID:
            raise VocabMismatch("sequence must start with BOS and end with EOS")
        if any(i < 0 or i >= len(self.vocab) for i in ids):
            raise VocabMismatch("sequence references ids outside the vocabulary")
        names = ["EOS" if i == EOS_ID else self.vocab.token_of(i) for i in ids[1:]]
        prefix: tuple[str, ...] = ()
        total = 0.0
        for name in names:
            p = self._conditional(prefix, temperature).get(name, 0.0)
            if p <= 0:
                return float("-inf")
            total += math.log(p)
            if name != "EOS":
                prefix = prefix + (name,)
        return total

    def sequence_log_prob(self, p: Progression, temperature: float = 1.0) -> float:
        from .corpus import encode

        return self.log_prob(encode(p, self.vocab), temperature)

    def sample(
        self,
        bars: int,
        rng: np.random.Generator,
        temperature: float = 1.0,
        key: Key | None = None,
        mode: Mode | None = None,
    ) -> Progression:
        for _ in range(MAX_SAMPLE_ATTEMPTS):
            prefix: tuple[str, ...] = ()
            ended = False
            for _step in range(bars):
                dist = self._conditional(prefix, temperature)
                if not dist:
                    ended = True
                    break
                names = sorted(dist)
                probs = np.asarray([dist[n] for n in names], dtype=np.float64)
                drawn = names[int(rng.choice(len(names), p=probs / probs.sum()))]
                if drawn == "EOS":
                    ended = True
                    break
                prefix = prefix + (drawn,)
            if not ended and len(prefix) == bars:
                key = key or parse_key("C")
                mode = mode or parse_mode("Maj")
                return parse_progression(" ".join(prefix), key, mode)
        raise SamplingExhausted(f"no {bars}-bar sample in {MAX_SAMPLE_ATTEMPTS} attempts")
