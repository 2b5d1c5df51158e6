"""Top-p (nucleus) sampling and a seeded character n-gram language model.

The LM is a desk-scale generator: additive-smoothed counts over unicode
scalars with stupid backoff from the longest known context suffix down to
the unigram distribution.  Generation quality is not the point; the model
exists so sampling-parameter sweeps produce measurable, reproducible trends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corpus import Corpus, Document
from .errors import ValidationError

EOT = "<eot>"  # end-of-text marker; multi-char, so it cannot collide with a scalar token


@dataclass
class NgramLM:
    order: int
    counts: dict[tuple[str, ...], dict[str, int]] = field(repr=False)
    vocab: tuple[str, ...]
    smoothing: float = 0.1
    _token_index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 2 <= self.order <= 6:
            raise ValidationError(f"order must be in [2, 6], got {self.order}")
        if self.smoothing < 0:
            raise ValidationError(f"smoothing must be >= 0, got {self.smoothing}")
        if EOT not in self.vocab:
            raise ValidationError("vocab must include the end-of-text marker")
        self._token_index = {tok: i for i, tok in enumerate(self.vocab)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)


@dataclass
class SamplingConfig:
    p: float
    max_tokens: int
    seed: object = 0  # anything np.random.default_rng accepts
    prompt: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValidationError(f"p must be in (0, 1], got {self.p}")
        if self.max_tokens < 1:
            raise ValidationError(f"max_tokens must be >= 1, got {self.max_tokens}")
        self.prompt = tuple(self.prompt)


@dataclass
class Distribution:
    tokens: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.shape != (len(self.tokens),):
            raise ValidationError("probs must align with tokens")
        if np.any(self.probs < 0):
            raise ValidationError("probabilities must be nonnegative")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"probabilities sum to {float(self.probs.sum())}")

    def prob(self, token: str) -> float:
        try:
            return float(self.probs[self.tokens.index(token)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict[str, float]:
        return {tok: float(p) for tok, p in zip(self.tokens, self.probs)}


def fit_char_lm(corpus: Corpus, order: int = 4, smoothing: float = 0.1) -> NgramLM:
    """Count continuations for every context length 0..order-1 per document.

    Tokens are unicode scalars of each document's effective text, with an
    end-of-text marker appended per document.  Deterministic given corpus
    order.
    """
    if not 2 <= order <= 6:
        raise ValidationError(f"order must be in [2, 6], got {order}")
    texts = [doc.effective_text() for doc in corpus]
    if not texts or all(not t for t in texts):
        raise ValidationError("cannot fit a language model on an empty corpus")
    counts: dict[tuple[str, ...], dict[str, int]] = {}
    chars: set[str] = set()
    for text in texts:
        if not text:
            continue
        chars.update(text)
        tokens = list(text) + [EOT]
        for i, tok in enumerate(tokens):
            for length in range(min(i, order - 1) + 1):
                ctx = tuple(tokens[i - length : i])
                bucket = counts.setdefault(ctx, {})
                bucket[tok] = bucket.get(tok, 0) + 1
    vocab = tuple(sorted(chars)) + (EOT,)
    return NgramLM(order=order, counts=counts, vocab=vocab, smoothing=smoothing)


def _dense_probs(lm: NgramLM, context) -> np.ndarray:
    """Smoothed conditional over the vocab from the longest known context suffix."""
    v = lm.vocab_size
    max_len = min(len(context), lm.order - 1)
    for length in range(max_len, -1, -1):
        ctx = tuple(context[len(context) - length :])
        bucket = lm.counts.get(ctx)
        if bucket is not None:
            alpha = lm.smoothing
            probs = np.full(v, alpha, dtype=np.float64)
            total = 0
            index = lm._token_index
            for tok, cnt in bucket.items():
                probs[index[tok]] += cnt
                total += cnt
            return probs / (total + alpha * v)
    return np.full(v, 1.0 / v, dtype=np.float64)


def next_distribution(lm: NgramLM, context) -> Distribution:
    """Next-token distribution given a context token sequence."""
    return Distribution(tokens=lm.vocab, probs=_dense_probs(lm, tuple(context)))


def top_p_filter(dist: Distribution, p: float) -> Distribution:
    """Keep the smallest probability-sorted prefix with cumulative mass >= p.

    Ties are broken by token position, and the crossing token is included.
    The kept mass is renormalized to 1.
    """
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"p must be in (0, 1], got {p}")
    order = kernels.nucleus_order(dist.probs)
    sorted_probs = dist.probs[order]
    cut = kernels.nucleus_cutoff(sorted_probs, p)
    kept = order[: cut + 1]
    mass = float(np.cumsum(sorted_probs)[cut])
    return Distribution(
        tokens=tuple(dist.tokens[i] for i in kept),
        probs=dist.probs[kept] / mass,
    )


def generate(lm: NgramLM, cfg: SamplingConfig) -> tuple[str, ...]:
    """Autoregressive nucleus sampling; returns generated tokens only.

    The prompt conditions the first draws but is not part of the output.
    Stops at the end-of-text marker or after max_tokens draws.  Deterministic
    given cfg.seed.
    """
    rng = np.random.default_rng(cfg.seed)
    eot_id = lm._token_index[EOT]
    context = list(cfg.prompt)
    out: list[str] = []
    window = lm.order - 1
    for _ in range(cfg.max_tokens):
        probs = _dense_probs(lm, context[-window:] if window else ())
        token_id = kernels.nucleus_sample(probs, cfg.p, rng.random())
        if token_id == eot_id:
            break
        token = lm.vocab[token_id]
        out.append(token)
        context.append(token)
    return tuple(out)


def generate_corpus(
    lm: NgramLM,
    p: float,
    n: int,
    max_tokens: int = 128,
    seed: int = 0,
    prompt: tuple[str, ...] = (),
    name: str = "",
) -> Corpus:
    """Generate n documents; sequence i owns the stream seeded by (seed, i)."""
    source = f"generated-p{p:.2f}"
    docs = []
    for i in range(n):
        cfg = SamplingConfig(p=p, max_tokens=max_tokens, seed=[seed, i], prompt=prompt)
        tokens = generate(lm, cfg)
        docs.append(
            Document(id=f"gen-p{p:.2f}-{i:04d}", raw_text="".join(tokens), source=source)
        )
    return Corpus(docs, name=name or source)
