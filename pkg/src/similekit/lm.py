"""Language-model contracts: perplexity scoring, top-k generation, fine-tuning.

Three capabilities, each behind a small protocol so neural backends can attach
out of process, plus deterministic in-process reference implementations:

* scorer: `token_logprobs(tokens) -> [logp, ...]` (or a direct `perplexity`
  method for remote scorers).  Reference: interpolated word-bigram model with
  add-alpha smoothing.
* seq2seq model: `next_token_distribution(src_tokens, out_tokens) -> {token:
  prob}`.  Reference: a template n-gram model that learns how many terminal
  words a source drops and what suffixes replace them, conditioned on the
  dropped cue word.
* trainer backend: `fine_tune(pairs, cfg) -> model`.

Decoding is seeded per call from (seed, source, forced_prefix) so batch order
and process boundaries never change an output.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import re
from collections import Counter
from dataclasses import asdict, dataclass

from .backends import BackendUnavailable, JsonSubprocessBackend
from .core import EOS_TOKEN, append_token, tokenize


class EmptyText(ValueError):
    """Perplexity is undefined for a text with no tokens."""


class EmptyTrainingSet(ValueError):
    """fine_tune needs at least one (source, target) pair."""


@dataclass(frozen=True)
class GenerationConfig:
    max_new_tokens: int
    seed: int
    top_k: int = 5
    temperature: float = 0.7
    forced_prefix: str | None = None

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    epochs: int = 17
    batch_token_budget: int = 1024

    def __post_init__(self):
        if self.epochs < 1 or self.batch_token_budget < 1:
            raise ValueError("epochs and batch_token_budget must be positive")


@dataclass(frozen=True)
class GenerationOutput:
    """Decoded text; truncated marks max_new_tokens running out before EOS."""

    text: str
    truncated: bool = False


# ---------------------------------------------------------------------------
# Perplexity


def perplexity(text: str, scorer) -> float:
    """exp of mean negative log-likelihood per token; lower = more fluent."""
    if text is None or not tokenize(text):
        raise EmptyText("cannot score an empty text")
    if hasattr(scorer, "perplexity"):
        return float(scorer.perplexity(text))
    logps = scorer.token_logprobs(tokenize(text))
    return math.exp(-sum(logps) / len(logps))


class UniformScorer:
    """Assigns every token probability 1/V; perplexity of any text is V."""

    def __init__(self, vocab_size: int):
        if vocab_size < 1:
            raise ValueError("vocab_size must be >= 1")
        self.vocab_size = vocab_size
        self._logp = -math.log(vocab_size)

    def token_logprobs(self, tokens: list[str]) -> list[float]:
        return [self._logp] * len(tokens)


class BigramScorer:
    """Interpolated word-bigram model with add-alpha smoothing.

    p(t|c) = lam * p_bigram(t|c) + (1-lam) * p_unigram(t), both add-alpha
    smoothed over a vocabulary that includes <unk>; out-of-vocabulary tokens
    map to <unk> so every text gets a finite score.
    """

    BOS = "<s>"
    UNK = "<unk>"

    def __init__(self, texts, alpha: float = 0.1, interpolation: float = 0.5):
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0 <= interpolation <= 1:
            raise ValueError("interpolation must be in [0, 1]")
        self.alpha = alpha
        self.lam = interpolation
        self.unigram: Counter = Counter()
        self.bigram: dict[str, Counter] = {}
        self.context_total: Counter = Counter()
        trained = False
        for text in texts:
            tokens = tokenize(text)
            if not tokens:
                continue
            trained = True
            prev = self.BOS
            for tok in tokens:
                self.unigram[tok] += 1
                self.bigram.setdefault(prev, Counter())[tok] += 1
                self.context_total[prev] += 1
                prev = tok
        if not trained:
            raise EmptyText("scorer needs at least one non-empty training text")
        self.vocab = set(self.unigram) | {self.UNK}
        self.vocab_size = len(self.vocab)
        self.total = sum(self.unigram.values())

    def token_logprobs(self, tokens: list[str]) -> list[float]:
        out = []
        prev = self.BOS
        for tok in tokens:
            t = tok if tok in self.vocab else self.UNK
            num = self.bigram.get(prev, Counter()).get(t, 0) + self.alpha
            den = self.context_total.get(prev, 0) + self.alpha * self.vocab_size
            p_bi = num / den
            p_uni = (self.unigram.get(t, 0) + self.alpha) / (
                self.total + self.alpha * self.vocab_size
            )
            out.append(math.log(self.lam * p_bi + (1 - self.lam) * p_uni))
            prev = t
        return out


# ---------------------------------------------------------------------------
# Generation


def _derive_rng(seed: int, source: str, forced_prefix: str | None) -> random.Random:
    # Hash-derived stream: the same (seed, input) pair samples identically no
    # matter what was generated before it or which process runs it.
    key = f"{seed}|{source}|{forced_prefix or ''}".encode("utf-8")
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))


def _sample(dist: dict[str, float], top_k: int, temperature: float, rng) -> str:
    items = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    if len(items) == 1:
        return items[0][0]
    # Rescale by the max before exponentiating so tiny temperatures stay finite.
    pmax = items[0][1]
    weights = [(p / pmax) ** (1.0 / temperature) for _, p in items]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for (tok, _), w in zip(items, weights):
        acc += w
        if r <= acc:
            return tok
    return items[-1][0]


def generate(source: str, cfg: GenerationConfig, model) -> GenerationOutput:
    """Autoregressive top-k decode; deterministic for fixed (source, cfg, model).

    With forced_prefix set, the output starts with that string verbatim and
    sampling continues after it.  Exhausting max_new_tokens before the end
    token returns the partial output flagged truncated.
    """
    if hasattr(model, "generate_text"):
        out = model.generate_text(source, cfg)
        if cfg.forced_prefix and not out.text.startswith(cfg.forced_prefix):
            raise BackendUnavailable("backend violated the forced-prefix contract")
        return out
    src_tokens = tokenize(source)
    if cfg.forced_prefix:
        out_text = cfg.forced_prefix
        out_tokens = tokenize(cfg.forced_prefix)
    else:
        out_text = ""
        out_tokens = []
    rng = _derive_rng(cfg.seed, source, cfg.forced_prefix)
    truncated = True
    for _ in range(cfg.max_new_tokens):
        dist = model.next_token_distribution(src_tokens, out_tokens)
        if not dist:
            truncated = False
            break
        token = _sample(dist, cfg.top_k, cfg.temperature, rng)
        if token == EOS_TOKEN:
            truncated = False
            break
        out_tokens.append(token)
        out_text = append_token(out_text, token)
    return GenerationOutput(text=out_text, truncated=truncated)


# ---------------------------------------------------------------------------
# Fine-tuning


def _pair_texts(pair) -> tuple[str, str]:
    if hasattr(pair, "source") and hasattr(pair, "target"):
        return (pair.source, pair.target)
    source, target = pair
    return (source, target)


def fine_tune(pairs, cfg: TrainConfig, backend):
    """Train a seq2seq model on (source, target) pairs via the given backend.

    Accepts ParallelPair-shaped objects or plain 2-tuples.
    """
    pair_list = [_pair_texts(p) for p in pairs]
    if not pair_list:
        raise EmptyTrainingSet("no training pairs")
    return backend.fine_tune(pair_list, cfg)


class ReferenceSeq2SeqBackend:
    """In-process trainer producing TemplateNgramModel instances."""

    def fine_tune(self, pairs: list[tuple[str, str]], cfg: TrainConfig):
        return TemplateNgramModel.train(pairs, cfg)


def _is_word(token: str) -> bool:
    return re.match(r"\w", token) is not None


def _last_word(tokens: list[str]) -> str:
    for tok in reversed(tokens):
        if _is_word(tok):
            return tok.lower()
    return ""


class _Trie:
    """Counted token trie over target suffixes, walked by longest context match."""

    __slots__ = ("root",)

    def __init__(self, suffix_counts: dict[str, int]):
        self.root: dict = {}
        for joined, count in suffix_counts.items():
            node = self.root
            for tok in joined.split(" "):
                entry = node.setdefault(tok, [0, {}])
                entry[0] += count
                node = entry[1]

    def next_counts(self, context: list[str]) -> dict[str, int] | None:
        """Counts at the deepest node whose root path is a suffix of context."""
        for depth in range(len(context), -1, -1):
            node = self.root
            ok = True
            for tok in context[len(context) - depth :]:
                if tok not in node:
                    ok = False
                    break
                node = node[tok][1]
            if ok and node:
                return {tok: entry[0] for tok, entry in node.items()}
        return None


class TemplateNgramModel:
    """Count-based conditional generator for (source, target) sentence pairs.

    Training observes, per pair, the longest common token prefix between
    source and target; it learns (a) how many terminal source words fall off
    (the mode over pairs), and (b) which target suffixes replace them, keyed
    by the dropped cue word.  Decoding copies the source minus its dropped
    words deterministically, then samples the continuation from the cue's
    suffix trie, backing off to a global trie, a target-side bigram model,
    and finally a unigram model.  Purely count-based, so training is
    deterministic; the TrainConfig is recorded for the model manifest.
    """

    def __init__(self, drop_words: int, cue_suffixes: dict[str, dict[str, int]],
                 global_suffixes: dict[str, int], bigram: dict[str, dict[str, int]],
                 unigram: dict[str, int], train_config: dict):
        self.drop_words = drop_words
        self.cue_suffixes = cue_suffixes
        self.global_suffixes = global_suffixes
        self.bigram = bigram
        self.unigram = unigram
        self.train_config = train_config
        self._cue_tries = {cue: _Trie(counts) for cue, counts in cue_suffixes.items()}
        self._global_trie = _Trie(global_suffixes)

    BOS = "<s>"

    @classmethod
    def train(cls, pairs: list[tuple[str, str]], cfg: TrainConfig) -> "TemplateNgramModel":
        if not pairs:
            raise EmptyTrainingSet("no training pairs")
        drop_counts: Counter = Counter()
        cue_suffixes: dict[str, dict[str, int]] = {}
        global_suffixes: dict[str, int] = {}
        bigram: dict[str, dict[str, int]] = {}
        unigram: dict[str, int] = {}
        for source, target in pairs:
            src = tokenize(source)
            tgt = tokenize(target)
            common = 0
            while common < len(src) and common < len(tgt) and src[common] == tgt[common]:
                common += 1
            dropped = sum(1 for tok in src[common:] if _is_word(tok))
            drop_counts[dropped] += 1
            suffix = " ".join(tgt[common:] + [EOS_TOKEN])
            cue = _last_word(src)
            bucket = cue_suffixes.setdefault(cue, {})
            bucket[suffix] = bucket.get(suffix, 0) + 1
            global_suffixes[suffix] = global_suffixes.get(suffix, 0) + 1
            prev = cls.BOS
            for tok in tgt + [EOS_TOKEN]:
                row = bigram.setdefault(prev, {})
                row[tok] = row.get(tok, 0) + 1
                unigram[tok] = unigram.get(tok, 0) + 1
                prev = tok
        # Mode of the per-pair drop counts; ties go to the smaller count.
        best = max(drop_counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
        return cls(best, cue_suffixes, global_suffixes, bigram, unigram,
                   train_config=asdict(cfg))

    def copy_region(self, src_tokens: list[str]) -> list[str]:
        """Source tokens minus trailing punctuation and drop_words final words."""
        toks = list(src_tokens)

        def trim():
            while toks and not _is_word(toks[-1]):
                toks.pop()

        trim()
        for _ in range(self.drop_words):
            if toks:
                toks.pop()
            trim()
        return toks

    def next_token_distribution(self, src_tokens: list[str], out_tokens: list[str]) -> dict[str, float]:
        copy = self.copy_region(src_tokens)
        n = len(out_tokens)
        if n < len(copy) and out_tokens == copy[:n]:
            return {copy[n]: 1.0}
        counts = None
        if n >= len(copy) and out_tokens[: len(copy)] == copy:
            # Continuation region: walk the cue trie, then the global trie.
            context = out_tokens[len(copy) :]
            cue = _last_word(src_tokens)
            trie = self._cue_tries.get(cue)
            if trie is not None:
                counts = trie.next_counts(context)
            if counts is None:
                counts = self._global_trie.next_counts(context)
        if counts is None:
            # Forced-prefix divergence or trie miss: sentence-level bigram.
            last = out_tokens[-1] if out_tokens else self.BOS
            counts = self.bigram.get(last) or self.unigram
        if not counts:
            return {EOS_TOKEN: 1.0}
        total = sum(counts.values())
        return {tok: c / total for tok, c in counts.items()}

    # Persistence: a directory with a manifest (config + seed) and the counts.

    def save(self, model_dir: str) -> None:
        os.makedirs(model_dir, exist_ok=True)
        manifest = {
            "type": "template-ngram",
            "version": 1,
            "train_config": self.train_config,
        }
        with open(os.path.join(model_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        state = {
            "drop_words": self.drop_words,
            "cue_suffixes": self.cue_suffixes,
            "global_suffixes": self.global_suffixes,
            "bigram": self.bigram,
            "unigram": self.unigram,
        }
        with open(os.path.join(model_dir, "model.json"), "w", encoding="utf-8") as fh:
            json.dump(state, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, model_dir: str) -> "TemplateNgramModel":
        with open(os.path.join(model_dir, "manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        if manifest.get("type") != "template-ngram":
            raise ValueError(f"not a template-ngram model dir: {model_dir}")
        with open(os.path.join(model_dir, "model.json"), encoding="utf-8") as fh:
            state = json.load(fh)
        return cls(
            drop_words=state["drop_words"],
            cue_suffixes=state["cue_suffixes"],
            global_suffixes=state["global_suffixes"],
            bigram=state["bigram"],
            unigram=state["unigram"],
            train_config=manifest.get("train_config", {}),
        )


# ---------------------------------------------------------------------------
# Remote adapters (JSON-over-subprocess; see backends module)


class RemoteScorer:
    """Scorer adapter: {op: "perplexity", text} -> {perplexity}."""

    def __init__(self, command: list[str]):
        self.backend = JsonSubprocessBackend(command)

    def perplexity(self, text: str) -> float:
        reply = self.backend.call({"op": "perplexity", "text": text})
        try:
            return float(reply["perplexity"])
        except (TypeError, KeyError, ValueError) as exc:
            raise BackendUnavailable(f"bad perplexity reply: {reply!r}") from exc


class RemoteModel:
    """Generator adapter: {op: "generate", model_id, source, config} -> {text, truncated}."""

    def __init__(self, command: list[str], model_id: str):
        self.backend = JsonSubprocessBackend(command)
        self.model_id = model_id

    def generate_text(self, source: str, cfg: GenerationConfig) -> GenerationOutput:
        reply = self.backend.call(
            {"op": "generate", "model_id": self.model_id, "source": source,
             "config": asdict(cfg)}
        )
        try:
            return GenerationOutput(text=str(reply["text"]), truncated=bool(reply.get("truncated", False)))
        except (TypeError, KeyError) as exc:
            raise BackendUnavailable(f"bad generate reply: {reply!r}") from exc


class RemoteSeq2SeqBackend:
    """Trainer adapter: {op: "fine_tune", pairs, config} -> {model_id}."""

    def __init__(self, command: list[str]):
        self.command = list(command)
        self.backend = JsonSubprocessBackend(command)

    def fine_tune(self, pairs: list[tuple[str, str]], cfg: TrainConfig) -> RemoteModel:
        reply = self.backend.call(
            {"op": "fine_tune", "pairs": [list(p) for p in pairs], "config": asdict(cfg)}
        )
        try:
            return RemoteModel(self.command, str(reply["model_id"]))
        except (TypeError, KeyError) as exc:
            raise BackendUnavailable(f"bad fine_tune reply: {reply!r}") from exc
