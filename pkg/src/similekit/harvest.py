"""Ingestion: comment dumps to simile sets, sentence crawls to literal test sets.

Comments arrive as newline-delimited JSON records {id, body, subreddit,
created_utc}.  Bodies are sentence-split, parsed for the trigger phrase, and
deduplicated on lowercased punctuation-stripped text.  Pronoun-topic short
similes ("I feel like a fool") are retained deliberately; they are a known
small noise fraction, not an error.  Literal sentences keep a separate,
stricter contract: no comparator token at all and a modifier-final ending.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass

from .core import (
    DEFAULT_TRIGGERS,
    LiteralSentence,
    NotModifierFinal,
    SimileInstance,
    TriggerConfig,
    parse_simile,
    split_sentences,
    strip_terminal_modifier,
    tokenize,
    with_source,
)


@dataclass(frozen=True)
class RawComment:
    id: str
    body: str
    subreddit: str = ""
    created_utc: int = 0

    def __post_init__(self):
        if not self.body:
            raise ValueError("comment body must be non-empty")


@dataclass
class HarvestStats:
    malformed: int = 0
    duplicates: int = 0
    rejected: int = 0


class EmptyCorpus(ValueError):
    """split_corpus received no similes."""


@dataclass(frozen=True)
class CorpusSplit:
    train: list
    validation: list
    seed: int


def load_comments(path, stats: HarvestStats | None = None) -> list[RawComment]:
    """Read NDJSON comment records; malformed lines are counted and skipped."""
    comments = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                comments.append(
                    RawComment(
                        id=str(rec["id"]),
                        body=str(rec["body"]),
                        subreddit=str(rec.get("subreddit", "")),
                        created_utc=int(rec.get("created_utc", 0)),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                if stats is not None:
                    stats.malformed += 1
    return comments


def dedup_key(text: str) -> str:
    return " ".join(re.sub(r"[^\w\s]", " ", text.lower()).split())


def harvest_similes(
    comments,
    cfg: TriggerConfig = DEFAULT_TRIGGERS,
    stats: HarvestStats | None = None,
) -> list[SimileInstance]:
    """Extract deduplicated simile sentences from a stream of comments.

    Output order is fixed by (created_utc, id) regardless of stream order, so
    repeated harvests over the same records agree byte for byte.
    """
    ordered = sorted(comments, key=lambda c: (c.created_utc, c.id))
    seen: set[str] = set()
    out: list[SimileInstance] = []
    for comment in ordered:
        for sentence in split_sentences(comment.body):
            inst = parse_simile(sentence, cfg)
            if inst is None:
                continue
            key = dedup_key(inst.raw_text)
            if key in seen:
                if stats is not None:
                    stats.duplicates += 1
                continue
            seen.add(key)
            out.append(with_source(inst, comment.id))
    return out


def harvest_literals(sentences, tagger, stats: HarvestStats | None = None) -> list[LiteralSentence]:
    """Keep sentences with no comparator token whose final content token is adj/adv."""
    out = []
    for sentence in sentences:
        text = sentence.strip()
        if not text:
            continue
        tokens = {t.lower() for t in tokenize(text)}
        if tokens & {"like", "as"}:
            if stats is not None:
                stats.rejected += 1
            continue
        try:
            stripped = strip_terminal_modifier(text, tagger)
        except NotModifierFinal:
            if stats is not None:
                stats.rejected += 1
            continue
        out.append(
            LiteralSentence(
                raw_text=text,
                prefix=stripped.prefix,
                property=stripped.property,
                pos_tag=stripped.pos_tag,
            )
        )
    return out


def sample_literals(literals: list, n: int, seed: int) -> list:
    """Fixed-seed uniform sample without replacement; all items when n >= len."""
    if n >= len(literals):
        return list(literals)
    return random.Random(seed).sample(literals, n)


def split_corpus(similes: list, ratio, seed: int) -> CorpusSplit:
    """Seeded shuffle then split; train takes the ceiling of ratio * n.

    ratio may be a float or an exact Fraction; 0 < ratio < 1.
    """
    if not similes:
        raise EmptyCorpus("no similes to split")
    if not 0 < ratio < 1:
        raise ValueError("ratio must be strictly between 0 and 1")
    order = list(similes)
    random.Random(seed).shuffle(order)
    train_n = math.ceil(ratio * len(order))
    return CorpusSplit(train=order[:train_n], validation=order[train_n:], seed=seed)


# ---------------------------------------------------------------------------
# File formats


def write_similes_jsonl(instances: list[SimileInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            rec = {
                "text": inst.raw_text,
                "prefix": inst.prefix,
                "vehicle": inst.vehicle,
                "source_id": inst.source_id,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_similes_jsonl(path, cfg: TriggerConfig = DEFAULT_TRIGGERS) -> list[SimileInstance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            inst = parse_simile(rec["text"], cfg)
            if inst is None:
                raise ValueError(f"{path}:{lineno}: text does not parse as a simile")
            out.append(with_source(inst, rec.get("source_id", "")))
    return out


def write_literals_jsonl(literals: list[LiteralSentence], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lit in literals:
            rec = {"text": lit.raw_text, "property": lit.property}
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_literals_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out
