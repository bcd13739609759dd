"""Automatic metrics over extracted vehicles plus human-score aggregation.

Vehicle BLEU is corpus-level modified n-gram precision with a brevity
penalty and no smoothing by default (a flag adds add-one smoothing, since
BLEU-2 on tiny corpora collapses without it).  The embedding score is greedy
token matching under any token embedder; with a one-hot embedder it reduces
to token-overlap F1.  Novelty is the fraction of generated (property,
vehicle) pairs unseen in training.  Score sheets carry 1-5 ratings on four
criteria (C, R1, R2, OQ); pairwise comparison averages raters per item and
counts strict wins.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .core import (
    NotModifierFinal,
    extract_generated_vehicle,
    strip_terminal_modifier,
    tokenize,
)

CRITERIA = ("C", "R1", "R2", "OQ")


class LengthMismatch(ValueError):
    """Candidate and reference lists must align one to one."""


class EmptyGenerated(ValueError):
    """Novelty is undefined over zero generated pairs."""


class MissingItem(KeyError):
    def __init__(self, items):
        self.items = sorted(items)
        super().__init__(f"items scored for one system only: {self.items}")


# ---------------------------------------------------------------------------
# Vehicle BLEU


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def vehicle_bleu(
    candidates: list[list[str]],
    references: list[list[list[str]]],
    n: int = 1,
    smoothing: bool = False,
) -> float:
    """Corpus-level BLEU-n over already-extracted vehicle token lists.

    Per order i <= n: p_i = clipped matches / candidate n-gram total, add-one
    smoothed to (m+1)/(t+1) when the flag is set.  Empty candidates contribute
    zero matches but still count toward the brevity penalty via their best
    reference length.  Returns 0.0 when the candidate corpus has no tokens or
    any unsmoothed p_i is zero.
    """
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    if len(candidates) != len(references):
        raise LengthMismatch(
            f"{len(candidates)} candidates vs {len(references)} reference sets"
        )
    matches = [0] * n
    totals = [0] * n
    cand_len = 0
    ref_len = 0
    for cand, refs in zip(candidates, references):
        if not refs:
            raise ValueError("every candidate needs at least one reference")
        cand_len += len(cand)
        # Closest reference length; ties prefer the shorter reference.
        ref_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
        for i in range(1, n + 1):
            cand_counts = _ngrams(cand, i)
            totals[i - 1] += max(0, len(cand) - i + 1)
            if not cand_counts:
                continue
            max_ref: Counter = Counter()
            for ref in refs:
                for gram, count in _ngrams(ref, i).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            matches[i - 1] += sum(
                min(count, max_ref[gram]) for gram, count in cand_counts.items()
            )
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for m, t in zip(matches, totals):
        if smoothing:
            p = (m + 1) / (t + 1)
        else:
            p = m / t if t > 0 else 0.0
        if p == 0.0:
            return 0.0
        log_sum += math.log(p)
    bp = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return bp * math.exp(log_sum / n)


# ---------------------------------------------------------------------------
# Embedding F1 (greedy matching)


class OneHotEmbedder:
    """Identity embedding; cosine is 1 for equal tokens, else 0."""

    def embed(self, token: str) -> dict[str, float]:
        return {token: 1.0}


class CharNgramEmbedder:
    """Sparse character n-gram counts; related word forms get nonzero cosine."""

    def __init__(self, n: int = 2):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n

    def embed(self, token: str) -> dict[str, float]:
        padded = f"#{token.lower()}#"
        vec: dict[str, float] = {}
        for i in range(max(1, len(padded) - self.n + 1)):
            gram = padded[i : i + self.n]
            vec[gram] = vec.get(gram, 0.0) + 1.0
        return vec


def _unit(vec: dict[str, float]) -> dict[str, float]:
    norm = math.sqrt(sum(v * v for v in vec.values()))
    if norm == 0:
        return {}
    return {k: v / norm for k, v in vec.items()}


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(v * b.get(k, 0.0) for k, v in a.items())


def embedding_f1(candidate: str, references: list[str], embedder) -> float:
    """Greedy-matching token F1 under the embedder; max over references.

    Empty candidates score 0.0 by convention.
    """
    cand_tokens = tokenize(candidate)
    if not cand_tokens:
        return 0.0
    cand_vecs = [_unit(embedder.embed(t)) for t in cand_tokens]
    best = 0.0
    for reference in references:
        ref_tokens = tokenize(reference)
        if not ref_tokens:
            continue
        ref_vecs = [_unit(embedder.embed(t)) for t in ref_tokens]
        recall = sum(max(_cosine(r, c) for c in cand_vecs) for r in ref_vecs) / len(ref_vecs)
        precision = sum(max(_cosine(c, r) for r in ref_vecs) for c in cand_vecs) / len(cand_vecs)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        if f1 > best:
            best = f1
    return best


# ---------------------------------------------------------------------------
# Novelty


def normalize_pair(pair: tuple[str, str]) -> tuple[str, str]:
    """Lowercase, tokenize, drop trailing punctuation, single-space join."""
    out = []
    for part in pair:
        tokens = tokenize(part.lower())
        while tokens and not tokens[-1][0].isalnum() and tokens[-1][0] != "_":
            tokens.pop()
        out.append(" ".join(tokens))
    return (out[0], out[1])


def novelty(generated: list[tuple[str, str]], training) -> float:
    """Fraction of generated (property, vehicle) pairs absent from training."""
    if not generated:
        raise EmptyGenerated("no generated pairs")
    seen = {normalize_pair(p) for p in training}
    absent = sum(1 for p in generated if normalize_pair(p) not in seen)
    return absent / len(generated)


# ---------------------------------------------------------------------------
# Human score sheets


@dataclass(frozen=True)
class ScoreRow:
    item_id: str
    system: str
    rater_id: str
    criterion: str
    score: int

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if not isinstance(self.score, int) or not 1 <= self.score <= 5:
            raise ValueError(f"score must be an integer in 1..5, got {self.score!r}")


@dataclass
class ScoreSheet:
    rows: list[ScoreRow] = field(default_factory=list)

    def add(self, item_id, system, rater_id, criterion, score) -> None:
        self.rows.append(ScoreRow(str(item_id), str(system), str(rater_id), criterion, int(score)))

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["item_id", "system", "rater_id", "criterion", "score"])
            for r in self.rows:
                writer.writerow([r.item_id, r.system, r.rater_id, r.criterion, r.score])

    @classmethod
    def load_csv(cls, path) -> "ScoreSheet":
        sheet = cls()
        with open(path, encoding="utf-8", newline="") as fh:
            for rec in csv.DictReader(fh):
                sheet.add(rec["item_id"], rec["system"], rec["rater_id"],
                          rec["criterion"], int(rec["score"]))
        return sheet


def _item_means(sheet: ScoreSheet, system: str, criterion: str) -> dict[str, float]:
    scores: dict[str, list[int]] = {}
    for r in sheet.rows:
        if r.system == system and r.criterion == criterion:
            scores.setdefault(r.item_id, []).append(r.score)
    return {item: sum(v) / len(v) for item, v in scores.items()}


def pairwise_compare(
    sheet: ScoreSheet, system_a: str, system_b: str, criterion: str
) -> tuple[float, float, float]:
    """(win%, lose%, tie%) for A vs B: per-item rater means, strict comparison."""
    means_a = _item_means(sheet, system_a, criterion)
    means_b = _item_means(sheet, system_b, criterion)
    if set(means_a) != set(means_b):
        raise MissingItem(set(means_a) ^ set(means_b))
    if not means_a:
        raise ValueError(f"no items scored on criterion {criterion!r}")
    wins = loses = ties = 0
    for item, mean_a in means_a.items():
        mean_b = means_b[item]
        if mean_a > mean_b:
            wins += 1
        elif mean_a < mean_b:
            loses += 1
        else:
            ties += 1
    total = len(means_a)
    return (100.0 * wins / total, 100.0 * loses / total, 100.0 * ties / total)


def mean_scores(sheet: ScoreSheet) -> dict[tuple[str, str], float]:
    """Arithmetic mean over all ratings, keyed by (system, criterion)."""
    buckets: dict[tuple[str, str], list[int]] = {}
    for r in sheet.rows:
        buckets.setdefault((r.system, r.criterion), []).append(r.score)
    return {key: sum(v) / len(v) for key, v in buckets.items()}


def krippendorff_alpha(sheet: ScoreSheet, criterion: str | None = None) -> float:
    """Interval-metric alpha over (item, system) units; 1.0 when variance is zero."""
    units: dict[tuple[str, str], list[int]] = {}
    for r in sheet.rows:
        if criterion is not None and r.criterion != criterion:
            continue
        units.setdefault((r.item_id, r.system), []).append(r.score)
    pairable = [vals for vals in units.values() if len(vals) >= 2]
    if not pairable:
        raise ValueError("alpha needs at least one unit with two ratings")
    n = sum(len(vals) for vals in pairable)
    observed = 0.0
    for vals in pairable:
        m = len(vals)
        observed += sum((a - b) ** 2 for a in vals for b in vals) / (m - 1)
    observed /= n
    flat = [v for vals in pairable for v in vals]
    expected = sum((a - b) ** 2 for a in flat for b in flat) / (n * (n - 1))
    if expected == 0:
        return 1.0
    return 1.0 - observed / expected


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class SystemMetrics:
    bleu1: float
    bleu2: float
    embedding_f1: float
    novelty: float | None
    scored: int
    blank: int

    def __post_init__(self):
        for name in ("bleu1", "bleu2", "embedding_f1", "novelty"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass
class MetricReport:
    systems: dict[str, SystemMetrics] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            name: {
                "bleu1": m.bleu1,
                "bleu2": m.bleu2,
                "embedding_f1": m.embedding_f1,
                "novelty": m.novelty,
                "scored": m.scored,
                "blank": m.blank,
            }
            for name, m in self.systems.items()
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def format_table(self) -> str:
        """BLEU and novelty scaled x100, embedding F1 raw, one system per row."""
        header = f"{'System':<10} {'B-1':>7} {'B-2':>7} {'Emb-F1':>7} {'Novelty':>8}"
        lines = [header, "-" * len(header)]
        for name in sorted(self.systems):
            m = self.systems[name]
            nov = f"{100 * m.novelty:8.1f}" if m.novelty is not None else f"{'-':>8}"
            lines.append(
                f"{name:<10} {100 * m.bleu1:7.2f} {100 * m.bleu2:7.2f} "
                f"{m.embedding_f1:7.2f} {nov}"
            )
        return "\n".join(lines) + "\n"


def _literal_property(literal: str, tagger) -> str:
    if tagger is not None:
        try:
            return strip_terminal_modifier(literal, tagger).property
        except NotModifierFinal:
            pass
    words = [t for t in tokenize(literal) if t[0].isalnum() or t[0] == "_"]
    return words[-1] if words else ""


def evaluate_generation(
    records: list[dict],
    refs_by_literal: dict[str, list[str]],
    embedder,
    train_pairs=None,
    tagger=None,
    smoothing: bool = False,
) -> SystemMetrics:
    """Score one system's batch records ({literal, output}) against references.

    Vehicles are extracted by discarding each output's common token prefix
    with its literal; references get the same treatment.  Blank outputs stay
    in as empty candidates.  Novelty pairs the literal's terminal property
    with the extracted vehicle, skipping blanks; it is None when train_pairs
    is not supplied or nothing survived.
    """
    missing = [rec["literal"] for rec in records if rec["literal"] not in refs_by_literal]
    if missing:
        raise MissingItem(set(missing))
    candidates = []
    reference_sets = []
    f1_values = []
    generated_pairs = []
    blank = 0
    for rec in records:
        literal = rec["literal"]
        output = rec.get("output", "")
        refs = refs_by_literal[literal]
        cand = extract_generated_vehicle(output, literal)
        ref_tokens = [extract_generated_vehicle(r, literal) for r in refs]
        candidates.append(cand)
        reference_sets.append(ref_tokens)
        f1_values.append(
            embedding_f1(" ".join(cand), [" ".join(r) for r in ref_tokens], embedder)
        )
        if cand:
            generated_pairs.append((_literal_property(literal, tagger), " ".join(cand)))
        else:
            blank += 1
    nov = None
    if train_pairs is not None and generated_pairs:
        nov = novelty(generated_pairs, train_pairs)
    return SystemMetrics(
        bleu1=vehicle_bleu(candidates, reference_sets, n=1, smoothing=smoothing),
        bleu2=vehicle_bleu(candidates, reference_sets, n=2, smoothing=smoothing),
        embedding_f1=sum(f1_values) / len(f1_values) if f1_values else 0.0,
        novelty=nov,
        scored=len(records),
        blank=blank,
    )


def read_refs_jsonl(path) -> dict[str, list[str]]:
    """{literal, references: [...]} rows into a literal -> references map."""
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out[rec["literal"]] = [str(r) for r in rec["references"]]
    return out
