"""Distant-supervision corpus construction: simile in, (literal, simile) pair out.

For each simile: look up the vehicle's top-k HasProperty properties, append
each to the prefix to form literal candidates, keep the candidate the scorer
finds most fluent (minimum perplexity, ties by property rank), run it through
the grammar-correction hook, and emit the pair.  The simile prefix is kept
verbatim, so a comma before the comparator survives into the literal
("... calm and quiet, very relaxed.").
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

from .core import SimileInstance, TriggerConfig, parse_simile, terminal_punctuation
from .knowledge import PropertyCandidate, properties_of
from .lm import perplexity


class NoProperties(ValueError):
    """A simile cannot be converted without at least one property."""


class GrammarCorrectionWarning(UserWarning):
    """The corrector failed; the uncorrected text was used instead."""


# Both trigger variants count when validating the source/target contract,
# whatever the parse-time configuration was.
_CONTRACT_TRIGGERS = TriggerConfig(trigger_phrases=("like a", "like an"))


@dataclass(frozen=True)
class LiteralCandidate:
    text: str
    property: str
    perplexity: float | None = None


@dataclass(frozen=True)
class ParallelPair:
    source: str
    target: str
    property_used: str
    vehicle: str
    provenance: str = ""

    def __post_init__(self):
        if parse_simile(self.target, _CONTRACT_TRIGGERS) is None:
            raise ValueError("target must contain a trigger phrase")
        if parse_simile(self.source, _CONTRACT_TRIGGERS) is not None:
            raise ValueError("source must not contain a trigger phrase")


@dataclass
class BuildStats:
    built: int = 0
    skipped_no_properties: int = 0
    failures: list = field(default_factory=list)


def make_literal_candidates(
    simile: SimileInstance, properties: list[PropertyCandidate]
) -> list[LiteralCandidate]:
    """One candidate per property: prefix + property + original terminal punctuation."""
    if not properties:
        raise NoProperties(f"no properties for vehicle of {simile.raw_text!r}")
    punct = terminal_punctuation(simile.raw_text)
    out = []
    for prop in properties:
        text = (simile.prefix + " " + prop.text).strip() + punct
        out.append(LiteralCandidate(text=text, property=prop.text))
    return out


def select_best_literal(candidates: list[LiteralCandidate], scorer) -> LiteralCandidate:
    """Minimum-perplexity candidate; ties keep the earlier (higher-ranked) property."""
    if not candidates:
        raise ValueError("no candidates to select from")
    best = None
    for cand in candidates:
        scored = replace(cand, perplexity=perplexity(cand.text, scorer))
        if best is None or scored.perplexity < best.perplexity:
            best = scored
    return best


def correct_grammar(text: str, corrector=None) -> str:
    """Apply the pluggable corrector; identity when absent, input on failure."""
    if corrector is None:
        return text
    try:
        return corrector(text)
    except Exception as exc:
        warnings.warn(
            f"grammar corrector failed ({exc}); using uncorrected text",
            GrammarCorrectionWarning,
            stacklevel=2,
        )
        return text


def build_parallel_corpus(
    similes: list[SimileInstance],
    knowledge_backend,
    scorer,
    corrector=None,
    k: int = 5,
    stats: BuildStats | None = None,
) -> list[ParallelPair]:
    """Convert similes to pairs; per-item failures are recorded, never fatal.

    Similes whose vehicle yields no properties are skipped and counted.
    Output order follows input order.
    """
    pairs = []
    for simile in similes:
        try:
            concept = simile.vehicle_phrase()
            props = properties_of(concept, k, knowledge_backend)
            if not props:
                if stats is not None:
                    stats.skipped_no_properties += 1
                continue
            candidates = make_literal_candidates(simile, props)
            best = select_best_literal(candidates, scorer)
            source = correct_grammar(best.text, corrector)
            pairs.append(
                ParallelPair(
                    source=source,
                    target=simile.raw_text,
                    property_used=best.property,
                    vehicle=concept,
                    provenance=simile.source_id,
                )
            )
            if stats is not None:
                stats.built += 1
        except Exception as exc:
            if stats is not None:
                stats.failures.append((simile.source_id or simile.raw_text, str(exc)))
    return pairs


# ---------------------------------------------------------------------------
# File formats: TSV for the trainer, JSONL for the audit trail.


def write_pairs_tsv(pairs: list[ParallelPair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            if "\t" in pair.source + pair.target or "\n" in pair.source + pair.target:
                raise ValueError(f"pair text contains a tab or newline: {pair.source!r}")
            fh.write(f"{pair.source}\t{pair.target}\n")


def read_pairs_tsv(path) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected source<TAB>target")
            out.append((parts[0], parts[1]))
    return out


def write_pairs_audit_jsonl(pairs: list[ParallelPair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            rec = {
                "source": pair.source,
                "target": pair.target,
                "property_used": pair.property_used,
                "vehicle": pair.vehicle,
                "provenance": pair.provenance,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_pairs_audit_jsonl(path) -> list[ParallelPair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out.append(
                ParallelPair(
                    source=rec["source"],
                    target=rec["target"],
                    property_used=rec["property_used"],
                    vehicle=rec["vehicle"],
                    provenance=rec.get("provenance", ""),
                )
            )
    return out
