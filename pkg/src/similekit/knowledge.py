"""Commonsense property lookup in both directions.

Corpus construction asks vehicle -> top-k HasProperty properties; the
retrieval baseline asks property -> best vehicle, with a synonym fallback.
Backends are interchangeable: a static weighted edge table (used by every
test) or a remote adapter speaking the JSON contract
{concept, relation: "HasProperty", k} -> [{text, score}, ...].
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import BackendUnavailable, JsonSubprocessBackend


@dataclass(frozen=True)
class PropertyCandidate:
    text: str
    score: float

    def __post_init__(self):
        if not self.text:
            raise ValueError("property text must be non-empty")


@dataclass(frozen=True)
class KnowledgeEdge:
    concept: str
    property: str
    weight: float

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("edge weight must be positive")


class ParseError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _norm(text: str) -> str:
    return " ".join(text.lower().split())


class EdgeTableBackend:
    """Immutable in-memory edge store indexed by concept and by property."""

    def __init__(self, edges: list[KnowledgeEdge]):
        # Duplicate (concept, property) rows collapse to their max weight.
        best: dict[tuple[str, str], float] = {}
        for e in edges:
            key = (_norm(e.concept), _norm(e.property))
            if key not in best or e.weight > best[key]:
                best[key] = e.weight
        self.by_concept: dict[str, list[PropertyCandidate]] = {}
        self.by_property: dict[str, list[tuple[float, str]]] = {}
        for (concept, prop), weight in best.items():
            self.by_concept.setdefault(concept, []).append(
                PropertyCandidate(text=prop, score=weight)
            )
            self.by_property.setdefault(prop, []).append((weight, concept))
        for cands in self.by_concept.values():
            cands.sort(key=lambda c: (-c.score, c.text))
        for rows in self.by_property.values():
            rows.sort(key=lambda r: (-r[0], r[1]))

    def properties_of(self, concept: str, k: int) -> list[PropertyCandidate]:
        return self.by_concept.get(_norm(concept), [])[:k]

    def best_concept_for(self, prop: str) -> str | None:
        rows = self.by_property.get(_norm(prop))
        return rows[0][1] if rows else None


class RemoteKnowledgeBackend:
    """Adapter for an out-of-process HasProperty model."""

    def __init__(self, command: list[str]):
        self.backend = JsonSubprocessBackend(command)

    def properties_of(self, concept: str, k: int) -> list[PropertyCandidate]:
        reply = self.backend.call(
            {"concept": concept, "relation": "HasProperty", "k": k}
        )
        if not isinstance(reply, list):
            raise BackendUnavailable("knowledge backend reply is not a list")
        cands = [PropertyCandidate(text=str(r["text"]), score=float(r["score"])) for r in reply]
        cands.sort(key=lambda c: (-c.score, c.text))
        return cands[:k]

    def best_concept_for(self, prop: str) -> str | None:
        raise BackendUnavailable("remote backend does not support reverse lookup")


def load_edge_table(path) -> EdgeTableBackend:
    """Load TSV rows concept<TAB>property<TAB>weight into an edge table."""
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ParseError(lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            concept, prop, weight_text = parts
            try:
                weight = float(weight_text)
            except ValueError:
                raise ParseError(lineno, f"bad weight {weight_text!r}") from None
            if weight <= 0:
                raise ParseError(lineno, f"weight must be positive, got {weight_text}")
            if not concept.strip() or not prop.strip():
                raise ParseError(lineno, "empty concept or property")
            edges.append(KnowledgeEdge(concept=concept, property=prop, weight=weight))
    return EdgeTableBackend(edges)


class SynonymTable:
    """word<TAB>synonym rows; lookup returns synonyms in file order, deduped."""

    def __init__(self, mapping: dict[str, list[str]] | None = None):
        self.mapping = {_norm(k): list(v) for k, v in (mapping or {}).items()}

    @classmethod
    def load(cls, path) -> "SynonymTable":
        mapping: dict[str, list[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2:
                    raise ParseError(lineno, f"expected 2 tab-separated fields, got {len(parts)}")
                word, syn = _norm(parts[0]), _norm(parts[1])
                if not word or not syn:
                    raise ParseError(lineno, "empty word or synonym")
                bucket = mapping.setdefault(word, [])
                if syn not in bucket:
                    bucket.append(syn)
        return cls(mapping)

    def synonyms_of(self, word: str) -> list[str]:
        return list(self.mapping.get(_norm(word), []))


EMPTY_SYNONYMS = SynonymTable()


def properties_of(vehicle: str, k: int, backend) -> list[PropertyCandidate]:
    """Top-k properties of a concept, descending score; fewer when unknown."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cands = backend.properties_of(vehicle, k)
    if any(cands[i].score < cands[i + 1].score for i in range(len(cands) - 1)):
        raise BackendUnavailable("backend returned properties out of score order")
    return cands[:k]


def vehicle_for_property(prop: str, backend, synonym_backend=EMPTY_SYNONYMS) -> str | None:
    """Concept of the max-weight edge for a property, trying synonyms on miss."""
    if not prop or not prop.strip():
        raise ValueError("property must be non-empty")
    hit = backend.best_concept_for(prop)
    if hit is not None:
        return hit
    for syn in synonym_backend.synonyms_of(prop):
        hit = backend.best_concept_for(syn)
        if hit is not None:
            return hit
    return None
