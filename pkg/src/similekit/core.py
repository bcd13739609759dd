"""Simile structure: shared tokenizer, trigger parsing, terminal-modifier surgery.

A simile is a sentence containing a comparator trigger ("like a") that splits
it into a prefix (topic + event, possibly an explicit property), the
comparator span itself, and the vehicle (everything after the trigger up to
the end of the sentence).  Every module uses the tokenizer defined here so
that token-level metrics and model vocabularies agree.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field

# Word tokens keep internal apostrophes ("Francis's" is one token); every
# other non-space character is its own token.
_TOKEN_RE = re.compile(r"\w+(?:'\w+)*|[^\w\s]")

# Punctuation that attaches to the preceding token when text is rebuilt.
NO_SPACE_BEFORE = frozenset(".,!?;:")

EOS_TOKEN = "</s>"


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def token_spans(text: str) -> list[Token]:
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def detokenize(tokens: list[str]) -> str:
    """Space-join tokens, attaching sentence punctuation to the left."""
    out = ""
    for tok in tokens:
        out = append_token(out, tok)
    return out


def append_token(text: str, token: str) -> str:
    """Extend a partially built sentence by one token with standard spacing."""
    if not text:
        return token
    if token in NO_SPACE_BEFORE:
        return text + token
    return text + " " + token


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence split on terminal punctuation and newlines."""
    parts = []
    for chunk in re.split(r"\n+", text):
        for m in re.finditer(r"[^.!?]+[.!?]*", chunk):
            sent = m.group().strip()
            if sent:
                parts.append(sent)
    return parts


def terminal_punctuation(text: str) -> str:
    """Trailing punctuation run of a sentence, "" when it ends in a word."""
    m = re.search(r"([^\w\s]+)\s*$", text)
    return m.group(1) if m else ""


@dataclass(frozen=True)
class TriggerConfig:
    """Comparator trigger set.

    Only "like a" is on by default; "like an" is a configurable extension.
    Phrases are matched with word boundaries, so "like a" does not fire
    inside "like apples" or "unlike a".
    """

    trigger_phrases: tuple[str, ...] = ("like a",)
    case_sensitive: bool = False

    def __post_init__(self):
        if not self.trigger_phrases:
            raise ValueError("trigger_phrases must be non-empty")
        if not self.case_sensitive:
            object.__setattr__(
                self, "trigger_phrases", tuple(p.lower() for p in self.trigger_phrases)
            )


DEFAULT_TRIGGERS = TriggerConfig()


@functools.lru_cache(maxsize=64)
def _trigger_pattern(phrase: str, case_sensitive: bool) -> re.Pattern:
    words = [re.escape(w) for w in phrase.split()]
    pat = r"(?<!\w)" + r"\s+".join(words) + r"(?!\w)"
    return re.compile(pat, 0 if case_sensitive else re.IGNORECASE)


@dataclass(frozen=True)
class SimileInstance:
    """A parsed simile.  prefix + comparator + vehicle == raw_text, byte for byte.

    The comparator span absorbs the whitespace around the trigger phrase so
    prefix and vehicle carry no flanking spaces.
    """

    raw_text: str
    prefix: str
    comparator: str
    vehicle: str
    source_id: str = ""

    def __post_init__(self):
        if self.prefix + self.comparator + self.vehicle != self.raw_text:
            raise ValueError("prefix + comparator + vehicle must equal raw_text")
        if not re.search(r"\w", self.vehicle):
            raise ValueError("vehicle must contain a word token")

    def prefix_tokens(self) -> list[str]:
        return tokenize(self.prefix)

    def vehicle_tokens(self) -> list[str]:
        return tokenize(self.vehicle)

    def vehicle_phrase(self) -> str:
        """Vehicle text with trailing sentence punctuation removed."""
        return re.sub(r"[^\w\s]+\s*$", "", self.vehicle).strip()


@dataclass(frozen=True)
class LiteralSentence:
    """A literal utterance whose final content token is an adjective/adverb."""

    raw_text: str
    prefix: str
    property: str
    pos_tag: str

    def __post_init__(self):
        low = {t.lower() for t in tokenize(self.raw_text)}
        if low & {"like", "as"}:
            raise ValueError("literal sentence must contain no comparator token")


def parse_simile(text: str, cfg: TriggerConfig = DEFAULT_TRIGGERS) -> SimileInstance | None:
    """Split a sentence at the first occurrence of the first matching trigger.

    Returns None when no trigger occurs or the vehicle would be empty.
    """
    for phrase in cfg.trigger_phrases:
        m = _trigger_pattern(phrase, cfg.case_sensitive).search(text)
        if m is None:
            continue
        start, end = m.start(), m.end()
        # Absorb flanking whitespace into the comparator span so the
        # prefix/vehicle round-trip stays exact without stray spaces.
        while start > 0 and text[start - 1].isspace():
            start -= 1
        while end < len(text) and text[end].isspace():
            end += 1
        vehicle = text[end:]
        if not re.search(r"\w", vehicle):
            return None
        return SimileInstance(
            raw_text=text,
            prefix=text[:start],
            comparator=text[start:end],
            vehicle=vehicle,
        )
    return None


def with_source(instance: SimileInstance, source_id: str) -> SimileInstance:
    return SimileInstance(
        raw_text=instance.raw_text,
        prefix=instance.prefix,
        comparator=instance.comparator,
        vehicle=instance.vehicle,
        source_id=source_id,
    )


class NotModifierFinal(ValueError):
    """The sentence's last content token is not an adjective or adverb."""


@dataclass(frozen=True)
class StrippedLiteral:
    """Result of removing a sentence's terminal modifier.

    prefix keeps the original text verbatim up to the modifier (including any
    comma); trailing holds the punctuation after the modifier so the sentence
    can be reassembled as prefix + " " + property + trailing.
    """

    prefix: str
    property: str
    trailing: str
    pos_tag: str = ""

    def reassemble(self) -> str:
        return self.prefix + " " + self.property + self.trailing


def strip_terminal_modifier(text: str, tagger) -> StrippedLiteral:
    """Split off the final content token when it is tagged ADJ or ADV.

    Raises NotModifierFinal otherwise (including sentences with no word
    tokens at all).
    """
    spans = token_spans(text)
    word_positions = [i for i, t in enumerate(spans) if re.match(r"\w", t.text)]
    if not word_positions:
        raise NotModifierFinal(f"no content token in {text!r}")
    last = spans[word_positions[-1]]
    tag = tagger.tag(last.text)
    if tag not in ("ADJ", "ADV"):
        raise NotModifierFinal(f"final token {last.text!r} tagged {tag}, not ADJ/ADV")
    prefix = text[: last.start].rstrip()
    trailing = text[last.end :].strip()
    return StrippedLiteral(prefix=prefix, property=last.text, trailing=trailing, pos_tag=tag)


def drop_dangling_comma(prefix: str) -> str:
    """Remove a trailing comma left behind when a clause-final modifier goes."""
    return prefix.rstrip().rstrip(",").rstrip()


def extract_generated_vehicle(
    generated: str, reference: str, cfg: TriggerConfig = DEFAULT_TRIGGERS
) -> list[str]:
    """Tokens of `generated` after the longest common token prefix with `reference`.

    A leading trigger remnant ("like a"/"like an" tokens) surviving the prefix
    discard is dropped, so the result is the vehicle whether the reference was
    the literal source or an explicit simile prefix.  May be empty.
    """
    gen = tokenize(generated)
    ref = tokenize(reference)
    i = 0
    while i < len(gen) and i < len(ref) and gen[i] == ref[i]:
        i += 1
    rest = gen[i:]
    for phrase in cfg.trigger_phrases:
        ptoks = tokenize(phrase)
        head = [_fold(t, cfg) for t in rest[: len(ptoks)]]
        if head == [_fold(t, cfg) for t in ptoks]:
            rest = rest[len(ptoks) :]
            break
    return rest


def _fold(token: str, cfg: TriggerConfig) -> str:
    return token if cfg.case_sensitive else token.lower()
