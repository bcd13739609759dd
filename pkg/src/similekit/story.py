"""Story post-processing: replace one literal sentence with a generated simile.

A story is embellished at most once: among sentences whose final content token
is an adjective or adverb, one is picked by seeded RNG and handed to any
generator with the shared literal-in signature.  Stories with no qualifying
sentence, and generator misses or failures, pass through unchanged.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass

from .core import NotModifierFinal, split_sentences, strip_terminal_modifier
from .lm import GenerationConfig, generate


@dataclass(frozen=True)
class Story:
    title: str
    storyline: tuple[str, ...]
    sentences: tuple[str, ...]

    def __post_init__(self):
        if not self.sentences:
            raise ValueError("a story needs at least one sentence")
        object.__setattr__(self, "storyline", tuple(self.storyline))
        object.__setattr__(self, "sentences", tuple(self.sentences))


class EmbellishWarning(UserWarning):
    """The generator failed; the story was returned unchanged."""


def _qualifies(sentence: str, tagger) -> bool:
    try:
        strip_terminal_modifier(sentence, tagger)
        return True
    except NotModifierFinal:
        return False


def select_replaceable(story: Story, tagger, rng_seed: int) -> int | None:
    """Uniform seeded choice among modifier-final sentences; None when none qualify."""
    qualifying = [i for i, s in enumerate(story.sentences) if _qualifies(s, tagger)]
    if not qualifying:
        return None
    return qualifying[random.Random(rng_seed).randrange(len(qualifying))]


def embellish(story: Story, generator, tagger, seed: int) -> Story:
    """Replace the selected sentence with generator(sentence); unchanged on miss.

    generator is any literal-in callable returning the simile or None.
    """
    index = select_replaceable(story, tagger, seed)
    if index is None:
        return story
    try:
        simile = generator(story.sentences[index])
    except Exception as exc:
        warnings.warn(f"generator failed ({exc}); story unchanged", EmbellishWarning,
                      stacklevel=2)
        return story
    if not simile:
        return story
    sentences = list(story.sentences)
    sentences[index] = simile
    return Story(title=story.title, storyline=story.storyline, sentences=tuple(sentences))


def generate_story(title: str, storyline_model, story_model, cfg: GenerationConfig) -> Story:
    """Two-step chain: title -> storyline keywords -> story sentences."""
    if not title or not title.strip():
        raise ValueError("title must be non-empty")
    storyline_text = generate(title, cfg, storyline_model).text
    storyline = tuple(storyline_text.split())
    story_text = generate(" ".join(storyline), cfg, story_model).text
    sentences = tuple(split_sentences(story_text))
    if not sentences:
        raise ValueError(f"story model produced no sentences for {title!r}")
    return Story(title=title, storyline=storyline, sentences=sentences)


# ---------------------------------------------------------------------------
# File formats


def write_stories_jsonl(stories: list[Story], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for story in stories:
            rec = {
                "title": story.title,
                "storyline": list(story.storyline),
                "sentences": list(story.sentences),
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_stories_jsonl(path) -> list[Story]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out.append(
                Story(
                    title=rec.get("title", ""),
                    storyline=tuple(rec.get("storyline", [])),
                    sentences=tuple(rec["sentences"]),
                )
            )
    return out


def write_embellished_jsonl(records: list[dict], path) -> None:
    """Rows of story fields plus {replaced_index, original_sentence}."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
