"""Hard-negative label generation and dataset statistics.

A hard negative is the positive label with exactly one aspect token swapped
(a color, material, relation verb, or position word) or with the word "not"
removed. Swaps are deterministic: first matching token only, candidates in
vocabulary order, duplicates and anything equal to the positive dropped.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .dataset import GroundTruthSet
from .errors import ConfigError, InapplicableLabel

DEFAULT_COLORS = ("red", "blue", "green", "yellow", "black", "white")
DEFAULT_MATERIALS = ("wooden", "metal", "plastic", "glass", "leather", "fabric")
DEFAULT_POSITIONS = ("left", "right", "above", "under", "front", "back", "in")
# Seed verb lexicon for relation labels; callers are expected to extend it.
DEFAULT_RELATION_VERBS = (
    "riding",
    "holding",
    "carrying",
    "eating",
    "drinking",
    "wearing",
    "pushing",
    "pulling",
    "throwing",
    "catching",
    "feeding",
    "chasing",
    "hugging",
    "kicking",
    "washing",
)

ASPECTS = ("color", "material", "relationship", "position", "negation")

_DEFAULT_VOCABULARIES = {
    "color": DEFAULT_COLORS,
    "material": DEFAULT_MATERIALS,
    "relationship": DEFAULT_RELATION_VERBS,
    "position": DEFAULT_POSITIONS,
    "negation": (),
}


def normalize_label(text: str) -> str:
    """Lowercase and collapse whitespace runs; the distinctness equivalence."""
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class NegativeRuleSet:
    """One aspect's substitution rule.

    Attributes:
        aspect: color | material | relationship | position | negation.
        vocabulary: candidate tokens, in substitution order. Negation
            removes "not" instead of swapping and rejects a vocabulary.
        cap: optional upper bound on negatives per label.
    """

    aspect: str
    vocabulary: tuple[str, ...] = ()
    cap: int | None = None

    def __post_init__(self) -> None:
        if self.aspect not in ASPECTS:
            raise ConfigError(f"aspect must be one of {ASPECTS}, got {self.aspect!r}")
        vocab = tuple(self.vocabulary)
        if self.aspect == "negation":
            if vocab:
                raise ConfigError("negation removes 'not'; it takes no vocabulary")
        else:
            if not vocab:
                vocab = _DEFAULT_VOCABULARIES[self.aspect]
            if not vocab:
                raise ConfigError("vocabulary must not be empty")
            norm = [normalize_label(w) for w in vocab]
            if len(set(norm)) != len(norm):
                raise ConfigError("vocabulary contains duplicates")
        object.__setattr__(self, "vocabulary", vocab)
        if self.cap is not None and self.cap < 1:
            raise ConfigError("cap must be >= 1 when given")


def find_aspect_token(label: str, rules: NegativeRuleSet) -> tuple[int, str, int]:
    """Locate the token the rule would rewrite.

    Returns (word position, matched word, total occurrences of vocabulary
    words). More than one occurrence means the label is ambiguous for this
    aspect and worth reviewing; substitution still targets the first.

    Raises:
        InapplicableLabel: nothing to rewrite.
    """
    words = label.split()
    if rules.aspect == "negation":
        hits = [i for i, w in enumerate(words) if w.lower() == "not"]
        if not hits:
            raise InapplicableLabel(f"label has no 'not' to remove: {label!r}")
        return hits[0], words[hits[0]], len(hits)
    vocab = {normalize_label(w) for w in rules.vocabulary}
    hits = [i for i, w in enumerate(words) if w.lower() in vocab]
    if not hits:
        raise InapplicableLabel(
            f"label has no {rules.aspect} token from the vocabulary: {label!r}"
        )
    return hits[0], words[hits[0]], len(hits)


def gen_negatives(label: str, rules: NegativeRuleSet) -> list[str]:
    """All negatives for one label under one rule, vocabulary order.

    Each output differs from the input by exactly one aspect token (or by a
    removed "not"), is distinct from the positive after normalization, and
    the list is deduplicated. Deterministic and idempotent per (label, rules).

    Raises:
        InapplicableLabel: the label contains no token this rule rewrites.
    """
    if rules.aspect == "negation":
        negative, _, _ = remove_negation(label)
        out = [negative]
    else:
        pos, _, _ = find_aspect_token(label, rules)
        words = label.split()
        out = []
        for candidate in rules.vocabulary:
            replaced = words[:pos] + [candidate] + words[pos + 1 :]
            out.append(" ".join(replaced))
    positive_norm = normalize_label(label)
    seen: set[str] = set()
    result: list[str] = []
    for neg in out:
        key = normalize_label(neg)
        if key == positive_norm or key in seen:
            continue
        seen.add(key)
        result.append(neg)
    if rules.cap is not None:
        result = result[: rules.cap]
    return result


def remove_negation(label: str) -> tuple[str, int, str]:
    """Delete the first standalone "not" and remember how to undo it.

    Returns (negative, char position, removed text); the removed text
    includes one adjacent space when present, so
    negative[:pos] + removed + negative[pos:] is exactly the input.

    Raises:
        InapplicableLabel: no standalone "not" in the label.
    """
    m = re.search(r"\bnot\b", label, flags=re.IGNORECASE)
    if m is None:
        raise InapplicableLabel(f"label has no 'not' to remove: {label!r}")
    start, end = m.span()
    if end < len(label) and label[end] == " ":
        end += 1
    elif start > 0 and label[start - 1] == " ":
        start -= 1
    return label[:start] + label[end:], start, label[start:end]


def reinsert_negation(negative: str, pos: int, removed: str) -> str:
    """Inverse of remove_negation."""
    return negative[:pos] + removed + negative[pos:]


# Gerund -> past participle for verbs that do not take plain -ed.
IRREGULAR_PARTICIPLES = {
    "biting": "bitten",
    "blowing": "blown",
    "breaking": "broken",
    "bringing": "brought",
    "buying": "bought",
    "catching": "caught",
    "cutting": "cut",
    "drawing": "drawn",
    "drinking": "drunk",
    "driving": "driven",
    "eating": "eaten",
    "feeding": "fed",
    "flying": "flown",
    "giving": "given",
    "hiding": "hidden",
    "hitting": "hit",
    "holding": "held",
    "leading": "led",
    "making": "made",
    "reading": "read",
    "riding": "ridden",
    "shaking": "shaken",
    "singing": "sung",
    "sitting": "sat",
    "speaking": "spoken",
    "standing": "stood",
    "stealing": "stolen",
    "swinging": "swung",
    "taking": "taken",
    "teaching": "taught",
    "tearing": "torn",
    "throwing": "thrown",
    "wearing": "worn",
    "winning": "won",
    "writing": "written",
}

DEFAULT_SVO_PATTERN = r"^(?P<subject>.+?)\s+(?P<verb>[A-Za-z]+ing)\s+(?P<object>.+)$"


def _participle(gerund: str) -> str:
    # Gerund stems already reflect e-dropping and consonant doubling
    # (baking -> bak -> baked, hugging -> hugg -> hugged), so plain -ed
    # works outside the irregular table; carrying-style stems take -ied.
    g = gerund.lower()
    if g in IRREGULAR_PARTICIPLES:
        return IRREGULAR_PARTICIPLES[g]
    stem = g[:-3]
    if stem.endswith("y") and len(stem) >= 2 and stem[-2] not in "aeiou":
        return stem[:-1] + "ied"
    return stem + "ed"


def passivize(label: str, pattern: str = DEFAULT_SVO_PATTERN) -> str:
    """Rewrite "S V-ing O" as "O being V-participle by S".

    The pattern must expose subject/verb/object groups where the verb is a
    gerund; participles come from a lookup table with an -ed fallback.

    Raises:
        InapplicableLabel: the label does not match the template.
    """
    m = re.match(pattern, label.strip())
    if m is None:
        raise InapplicableLabel(f"label does not match the S V-ing O template: {label!r}")
    return f"{m.group('object')} being {_participle(m.group('verb'))} by {m.group('subject')}"


def whitespace_tokens(text: str) -> int:
    """Default tokenizer: whitespace-delimited word count."""
    return len(text.split())


@dataclass(frozen=True)
class DatasetStats:
    """Corpus-level summary of a ground-truth set and its negatives."""

    images: int
    bboxes: int
    labels: int
    avg_negative_labels: float | None
    avg_label_tokens: float
    avg_label_words: float

    def to_dict(self) -> dict:
        return {
            "images": self.images,
            "bboxes": self.bboxes,
            "labels": self.labels,
            "avg_negative_labels": self.avg_negative_labels,
            "avg_label_tokens": self.avg_label_tokens,
            "avg_label_words": self.avg_label_words,
        }


def compute_stats(
    gt: GroundTruthSet,
    negatives: Mapping[str, Sequence[str]] | None = None,
    tokenizer: Callable[[str], int] | None = None,
) -> DatasetStats:
    """Count images, boxes, and labels; average label lengths and negatives.

    avg_label_words always uses whitespace splitting; avg_label_tokens uses
    the supplied tokenizer (default: the same whitespace count). Averages
    over empty collections come out 0.0 (or None for absent negatives).
    """
    tokenizer = tokenizer or whitespace_tokens
    names = [gt.categories[cid].name for cid in sorted(gt.categories)]
    n = len(names)
    avg_words = math.fsum(len(name.split()) for name in names) / n if n else 0.0
    avg_tokens = math.fsum(tokenizer(name) for name in names) / n if n else 0.0
    if negatives is None:
        avg_neg = None
    elif negatives:
        avg_neg = math.fsum(len(v) for v in negatives.values()) / len(negatives)
    else:
        avg_neg = 0.0
    return DatasetStats(
        images=len(gt.images),
        bboxes=len(gt.annotations),
        labels=n,
        avg_negative_labels=avg_neg,
        avg_label_tokens=avg_tokens,
        avg_label_words=avg_words,
    )
