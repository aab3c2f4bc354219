"""Candidate filtering: keep only shared n-grams that look like noun phrases.

Three layers, applied after edge-stopword trimming:

* undesired words (modals, particles, interjections) anywhere in the key
  reject it, as does a key with no alphabetic character (bare numerals and
  clock times are not referring expressions);
* a context rule keyed by the lowercased surface form of the occurrence's
  head token decides that occurrence alone: if any listed pattern occurs in
  the lowercased utterance the occurrence is verb usage and is dropped,
  otherwise it is kept even when the head is in the verb dictionary;
* otherwise a head token in the verb or adjective/adverb dictionary rejects
  the occurrence.

Only context rules make the filter occurrence-sensitive; everything else is
a property of the key. After filtering, keys must still be shared by both
speakers or they are dropped entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from .corpus import Dialogue, Speaker
from .errors import DictionaryError
from .lexicon import ExpressionKey, Occurrence
from .normalize import NormalizationConfig, normalize_token

_DICTIONARY_FILES = {
    "stopwords": "stopwords.txt",
    "verbs": "verbs.txt",
    "adjectives_adverbs": "adjectives_adverbs.txt",
    "undesired": "undesired.txt",
}
_CONTEXT_RULES_FILE = "context_rules.tsv"


@dataclass(frozen=True)
class FilterDictionaries:
    stopwords: frozenset[str]
    verbs: frozenset[str]
    adjectives_adverbs: frozenset[str]
    undesired: frozenset[str]
    # lowercased surface form -> literal substring patterns (spaces significant)
    context_rules: dict[str, tuple[str, ...]]


def _read_lines(dicts_dir: str | None, name: str) -> tuple[list[str], str]:
    if dicts_dir is not None:
        path = f"{dicts_dir.rstrip('/')}/{name}"
        try:
            with open(path, encoding="utf-8") as handle:
                return handle.read().splitlines(), path
        except OSError as exc:
            raise DictionaryError(f"cannot read dictionary {path!r}: {exc}") from exc
    text = (resources.files("entrain") / "data" / name).read_text(encoding="utf-8")
    return text.splitlines(), name


def _load_word_set(
    dicts_dir: str | None, name: str, cfg: NormalizationConfig
) -> frozenset[str]:
    lines, origin = _read_lines(dicts_dir, name)
    words = set()
    for lineno, line in enumerate(lines, start=1):
        word = line.strip()
        if not word or word.startswith("#"):
            continue
        if len(word.split()) != 1:
            raise DictionaryError(
                f"{origin}:{lineno}: expected one word per line, got {word!r}"
            )
        words.add(normalize_token(word, cfg))
    return frozenset(words)


def _load_context_rules(dicts_dir: str | None) -> dict[str, tuple[str, ...]]:
    lines, origin = _read_lines(dicts_dir, _CONTEXT_RULES_FILE)
    rules: dict[str, list[str]] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise DictionaryError(
                f"{origin}:{lineno}: expected 'word<TAB>pattern', got {line!r}"
            )
        word, pattern = line.split("\t", 1)
        word = word.strip().lower()
        # Patterns keep leading/trailing spaces; only the newline is gone.
        if not word or not pattern:
            raise DictionaryError(f"{origin}:{lineno}: empty word or pattern")
        rules.setdefault(word, []).append(pattern.lower())
    return {word: tuple(patterns) for word, patterns in rules.items()}


def load_dictionaries(
    dicts_dir: str | None, cfg: NormalizationConfig
) -> FilterDictionaries:
    """Load filter dictionaries from a directory, or the bundled defaults.

    Word entries are canonicalized with the active normalizer so the files
    may contain natural inflected forms.
    """
    sets = {
        field: _load_word_set(dicts_dir, name, cfg)
        for field, name in _DICTIONARY_FILES.items()
    }
    return FilterDictionaries(
        stopwords=sets["stopwords"],
        verbs=sets["verbs"],
        adjectives_adverbs=sets["adjectives_adverbs"],
        undesired=sets["undesired"],
        context_rules=_load_context_rules(dicts_dir),
    )


def _trim_bounds(key: ExpressionKey, stopwords: frozenset[str]) -> tuple[int, int] | None:
    """(lead, trail) tokens to strip, or None if nothing would remain."""
    lead = 0
    trail = len(key)
    while lead < trail and key[lead] in stopwords:
        lead += 1
    while trail > lead and key[trail - 1] in stopwords:
        trail -= 1
    if lead == trail:
        return None
    return lead, len(key) - trail


def trim_edges(key: ExpressionKey, dicts: FilterDictionaries) -> ExpressionKey | None:
    """Strip leading/trailing stopwords; None if the key is all stopwords."""
    bounds = _trim_bounds(key, dicts.stopwords)
    if bounds is None:
        return None
    lead, trail = bounds
    return key[lead: len(key) - trail]


def _has_alpha(key: ExpressionKey) -> bool:
    return any(ch.isalpha() for token in key for ch in token)


def is_noun_phrase(
    key: ExpressionKey,
    context: str,
    dicts: FilterDictionaries,
    head_surface: str | None = None,
) -> bool:
    """Decide whether one occurrence of an edge-trimmed key is a noun phrase.

    ``context`` is the raw text of the utterance the occurrence appears in;
    ``head_surface`` is the surface form of its last token (defaults to the
    canonical head, which is only right when the two coincide).
    """
    if any(token in dicts.undesired for token in key):
        return False
    if not _has_alpha(key):
        return False
    head = key[-1]
    surface = (head_surface or head).lower()
    patterns = dicts.context_rules.get(surface)
    if patterns is not None:
        lowered = context.lower()
        return not any(pattern in lowered for pattern in patterns)
    return head not in dicts.verbs and head not in dicts.adjectives_adverbs


def apply_filter(
    candidates: dict[ExpressionKey, list[Occurrence]],
    dialogue: Dialogue,
    dicts: FilterDictionaries,
) -> dict[ExpressionKey, list[Occurrence]]:
    """Trim, merge, and prune mined candidates.

    Keys collapsing to the same trimmed key have their occurrence lists
    merged with spans shrunk accordingly (exact duplicates dropped). Keys
    whose surviving occurrences no longer cover both speakers are removed.
    """
    merged: dict[ExpressionKey, dict[tuple[int, tuple[int, int]], Occurrence]] = {}
    for key, occurrences in candidates.items():
        bounds = _trim_bounds(key, dicts.stopwords)
        if bounds is None:
            continue
        lead, trail = bounds
        trimmed = key[lead: len(key) - trail]
        bucket = merged.setdefault(trimmed, {})
        for occ in occurrences:
            start, end = occ.token_span
            span = (start + lead, end - trail)
            dedup_key = (occ.utterance_index, span)
            if dedup_key not in bucket:
                bucket[dedup_key] = Occurrence(
                    utterance_index=occ.utterance_index,
                    speaker=occ.speaker,
                    token_span=span,
                )

    surviving: dict[ExpressionKey, list[Occurrence]] = {}
    for key, bucket in merged.items():
        if any(token in dicts.undesired for token in key) or not _has_alpha(key):
            continue
        kept = []
        for occ in bucket.values():
            utterance = dialogue.utterances[occ.utterance_index - 1]
            head_surface = utterance.tokens[occ.token_span[1] - 1].surface
            if is_noun_phrase(key, utterance.raw_text, dicts, head_surface):
                kept.append(occ)
        speakers = {occ.speaker for occ in kept}
        if speakers >= {Speaker.USER, Speaker.AGENT}:
            kept.sort(key=lambda occ: (occ.utterance_index, occ.token_span))
            surviving[key] = kept
    return surviving
