"""Shared-expression lexicon for one dialogue.

An expression key is the tuple of canonical tokens of a mined n-gram.
Mining keeps every n-gram (up to a length cap) that both speakers produce
at least once; occurrences within an utterance are taken leftmost-greedy
and non-overlapping per key. Masked tokens never participate.

An occurrence is Constrained when a strictly longer surviving key has an
occurrence in the same utterance whose token span strictly contains it,
and Free otherwise. An entry becomes established at the first utterance
index by which both speakers have produced it and at least one occurrence
is Free; both conditions may be met by the establishing utterance itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, Optional

from .corpus import Dialogue, Speaker
from .errors import ValidationError

if TYPE_CHECKING:
    from .filtering import FilterDictionaries

ExpressionKey = tuple[str, ...]

DEFAULT_MAX_NGRAM = 20


class OccurrenceKind(enum.Enum):
    FREE = "free"
    CONSTRAINED = "constrained"


@dataclass
class Occurrence:
    utterance_index: int
    speaker: Speaker
    token_span: tuple[int, int]
    kind: Optional[OccurrenceKind] = None

    @property
    def length(self) -> int:
        return self.token_span[1] - self.token_span[0]


@dataclass
class LexiconEntry:
    key: ExpressionKey
    display_form: str
    occurrences: list[Occurrence]
    initiator: Speaker
    established_at: Optional[int]

    @property
    def established(self) -> bool:
        return self.established_at is not None

    def free_occurrences(self) -> list[Occurrence]:
        return [occ for occ in self.occurrences if occ.kind is OccurrenceKind.FREE]


@dataclass
class DialogueLexicon:
    dialogue_id: str
    entries: list[LexiconEntry]

    def __iter__(self) -> Iterator[LexiconEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def established_entries(self) -> list[LexiconEntry]:
        return [entry for entry in self.entries if entry.established]

    def entry(self, key: ExpressionKey) -> LexiconEntry:
        for candidate in self.entries:
            if candidate.key == key:
                return candidate
        raise KeyError(key)


def _greedy_spans(starts: list[int], length: int) -> list[tuple[int, int]]:
    # starts must be sorted ascending
    spans = []
    next_free = 0
    for start in starts:
        if start >= next_free:
            spans.append((start, start + length))
            next_free = start + length
    return spans


def mine_shared(
    dialogue: Dialogue, max_ngram: int = DEFAULT_MAX_NGRAM
) -> dict[ExpressionKey, list[Occurrence]]:
    """Mine canonical n-grams produced by both speakers.

    Returns every key with its leftmost-greedy, non-overlapping occurrences
    in utterance order. Requires the dialogue to be normalized.
    """
    if max_ngram < 1:
        raise ValidationError(f"max_ngram must be >= 1, got {max_ngram}")
    vocab_by_speaker: dict[Speaker, set[str]] = {Speaker.USER: set(), Speaker.AGENT: set()}
    for utterance in dialogue:
        if utterance.tokens is None:
            raise ValidationError(
                f"dialogue {dialogue.dialogue_id!r} is not normalized"
            )
        vocab_by_speaker[utterance.speaker].update(
            token.canonical for token in utterance.tokens if not token.is_mask
        )
    shared_vocab = vocab_by_speaker[Speaker.USER] & vocab_by_speaker[Speaker.AGENT]
    if not shared_vocab:
        return {}

    # key -> speaker set, and key -> utterance index -> sorted match starts
    speakers_seen: dict[ExpressionKey, set[Speaker]] = {}
    starts_by_utterance: dict[ExpressionKey, dict[int, list[int]]] = {}
    for utterance in dialogue:
        canonicals = [token.canonical for token in utterance.tokens]
        usable = [
            not token.is_mask and token.canonical in shared_vocab
            for token in utterance.tokens
        ]
        n = len(canonicals)
        run_start = 0
        while run_start < n:
            if not usable[run_start]:
                run_start += 1
                continue
            run_end = run_start
            while run_end < n and usable[run_end]:
                run_end += 1
            for start in range(run_start, run_end):
                limit = min(run_end - start, max_ngram)
                for length in range(1, limit + 1):
                    key = tuple(canonicals[start: start + length])
                    speakers_seen.setdefault(key, set()).add(utterance.speaker)
                    starts_by_utterance.setdefault(key, {}).setdefault(
                        utterance.index, []
                    ).append(start)
            run_start = run_end

    mined: dict[ExpressionKey, list[Occurrence]] = {}
    for key, speakers in speakers_seen.items():
        if speakers != {Speaker.USER, Speaker.AGENT}:
            continue
        occurrences = []
        for index in sorted(starts_by_utterance[key]):
            speaker = dialogue.utterances[index - 1].speaker
            for span in _greedy_spans(starts_by_utterance[key][index], len(key)):
                occurrences.append(
                    Occurrence(utterance_index=index, speaker=speaker, token_span=span)
                )
        mined[key] = occurrences
    return mined


def classify_instances(candidates: dict[ExpressionKey, list[Occurrence]]) -> None:
    """Assign Free/Constrained to every occurrence, in place.

    Containment is judged against the candidate keys given here, so callers
    must filter first if rejected superstrings should not demote anything.
    """
    spans_by_utterance: dict[int, list[tuple[int, int]]] = {}
    for occurrences in candidates.values():
        for occ in occurrences:
            spans_by_utterance.setdefault(occ.utterance_index, []).append(occ.token_span)
    for occurrences in candidates.values():
        for occ in occurrences:
            start, end = occ.token_span
            occ.kind = OccurrenceKind.FREE
            for other_start, other_end in spans_by_utterance[occ.utterance_index]:
                strictly_longer = (other_end - other_start) > (end - start)
                if strictly_longer and other_start <= start and end <= other_end:
                    occ.kind = OccurrenceKind.CONSTRAINED
                    break


def establish(occurrences: Iterable[Occurrence]) -> Optional[int]:
    """First utterance index by which sharing and a Free instance both hold."""
    ordered = sorted(occurrences, key=lambda occ: (occ.utterance_index, occ.token_span))
    speakers: set[Speaker] = set()
    free_seen = False
    current = None
    for occ in ordered:
        if occ.kind is None:
            raise ValidationError("occurrences must be classified before establish()")
        if current is not None and occ.utterance_index != current:
            if len(speakers) == 2 and free_seen:
                return current
        current = occ.utterance_index
        speakers.add(occ.speaker)
        free_seen = free_seen or occ.kind is OccurrenceKind.FREE
    if current is not None and len(speakers) == 2 and free_seen:
        return current
    return None


def build_lexicon(
    dialogue: Dialogue,
    dicts: FilterDictionaries,
    max_ngram: int = DEFAULT_MAX_NGRAM,
) -> DialogueLexicon:
    """Mine, filter, classify, and establish; the full per-dialogue pipeline."""
    from .filtering import apply_filter  # import here to break the module cycle

    candidates = mine_shared(dialogue, max_ngram=max_ngram)
    filtered = apply_filter(candidates, dialogue, dicts)
    classify_instances(filtered)
    entries = []
    for key, occurrences in filtered.items():
        first = occurrences[0]
        utterance = dialogue.utterances[first.utterance_index - 1]
        start_char = utterance.tokens[first.token_span[0]].char_span[0]
        end_char = utterance.tokens[first.token_span[1] - 1].char_span[1]
        entries.append(
            LexiconEntry(
                key=key,
                display_form=utterance.raw_text[start_char:end_char],
                occurrences=occurrences,
                initiator=first.speaker,
                established_at=establish(occurrences),
            )
        )
    entries.sort(key=lambda e: (e.occurrences[0].utterance_index, e.occurrences[0].token_span, e.key))
    return DialogueLexicon(dialogue_id=dialogue.dialogue_id, entries=entries)
