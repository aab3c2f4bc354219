"""Entrainment measures over a dialogue and its lexicon.

All ratios are exact ``fractions.Fraction`` values; rounding is left to
the presentation layer. Utterance-level entrainment counts Free
occurrences of entries already established at that utterance (an entry
established by utterance j counts within j itself).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .corpus import Dialogue, Speaker
from .errors import ValidationError
from .lexicon import DialogueLexicon, LexiconEntry, OccurrenceKind


@dataclass(frozen=True)
class TurnEntrainment:
    utterance_index: int
    speaker: Speaker
    count: int


@dataclass(frozen=True)
class ExpressionMeasures:
    frequency: int
    size: int
    span: int
    density: Fraction
    priming: int
    priming_distance: int


@dataclass(frozen=True)
class DialogueMeasures:
    dialogue_id: str
    els: int
    entr_user: Fraction
    entr_agent: Fraction
    ier_user: Optional[Fraction]
    ier_agent: Optional[Fraction]
    err_user: Fraction
    err_agent: Fraction
    per_turn: list[TurnEntrainment]
    # keyed by the space-joined canonical key, established entries only
    per_expression: dict[str, ExpressionMeasures]


def turn_counts(lexicon: DialogueLexicon, dialogue: Dialogue) -> list[TurnEntrainment]:
    """Free occurrences of already-established entries, per utterance."""
    counts = {utterance.index: 0 for utterance in dialogue}
    for entry in lexicon.established_entries():
        for occ in entry.occurrences:
            if occ.kind is OccurrenceKind.FREE and occ.utterance_index >= entry.established_at:
                counts[occ.utterance_index] += 1
    return [
        TurnEntrainment(
            utterance_index=utterance.index,
            speaker=utterance.speaker,
            count=counts[utterance.index],
        )
        for utterance in dialogue
    ]


def entr(lexicon: DialogueLexicon, dialogue: Dialogue, speaker: Speaker) -> Fraction:
    """Mean per-utterance entrainment count for one speaker."""
    rows = [row for row in turn_counts(lexicon, dialogue) if row.speaker is speaker]
    if not rows:
        raise ValidationError(
            f"dialogue {dialogue.dialogue_id!r} has no {speaker.value} utterances"
        )
    return Fraction(sum(row.count for row in rows), len(rows))


def els(lexicon: DialogueLexicon) -> int:
    return len(lexicon.established_entries())


def ier(lexicon: DialogueLexicon, speaker: Speaker) -> Optional[Fraction]:
    """Share of established entries initiated by the speaker; None when ELS=0."""
    established = lexicon.established_entries()
    if not established:
        return None
    initiated = sum(1 for entry in established if entry.initiator is speaker)
    return Fraction(initiated, len(established))


def err(lexicon: DialogueLexicon, dialogue: Dialogue, speaker: Speaker) -> Fraction:
    """Fraction of the dialogue's tokens inside the speaker's entry instances.

    Token positions covered by any occurrence (Free or Constrained) of an
    established entry are counted once each; the denominator is the number
    of non-mask tokens in the whole dialogue.
    """
    covered: set[tuple[int, int]] = set()
    for entry in lexicon.established_entries():
        for occ in entry.occurrences:
            if dialogue.utterances[occ.utterance_index - 1].speaker is not speaker:
                continue
            start, end = occ.token_span
            covered.update((occ.utterance_index, pos) for pos in range(start, end))
    total = sum(
        1
        for utterance in dialogue
        for token in utterance.tokens
        if not token.is_mask
    )
    if total == 0:
        return Fraction(0)
    return Fraction(len(covered), total)


def expression_measures(entry: LexiconEntry, dialogue: Dialogue) -> ExpressionMeasures:
    """Per-expression statistics; the entry must be established."""
    if not entry.established:
        raise ValidationError(f"entry {entry.key!r} is not established")
    indices = sorted({occ.utterance_index for occ in entry.occurrences})
    frequency = len(indices)
    span = indices[-1] - indices[0] + 1
    other = entry.initiator.other
    other_first = min(
        occ.utterance_index for occ in entry.occurrences if occ.speaker is other
    )
    priming = sum(
        1
        for occ in entry.occurrences
        if occ.speaker is entry.initiator and occ.utterance_index < other_first
    )
    return ExpressionMeasures(
        frequency=frequency,
        size=len(entry.key),
        span=span,
        density=Fraction(frequency, span),
        priming=priming,
        priming_distance=other_first - indices[0],
    )


def dialogue_measures(lexicon: DialogueLexicon, dialogue: Dialogue) -> DialogueMeasures:
    """Bundle every dialogue-level measure for reporting."""
    return DialogueMeasures(
        dialogue_id=dialogue.dialogue_id,
        els=els(lexicon),
        entr_user=entr(lexicon, dialogue, Speaker.USER),
        entr_agent=entr(lexicon, dialogue, Speaker.AGENT),
        ier_user=ier(lexicon, Speaker.USER),
        ier_agent=ier(lexicon, Speaker.AGENT),
        err_user=err(lexicon, dialogue, Speaker.USER),
        err_agent=err(lexicon, dialogue, Speaker.AGENT),
        per_turn=turn_counts(lexicon, dialogue),
        per_expression={
            " ".join(entry.key): expression_measures(entry, dialogue)
            for entry in lexicon.established_entries()
        },
    )
