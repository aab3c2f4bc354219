"""End-to-end annotation of dialogues and the versioned record format.

An annotation record bundles the dialogue text, the mined lexicon, and all
computed measures into one JSON-serializable object (``schema: 1``). Exact
ratios are stored as ``[numerator, denominator]`` pairs so records round-trip
without loss; every downstream command can rebuild what it needs from the
record alone, with no re-normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional

from .corpus import Dialogue, Speaker, Utterance
from .errors import ValidationError
from .filtering import FilterDictionaries
from .lexicon import (
    DEFAULT_MAX_NGRAM,
    DialogueLexicon,
    LexiconEntry,
    Occurrence,
    OccurrenceKind,
    build_lexicon,
)
from .measures import (
    DialogueMeasures,
    ExpressionMeasures,
    TurnEntrainment,
    dialogue_measures,
)
from .normalize import NormalizationConfig, normalize_dialogue

SCHEMA_VERSION = 1


@dataclass
class AnnotationRecord:
    dialogue: Dialogue
    lexicon: DialogueLexicon
    measures: DialogueMeasures

    @property
    def dialogue_id(self) -> str:
        return self.dialogue.dialogue_id


def annotate_dialogue(
    dialogue: Dialogue,
    cfg: NormalizationConfig,
    dicts: FilterDictionaries,
    max_ngram: int = DEFAULT_MAX_NGRAM,
) -> AnnotationRecord:
    """Normalize in place, build the lexicon, and compute all measures."""
    normalize_dialogue(dialogue, cfg)
    lexicon = build_lexicon(dialogue, dicts, max_ngram=max_ngram)
    return AnnotationRecord(
        dialogue=dialogue,
        lexicon=lexicon,
        measures=dialogue_measures(lexicon, dialogue),
    )


def annotate_corpus(
    dialogues: Iterable[Dialogue],
    cfg: NormalizationConfig,
    dicts: FilterDictionaries,
    max_ngram: int = DEFAULT_MAX_NGRAM,
) -> Iterator[AnnotationRecord]:
    for dialogue in dialogues:
        yield annotate_dialogue(dialogue, cfg, dicts, max_ngram=max_ngram)


def _ratio(value: Optional[Fraction]) -> Optional[list[int]]:
    if value is None:
        return None
    return [value.numerator, value.denominator]


def _unratio(value: Any, where: str) -> Optional[Fraction]:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"{where}: expected [numerator, denominator] pair")
    return Fraction(int(value[0]), int(value[1]))


def _expression_to_dict(m: ExpressionMeasures) -> dict[str, Any]:
    return {
        "frequency": m.frequency,
        "size": m.size,
        "span": m.span,
        "density": _ratio(m.density),
        "priming": m.priming,
        "priming_distance": m.priming_distance,
    }


def record_to_dict(record: AnnotationRecord) -> dict[str, Any]:
    dialogue, lexicon, measures = record.dialogue, record.lexicon, record.measures
    return {
        "schema": SCHEMA_VERSION,
        "dialogue_id": dialogue.dialogue_id,
        "domains": list(dialogue.domains),
        "utterances": [
            {
                "index": u.index,
                "speaker": u.speaker.value,
                "text": u.raw_text,
                "acts": [list(act) for act in u.acts],
            }
            for u in dialogue
        ],
        "entries": [
            {
                "key": list(entry.key),
                "display_form": entry.display_form,
                "initiator": entry.initiator.value,
                "established_at": entry.established_at,
                "occurrences": [
                    {
                        "utterance_index": occ.utterance_index,
                        "speaker": occ.speaker.value,
                        "token_span": list(occ.token_span),
                        "kind": occ.kind.value,
                    }
                    for occ in entry.occurrences
                ],
            }
            for entry in lexicon
        ],
        "per_turn": [
            {
                "utterance_index": row.utterance_index,
                "speaker": row.speaker.value,
                "count": row.count,
            }
            for row in measures.per_turn
        ],
        "measures": {
            "els": measures.els,
            "entr_user": _ratio(measures.entr_user),
            "entr_agent": _ratio(measures.entr_agent),
            "ier_user": _ratio(measures.ier_user),
            "ier_agent": _ratio(measures.ier_agent),
            "err_user": _ratio(measures.err_user),
            "err_agent": _ratio(measures.err_agent),
            "expressions": {
                key: _expression_to_dict(m)
                for key, m in measures.per_expression.items()
            },
        },
    }


def record_from_dict(data: dict[str, Any]) -> AnnotationRecord:
    """Rebuild a record from its JSON form.

    The reconstructed dialogue carries no token streams; everything the
    measures and the task builder need is already in the record.
    """
    if not isinstance(data, dict):
        raise ValidationError("annotation record must be a JSON object")
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported annotation schema {schema!r}, expected {SCHEMA_VERSION}"
        )
    try:
        dialogue_id = data["dialogue_id"]
        utterances = [
            Utterance(
                dialogue_id=dialogue_id,
                index=u["index"],
                speaker=Speaker(u["speaker"]),
                raw_text=u["text"],
                acts=[tuple(act) for act in u.get("acts", [])],
            )
            for u in data["utterances"]
        ]
        dialogue = Dialogue(
            dialogue_id=dialogue_id,
            utterances=utterances,
            domains=list(data.get("domains", [])),
        )
        entries = [
            LexiconEntry(
                key=tuple(e["key"]),
                display_form=e["display_form"],
                initiator=Speaker(e["initiator"]),
                established_at=e["established_at"],
                occurrences=[
                    Occurrence(
                        utterance_index=o["utterance_index"],
                        speaker=Speaker(o["speaker"]),
                        token_span=(o["token_span"][0], o["token_span"][1]),
                        kind=OccurrenceKind(o["kind"]),
                    )
                    for o in e["occurrences"]
                ],
            )
            for e in data["entries"]
        ]
        raw_measures = data["measures"]
        measures = DialogueMeasures(
            dialogue_id=dialogue_id,
            els=raw_measures["els"],
            entr_user=_unratio(raw_measures["entr_user"], "entr_user"),
            entr_agent=_unratio(raw_measures["entr_agent"], "entr_agent"),
            ier_user=_unratio(raw_measures["ier_user"], "ier_user"),
            ier_agent=_unratio(raw_measures["ier_agent"], "ier_agent"),
            err_user=_unratio(raw_measures["err_user"], "err_user"),
            err_agent=_unratio(raw_measures["err_agent"], "err_agent"),
            per_turn=[
                TurnEntrainment(
                    utterance_index=row["utterance_index"],
                    speaker=Speaker(row["speaker"]),
                    count=row["count"],
                )
                for row in data["per_turn"]
            ],
            per_expression={
                key: ExpressionMeasures(
                    frequency=m["frequency"],
                    size=m["size"],
                    span=m["span"],
                    density=_unratio(m["density"], "density"),
                    priming=m["priming"],
                    priming_distance=m["priming_distance"],
                )
                for key, m in raw_measures["expressions"].items()
            },
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed annotation record: {exc!r}") from exc
    lexicon = DialogueLexicon(dialogue_id=dialogue_id, entries=entries)
    return AnnotationRecord(dialogue=dialogue, lexicon=lexicon, measures=measures)
