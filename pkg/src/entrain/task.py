"""Expression-extraction task: sample construction and span-level scoring.

A sample asks a predictor to mark, in one target utterance, every Free
occurrence of an entry established at or before that utterance. Samples
are only emitted for utterances that carry at least one such occurrence.

Gold is computed from the full-dialogue lexicon regardless of the history
window. When the window hides all of the other speaker's occurrences of an
entry, its gold instances in the target are out-of-window: no predictor
could justify them from the visible context, and each one is charged as an
automatic false negative during scoring.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import Dialogue, Speaker
from .errors import ValidationError
from .lexicon import DialogueLexicon, ExpressionKey, OccurrenceKind

Span = tuple[int, int]

ROLE_CHOICES = ("agent", "user", "both")


@dataclass(frozen=True)
class HistoryTurn:
    index: int
    speaker: Speaker
    text: str


@dataclass(frozen=True)
class GoldSpan:
    token_span: Span
    key: ExpressionKey


@dataclass(frozen=True)
class ExtractionSample:
    dialogue_id: str
    target_index: int
    role: Speaker
    history: list[HistoryTurn]
    target_text: str
    gold_spans: list[GoldSpan]
    out_of_window_spans: list[Span]

    @property
    def sample_id(self) -> str:
        return f"{self.dialogue_id}:{self.target_index}"

    @property
    def out_of_window_gold(self) -> int:
        return len(self.out_of_window_spans)

    def matchable_spans(self) -> list[Span]:
        hidden = set(self.out_of_window_spans)
        return [gold.token_span for gold in self.gold_spans if gold.token_span not in hidden]


@dataclass(frozen=True)
class EvalResult:
    tp: int
    fp: int
    fn: int
    precision: Fraction
    recall: Fraction
    f1: Fraction


def sample_to_dict(sample: ExtractionSample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "dialogue_id": sample.dialogue_id,
        "target_index": sample.target_index,
        "role": sample.role.value,
        "history": [
            {"index": turn.index, "speaker": turn.speaker.value, "text": turn.text}
            for turn in sample.history
        ],
        "target_text": sample.target_text,
        "gold_spans": [
            {"span": list(gold.token_span), "key": " ".join(gold.key)}
            for gold in sample.gold_spans
        ],
        "out_of_window_spans": [list(span) for span in sample.out_of_window_spans],
    }


def sample_from_dict(data: dict) -> ExtractionSample:
    try:
        return ExtractionSample(
            dialogue_id=data["dialogue_id"],
            target_index=data["target_index"],
            role=Speaker(data["role"]),
            history=[
                HistoryTurn(
                    index=turn["index"],
                    speaker=Speaker(turn["speaker"]),
                    text=turn["text"],
                )
                for turn in data["history"]
            ],
            target_text=data["target_text"],
            gold_spans=[
                GoldSpan(
                    token_span=(gold["span"][0], gold["span"][1]),
                    key=tuple(gold["key"].split(" ")),
                )
                for gold in data["gold_spans"]
            ],
            out_of_window_spans=[
                (span[0], span[1]) for span in data["out_of_window_spans"]
            ],
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed extraction sample: {exc!r}") from exc


def _selected_speakers(roles: str) -> set[Speaker]:
    if roles == "agent":
        return {Speaker.AGENT}
    if roles == "user":
        return {Speaker.USER}
    if roles == "both":
        return {Speaker.USER, Speaker.AGENT}
    raise ValidationError(f"roles must be one of {ROLE_CHOICES}, got {roles!r}")


def build_samples(
    dialogue: Dialogue,
    lexicon: DialogueLexicon,
    history: Optional[int] = None,
    roles: str = "agent",
) -> list[ExtractionSample]:
    """Build extraction samples for one dialogue.

    ``history`` is the number of preceding utterances shown to the
    predictor; None means the full preceding context.
    """
    if history is not None and history < 1:
        raise ValidationError(f"history must be >= 1 or None, got {history}")
    speakers = _selected_speakers(roles)
    samples = []
    for utterance in dialogue:
        if utterance.speaker not in speakers:
            continue
        target = utterance.index
        window_start = 1 if history is None else max(1, target - history)
        gold: list[GoldSpan] = []
        hidden: list[Span] = []
        for entry in lexicon.established_entries():
            if entry.established_at > target:
                continue
            in_target = [
                occ
                for occ in entry.occurrences
                if occ.utterance_index == target and occ.kind is OccurrenceKind.FREE
            ]
            if not in_target:
                continue
            other_evidence = any(
                occ.speaker is not utterance.speaker
                and window_start <= occ.utterance_index < target
                for occ in entry.occurrences
            )
            for occ in in_target:
                gold.append(GoldSpan(token_span=occ.token_span, key=entry.key))
                if not other_evidence:
                    hidden.append(occ.token_span)
        if not gold:
            continue
        gold.sort(key=lambda g: g.token_span)
        hidden.sort()
        samples.append(
            ExtractionSample(
                dialogue_id=dialogue.dialogue_id,
                target_index=target,
                role=utterance.speaker,
                history=[
                    HistoryTurn(index=u.index, speaker=u.speaker, text=u.raw_text)
                    for u in dialogue
                    if window_start <= u.index < target
                ],
                target_text=utterance.raw_text,
                gold_spans=gold,
                out_of_window_spans=hidden,
            )
        )
    return samples


def oracle_within_window(
    samples: Iterable[ExtractionSample],
) -> dict[str, list[Span]]:
    """Reference predictor: echoes every gold span the window can justify."""
    return {sample.sample_id: sample.matchable_spans() for sample in samples}


def evaluate(
    samples: Sequence[ExtractionSample],
    predictions: Mapping[str, Sequence[Span]],
) -> EvalResult:
    """Exact-span scoring of predictions against sample gold.

    Samples without a prediction entry count as empty predictions. Every
    out-of-window gold instance adds one false negative on top of the
    usual confusion counts.
    """
    by_id = {sample.sample_id: sample for sample in samples}
    unknown = set(predictions) - set(by_id)
    if unknown:
        raise ValidationError(
            f"predictions reference unknown sample ids: {sorted(unknown)[:5]}"
        )
    tp = fp = fn = 0
    for sample in samples:
        predicted = {tuple(span) for span in predictions.get(sample.sample_id, ())}
        matchable = set(sample.matchable_spans())
        tp += len(predicted & matchable)
        fp += len(predicted - matchable)
        fn += len(matchable - predicted) + sample.out_of_window_gold
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall
        else Fraction(0)
    )
    return EvalResult(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)
