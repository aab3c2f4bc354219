"""HTTP service exposing annotation, sample building, and scoring.

The service is stateless: every request carries a full dialogue (or full
samples), so replies are reproducible from the request body and the
server's configuration alone. Input problems map to 400; payload shape
errors are FastAPI's usual 422.
"""

from __future__ import annotations

import dataclasses
from typing import Literal, Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .corpus import Dialogue, Speaker, Utterance, speaker_for_index
from .errors import InputError, ValidationError
from .filtering import FilterDictionaries, load_dictionaries
from .lexicon import DEFAULT_MAX_NGRAM
from .normalize import NormalizationConfig
from .pipeline import SCHEMA_VERSION, annotate_dialogue, record_to_dict
from .task import build_samples, evaluate, sample_from_dict, sample_to_dict

Span = tuple[int, int]


class TurnIn(BaseModel):
    speaker: Literal["user", "agent"]
    text: str
    acts: list[tuple[str, str, str]] = []


class DialogueIn(BaseModel):
    dialogue_id: str = "dialogue"
    turns: list[TurnIn] = Field(min_length=1)
    domains: list[str] = []


class AnnotateRequest(BaseModel):
    dialogue: DialogueIn
    seed: Optional[int] = None
    max_ngram: Optional[int] = Field(default=None, ge=1)


class SamplesRequest(BaseModel):
    dialogue: DialogueIn
    history: Union[int, Literal["full"]] = "full"
    roles: Literal["agent", "user", "both"] = "agent"
    seed: Optional[int] = None
    max_ngram: Optional[int] = Field(default=None, ge=1)


class OccurrenceOut(BaseModel):
    utterance_index: int
    speaker: str
    token_span: Span
    kind: str


class EntryOut(BaseModel):
    key: list[str]
    display_form: str
    initiator: str
    established_at: Optional[int]
    occurrences: list[OccurrenceOut]


class UtteranceOut(BaseModel):
    index: int
    speaker: str
    text: str
    acts: list[tuple[str, str, str]]


class TurnCountOut(BaseModel):
    utterance_index: int
    speaker: str
    count: int


class ExpressionMeasuresOut(BaseModel):
    frequency: int
    size: int
    span: int
    density: tuple[int, int]
    priming: int
    priming_distance: int


class MeasuresOut(BaseModel):
    els: int
    entr_user: tuple[int, int]
    entr_agent: tuple[int, int]
    ier_user: Optional[tuple[int, int]]
    ier_agent: Optional[tuple[int, int]]
    err_user: tuple[int, int]
    err_agent: tuple[int, int]
    expressions: dict[str, ExpressionMeasuresOut]


class AnnotationOut(BaseModel):
    schema_version: int = Field(alias="schema")
    dialogue_id: str
    domains: list[str]
    utterances: list[UtteranceOut]
    entries: list[EntryOut]
    per_turn: list[TurnCountOut]
    measures: MeasuresOut


class HistoryTurnOut(BaseModel):
    index: int
    speaker: str
    text: str


class GoldSpanOut(BaseModel):
    span: Span
    key: str


class SampleOut(BaseModel):
    sample_id: str
    dialogue_id: str
    target_index: int
    role: str
    history: list[HistoryTurnOut]
    target_text: str
    gold_spans: list[GoldSpanOut]
    out_of_window_spans: list[Span]


class SamplesResponse(BaseModel):
    samples: list[SampleOut]


class PredictionIn(BaseModel):
    sample_id: str
    spans: list[Span]


class EvaluateRequest(BaseModel):
    samples: list[SampleOut] = Field(min_length=1)
    predictions: list[PredictionIn]


class EvaluateResponse(BaseModel):
    samples: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


class HealthResponse(BaseModel):
    status: str
    version: str
    annotation_schema: int


def _build_dialogue(payload: DialogueIn) -> Dialogue:
    utterances = []
    for position, turn in enumerate(payload.turns, start=1):
        speaker = Speaker(turn.speaker)
        if speaker is not speaker_for_index(position):
            raise ValidationError(
                f"turn {position} spoken by {speaker.value}, expected "
                f"{speaker_for_index(position).value} (user speaks first, "
                "speakers alternate)"
            )
        utterances.append(
            Utterance(
                dialogue_id=payload.dialogue_id,
                index=position,
                speaker=speaker,
                raw_text=turn.text,
                acts=list(turn.acts),
            )
        )
    return Dialogue(
        dialogue_id=payload.dialogue_id,
        utterances=utterances,
        domains=list(payload.domains),
    )


def create_app(
    cfg: Optional[NormalizationConfig] = None,
    dicts: Optional[FilterDictionaries] = None,
    max_ngram: int = DEFAULT_MAX_NGRAM,
) -> FastAPI:
    if cfg is None:
        cfg = NormalizationConfig.load()
    if dicts is None:
        dicts = load_dictionaries(None, cfg)

    app = FastAPI(title="entrain", version=__version__)

    @app.exception_handler(InputError)
    async def _input_error(request: Request, exc: InputError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def _request_cfg(seed: Optional[int]) -> NormalizationConfig:
        if seed is None:
            return cfg
        return dataclasses.replace(cfg, rng_seed=seed)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok", version=__version__, annotation_schema=SCHEMA_VERSION
        )

    @app.post("/annotate", response_model=AnnotationOut, response_model_by_alias=True)
    def annotate(request: AnnotateRequest) -> AnnotationOut:
        record = annotate_dialogue(
            _build_dialogue(request.dialogue),
            _request_cfg(request.seed),
            dicts,
            max_ngram=request.max_ngram or max_ngram,
        )
        return AnnotationOut.model_validate(record_to_dict(record))

    @app.post("/samples", response_model=SamplesResponse)
    def samples(request: SamplesRequest) -> SamplesResponse:
        record = annotate_dialogue(
            _build_dialogue(request.dialogue),
            _request_cfg(request.seed),
            dicts,
            max_ngram=request.max_ngram or max_ngram,
        )
        history = None if request.history == "full" else request.history
        built = build_samples(
            record.dialogue, record.lexicon, history=history, roles=request.roles
        )
        return SamplesResponse(
            samples=[SampleOut.model_validate(sample_to_dict(s)) for s in built]
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate_predictions(request: EvaluateRequest) -> EvaluateResponse:
        parsed = [
            sample_from_dict(sample.model_dump()) for sample in request.samples
        ]
        predictions: dict[str, list[Span]] = {}
        for prediction in request.predictions:
            if prediction.sample_id in predictions:
                raise ValidationError(
                    f"duplicate prediction for {prediction.sample_id!r}"
                )
            predictions[prediction.sample_id] = list(prediction.spans)
        result = evaluate(parsed, predictions)
        return EvaluateResponse(
            samples=len(parsed),
            tp=result.tp,
            fp=result.fp,
            fn=result.fn,
            precision=float(result.precision),
            recall=float(result.recall),
            f1=float(result.f1),
        )

    return app
