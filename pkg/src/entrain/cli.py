"""Command-line interface.

Subcommands:

* ``annotate``        dialogues -> annotation records (JSONL)
* ``stats``           annotation records -> corpus statistics (JSON, CSV curve)
* ``compare``         mean agent entrainment of system corpora vs a human corpus
* ``task``            annotation records -> extraction samples (JSONL)
* ``oracle-predict``  samples -> within-window oracle predictions (JSONL)
* ``eval``            samples + predictions -> span-level scores (JSON)
* ``serve``           run the HTTP service

Every command is deterministic given its input bytes and flags: files are
written atomically (temp file + rename), JSON keys keep a fixed order, and
the annotate worker pool writes strictly in input order. Exit codes:
0 success, 1 input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional, Sequence

from .analyze import (
    act_overlap,
    anova_domains,
    els_distribution,
    entr_by_turncount,
    group_by_domain,
    measure_summaries,
    welch_t_test,
)
from .corpus import Dialogue, load_multiwoz, load_transcript, load_transcript_dir
from .errors import InputError, ParseError, ValidationError
from .filtering import FilterDictionaries, load_dictionaries
from .lexicon import DEFAULT_MAX_NGRAM
from .normalize import NormalizationConfig
from .pipeline import annotate_dialogue, record_from_dict, record_to_dict
from .task import (
    ROLE_CHOICES,
    build_samples,
    evaluate,
    oracle_within_window,
    sample_from_dict,
    sample_to_dict,
)

DICTS_ENV_VAR = "ENTRAIN_DICTS"

# Optional per-directory overrides for the normalizer's word maps.
_SPELLING_FILE = "spelling_gb_us.txt"
_NUMBER_FILE = "number_words.txt"


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 1 (input error), not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _dumps_report(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2)


@contextmanager
def _atomic_writer(path: Optional[str]):
    """Write to stdout, or to ``path`` via a temp file renamed on success."""
    if path is None or path == "-":
        yield sys.stdout
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".entrain.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            yield handle
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def _read_jsonl(path: str) -> Iterator[tuple[int, Any]]:
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path!r}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc


def _read_records(path: str):
    records = []
    for lineno, data in _read_jsonl(path):
        try:
            records.append(record_from_dict(data))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if not records:
        raise ValidationError(f"{path}: no annotation records")
    return records


def _dicts_dir(args) -> Optional[str]:
    return args.dicts or os.environ.get(DICTS_ENV_VAR) or None


def _optional_override(dicts_dir: Optional[str], name: str) -> Optional[str]:
    if dicts_dir is None:
        return None
    candidate = os.path.join(dicts_dir, name)
    return candidate if os.path.exists(candidate) else None


def _load_config(args) -> NormalizationConfig:
    dicts_dir = _dicts_dir(args)
    return NormalizationConfig.load(
        spelling_path=_optional_override(dicts_dir, _SPELLING_FILE),
        number_path=_optional_override(dicts_dir, _NUMBER_FILE),
        mask_bits=getattr(args, "mask_bits", 64),
        rng_seed=getattr(args, "seed", 0),
        stemmer=args.stemmer,
    )


def _load_dialogues(args) -> list[Dialogue]:
    path, fmt = args.input, args.format
    if fmt == "auto":
        if os.path.isdir(path):
            fmt = "multiwoz" if os.path.exists(os.path.join(path, "data.json")) else "transcript"
        elif path.endswith(".json"):
            fmt = "multiwoz"
        else:
            fmt = "transcript"
    if fmt == "multiwoz":
        return list(load_multiwoz(path, split=args.split))
    if args.split != "all":
        raise ValidationError("--split requires a MultiWOZ-format input")
    if os.path.isdir(path):
        return list(load_transcript_dir(path))
    return [load_transcript(path)]


# Worker-process state for cmd_annotate; set once per process.
_WORKER: dict[str, Any] = {}


def _init_annotation_worker(
    cfg: NormalizationConfig, dicts: FilterDictionaries, max_ngram: int
) -> None:
    _WORKER["cfg"] = cfg
    _WORKER["dicts"] = dicts
    _WORKER["max_ngram"] = max_ngram


def _annotation_line(dialogue: Dialogue) -> str:
    record = annotate_dialogue(
        dialogue, _WORKER["cfg"], _WORKER["dicts"], max_ngram=_WORKER["max_ngram"]
    )
    return _dumps(record_to_dict(record))


def cmd_annotate(args) -> int:
    cfg = _load_config(args)
    dicts = load_dictionaries(_dicts_dir(args), cfg)
    dialogues = _load_dialogues(args)
    if args.jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {args.jobs}")
    if args.jobs == 1:
        _init_annotation_worker(cfg, dicts, args.max_ngram)
        lines: Iterable[str] = map(_annotation_line, dialogues)
        with _atomic_writer(args.out) as handle:
            for line in lines:
                handle.write(line + "\n")
    else:
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_init_annotation_worker,
            initargs=(cfg, dicts, args.max_ngram),
        ) as pool:
            # executor.map yields results in input order, so the output
            # bytes match a single-process run.
            with _atomic_writer(args.out) as handle:
                for line in pool.map(_annotation_line, dialogues, chunksize=8):
                    handle.write(line + "\n")
    return 0


def _rounded(value) -> float:
    return round(float(value), 6)


def _summary_to_dict(stats) -> dict[str, float]:
    return {
        "mean": _rounded(stats.mean),
        "std": _rounded(stats.std),
        "min": _rounded(stats.minimum),
        "max": _rounded(stats.maximum),
        "median": _rounded(stats.median),
        "mode": _rounded(stats.mode),
    }


def cmd_stats(args) -> int:
    records = _read_records(args.annotations)
    distribution = els_distribution(record.measures.els for record in records)
    report: dict[str, Any] = {
        "dialogues": len(records),
        "established_expressions": sum(
            len(record.measures.per_expression) for record in records
        ),
        "els": {
            "histogram": distribution.histogram,
            "mean": _rounded(distribution.mean),
            "zero_dialogues": distribution.zero_dialogues,
            "max": distribution.maximum,
        },
        "measures": {
            name: _summary_to_dict(stats)
            for name, stats in measure_summaries(
                record.measures for record in records
            ).items()
        },
    }
    if args.anova:
        tagged = [
            (record.dialogue.domains, record.measures.els)
            for record in records
            if record.dialogue.domains
        ]
        if not tagged:
            raise ValidationError("--anova needs domain tags in the annotations")
        result = anova_domains(group_by_domain(tagged))
        report["anova"] = {
            "f_statistic": float(result.f_statistic),
            "p_value": result.p_value,
            "group_sizes": result.group_sizes,
        }
    if args.overlap:
        phrases = [
            f"{slot} {value}"
            for record in records
            for utterance in record.dialogue
            for _, slot, value in utterance.acts
        ]
        if not phrases:
            raise ValidationError("--overlap needs dialogue-act annotations")
        keys = {
            entry.key for record in records for entry in record.lexicon
        }
        overlap = act_overlap(phrases, keys, _load_config(args))
        report["act_overlap"] = {
            "act_tokens": overlap.act_tokens,
            "expression_tokens": overlap.expression_tokens,
            "intersection": overlap.intersection,
        }
    if args.curve is not None:
        rows = [
            (len(record.dialogue.utterances), record.measures.entr_agent)
            for record in records
        ]
        curve = entr_by_turncount(rows, args.curve)
        report["curve"] = [
            {
                "turn_count": row.turn_count,
                "raw_mean": _rounded(row.raw_mean),
                "smoothed_mean": _rounded(row.smoothed_mean),
                "std": _rounded(row.std),
            }
            for row in curve
        ]
        if args.curve_out:
            with _atomic_writer(args.curve_out) as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["turn_count", "raw_mean", "smoothed_mean", "std"])
                for row in curve:
                    writer.writerow(
                        [
                            row.turn_count,
                            _rounded(row.raw_mean),
                            _rounded(row.smoothed_mean),
                            _rounded(row.std),
                        ]
                    )
    with _atomic_writer(args.out) as handle:
        handle.write(_dumps_report(report) + "\n")
    return 0


def _corpus_entr_agent(path: str) -> tuple[list[str], list[Fraction]]:
    records = _read_records(path)
    ids = [record.dialogue_id for record in records]
    return ids, [record.measures.entr_agent for record in records]


def cmd_compare(args) -> int:
    human_ids, human = _corpus_entr_agent(args.human)
    rows = []
    for path in args.systems:
        system_ids, system = _corpus_entr_agent(path)
        if set(system_ids) != set(human_ids):
            print(
                f"warning: {path}: dialogue ids differ from {args.human}",
                file=sys.stderr,
            )
        result = welch_t_test(system, human)
        rows.append(
            {
                "corpus": path,
                "mean_entr_agent": _rounded(result.mean_a),
                "t_statistic": _rounded(result.t_statistic),
                "degrees_of_freedom": _rounded(result.degrees_of_freedom),
                "p_value": result.p_value,
            }
        )
    report = {
        "human": {
            "corpus": args.human,
            "mean_entr_agent": _rounded(Fraction(sum(human), len(human))),
            "dialogues": len(human),
        },
        "systems": rows,
    }
    with _atomic_writer(args.out) as handle:
        handle.write(_dumps_report(report) + "\n")
    return 0


def _parse_history(value: str) -> Optional[int]:
    if value == "full":
        return None
    try:
        parsed = int(value)
    except ValueError:
        raise ValidationError(f"--history must be an integer or 'full', got {value!r}")
    if parsed < 1:
        raise ValidationError(f"--history must be >= 1 or 'full', got {value!r}")
    return parsed


def cmd_task(args) -> int:
    records = _read_records(args.annotations)
    history = _parse_history(args.history)
    samples = []
    for record in records:
        samples.extend(
            build_samples(record.dialogue, record.lexicon, history=history, roles=args.roles)
        )
    samples.sort(key=lambda sample: (sample.dialogue_id, sample.target_index))
    with _atomic_writer(args.out) as handle:
        for sample in samples:
            handle.write(_dumps(sample_to_dict(sample)) + "\n")
    return 0


def _read_samples(path: str):
    samples = []
    for lineno, data in _read_jsonl(path):
        try:
            samples.append(sample_from_dict(data))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if not samples:
        raise ValidationError(f"{path}: no samples")
    return samples


def cmd_oracle_predict(args) -> int:
    samples = _read_samples(args.samples)
    predictions = oracle_within_window(samples)
    with _atomic_writer(args.out) as handle:
        for sample in samples:
            line = {
                "sample_id": sample.sample_id,
                "spans": [list(span) for span in predictions[sample.sample_id]],
            }
            handle.write(_dumps(line) + "\n")
    return 0


def cmd_eval(args) -> int:
    samples = _read_samples(args.samples)
    predictions: dict[str, list[tuple[int, int]]] = {}
    for lineno, data in _read_jsonl(args.predictions):
        try:
            sample_id = data["sample_id"]
            spans = [(span[0], span[1]) for span in data["spans"]]
        except (KeyError, IndexError, TypeError) as exc:
            raise ParseError(
                f"{args.predictions}:{lineno}: expected "
                f"{{sample_id, spans}} ({exc!r})"
            ) from exc
        if sample_id in predictions:
            raise ValidationError(
                f"{args.predictions}:{lineno}: duplicate prediction for {sample_id!r}"
            )
        predictions[sample_id] = spans
    result = evaluate(samples, predictions)
    report = {
        "samples": len(samples),
        "tp": result.tp,
        "fp": result.fp,
        "fn": result.fn,
        "precision": _rounded(result.precision),
        "recall": _rounded(result.recall),
        "f1": _rounded(result.f1),
    }
    with _atomic_writer(args.out) as handle:
        handle.write(_dumps_report(report) + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _load_config(args)
    dicts = load_dictionaries(_dicts_dir(args), cfg)
    app = create_app(cfg=cfg, dicts=dicts, max_ngram=args.max_ngram)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_dict_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--dicts",
        metavar="DIR",
        default=None,
        help=f"dictionary directory (default: ${DICTS_ENV_VAR} or bundled)",
    )
    parser.add_argument(
        "--stemmer",
        choices=("porter", "none"),
        default="porter",
        help="canonicalization stemmer (default: porter)",
    )


def _add_annotate_flags(parser: argparse.ArgumentParser) -> None:
    _add_dict_flags(parser)
    parser.add_argument("--seed", type=int, default=0, help="mask RNG seed (default: 0)")
    parser.add_argument(
        "--mask-bits", type=int, default=64, help="mask token entropy in bits (default: 64)"
    )
    parser.add_argument(
        "--max-ngram",
        type=int,
        default=DEFAULT_MAX_NGRAM,
        help=f"longest mined n-gram (default: {DEFAULT_MAX_NGRAM})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entrain", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    annotate = sub.add_parser("annotate", help="annotate dialogues with expression lexicons")
    annotate.add_argument("input", help="data.json, transcript file, or directory")
    annotate.add_argument(
        "--format", choices=("auto", "multiwoz", "transcript"), default="auto"
    )
    annotate.add_argument(
        "--split", choices=("all", "train", "val", "test"), default="all"
    )
    annotate.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    annotate.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_annotate_flags(annotate)
    annotate.set_defaults(func=cmd_annotate)

    stats = sub.add_parser("stats", help="corpus statistics from annotations")
    stats.add_argument("annotations", help="annotation JSONL")
    stats.add_argument("--out", default=None, help="output JSON (default: stdout)")
    stats.add_argument("--anova", action="store_true", help="per-domain lexicon-size ANOVA")
    stats.add_argument(
        "--overlap", action="store_true", help="dialogue-act/expression vocabulary overlap"
    )
    stats.add_argument(
        "--curve", type=float, default=None, metavar="SIGMA",
        help="smoothed agent-entrainment-vs-turn-count curve",
    )
    stats.add_argument("--curve-out", default=None, help="also write the curve as CSV")
    _add_dict_flags(stats)
    stats.set_defaults(func=cmd_stats)

    compare = sub.add_parser("compare", help="compare system corpora against a human corpus")
    compare.add_argument("human", help="human annotation JSONL")
    compare.add_argument("systems", nargs="+", help="system annotation JSONL")
    compare.add_argument("--out", default=None, help="output JSON (default: stdout)")
    compare.set_defaults(func=cmd_compare)

    task = sub.add_parser("task", help="build extraction samples from annotations")
    task.add_argument("annotations", help="annotation JSONL")
    task.add_argument(
        "--history", default="full", help="context window in utterances, or 'full'"
    )
    task.add_argument("--roles", choices=ROLE_CHOICES, default="agent")
    task.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    task.set_defaults(func=cmd_task)

    oracle = sub.add_parser(
        "oracle-predict", help="emit within-window oracle predictions for samples"
    )
    oracle.add_argument("samples", help="samples JSONL")
    oracle.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    oracle.set_defaults(func=cmd_oracle_predict)

    evaluate_cmd = sub.add_parser("eval", help="score predictions against sample gold")
    evaluate_cmd.add_argument("samples", help="samples JSONL")
    evaluate_cmd.add_argument("predictions", help="predictions JSONL")
    evaluate_cmd.add_argument("--out", default=None, help="output JSON (default: stdout)")
    evaluate_cmd.set_defaults(func=cmd_eval)

    serve = sub.add_parser("serve", help="run the HTTP annotation service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    _add_annotate_flags(serve)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"entrain: error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        print(f"entrain: internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
