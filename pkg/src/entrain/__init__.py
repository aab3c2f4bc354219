"""Detection and measurement of lexical entrainment in two-party dialogues.

The package mines the shared-expression lexicon of a dialogue (equivalent
noun phrases produced by both speakers), annotates every occurrence, and
derives utterance-, expression-, and corpus-level entrainment measures,
plus an extraction-task harness for evaluating span predictors.
"""

from .corpus import (
    Corpus,
    Dialogue,
    Speaker,
    Utterance,
    load_multiwoz,
    load_transcript,
    load_transcript_dir,
)
from .errors import DictionaryError, InputError, ParseError, ValidationError
from .filtering import (
    FilterDictionaries,
    apply_filter,
    is_noun_phrase,
    load_dictionaries,
    trim_edges,
)
from .lexicon import (
    DialogueLexicon,
    ExpressionKey,
    LexiconEntry,
    Occurrence,
    OccurrenceKind,
    build_lexicon,
    classify_instances,
    establish,
    mine_shared,
)
from .measures import (
    DialogueMeasures,
    ExpressionMeasures,
    TurnEntrainment,
    dialogue_measures,
    els,
    entr,
    err,
    expression_measures,
    ier,
    turn_counts,
)
from .normalize import NormalizationConfig, NormalizedToken, normalize_dialogue
from .pipeline import (
    AnnotationRecord,
    annotate_corpus,
    annotate_dialogue,
    record_from_dict,
    record_to_dict,
)
from .task import (
    EvalResult,
    ExtractionSample,
    build_samples,
    evaluate,
    oracle_within_window,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Corpus",
    "Dialogue",
    "Speaker",
    "Utterance",
    "load_multiwoz",
    "load_transcript",
    "load_transcript_dir",
    "DictionaryError",
    "InputError",
    "ParseError",
    "ValidationError",
    "FilterDictionaries",
    "apply_filter",
    "is_noun_phrase",
    "load_dictionaries",
    "trim_edges",
    "DialogueLexicon",
    "ExpressionKey",
    "LexiconEntry",
    "Occurrence",
    "OccurrenceKind",
    "build_lexicon",
    "classify_instances",
    "establish",
    "mine_shared",
    "DialogueMeasures",
    "ExpressionMeasures",
    "TurnEntrainment",
    "dialogue_measures",
    "els",
    "entr",
    "err",
    "expression_measures",
    "ier",
    "turn_counts",
    "NormalizationConfig",
    "NormalizedToken",
    "normalize_dialogue",
    "AnnotationRecord",
    "annotate_corpus",
    "annotate_dialogue",
    "record_from_dict",
    "record_to_dict",
    "EvalResult",
    "ExtractionSample",
    "build_samples",
    "evaluate",
    "oracle_within_window",
]
