"""Corpus-level statistics: distributions, summaries, ANOVA, act overlap,
entrainment-vs-length curves, and the Welch t comparison between corpora.

Sums, means, and F statistics are computed in exact rational arithmetic;
only distribution tail probabilities (scipy) and standard deviations go
through floats.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from statistics import median, pstdev
from typing import Iterable, Mapping, Optional, Sequence, Union

from scipy import stats as _scipy_stats

from .errors import ValidationError
from .lexicon import DialogueLexicon, ExpressionKey
from .measures import DialogueMeasures, els
from .normalize import NormalizationConfig, is_punct_token, normalize_token, tokenize

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class SummaryStats:
    mean: Fraction
    std: float
    minimum: Number
    maximum: Number
    median: Number
    mode: Number


@dataclass(frozen=True)
class ElsDistribution:
    histogram: dict[int, int]
    mean: Fraction
    zero_dialogues: int
    maximum: int


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: Number
    p_value: float
    group_sizes: dict[str, int]


@dataclass(frozen=True)
class WelchResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    mean_a: Fraction
    mean_b: Fraction
    n_a: int
    n_b: int


@dataclass(frozen=True)
class OverlapResult:
    act_tokens: int
    expression_tokens: int
    intersection: int


@dataclass(frozen=True)
class CurveRow:
    turn_count: int
    raw_mean: Fraction
    smoothed_mean: float
    std: float


def _as_fraction(value: Number) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _summarize(values: Sequence[Number], mode_values: Sequence[Number] | None = None) -> SummaryStats:
    if not values:
        raise ValidationError("cannot summarize an empty sequence")
    mean = Fraction(sum(_as_fraction(v) for v in values), len(values))
    counts = Counter(mode_values if mode_values is not None else values)
    top = max(counts.values())
    mode = min(value for value, count in counts.items() if count == top)
    return SummaryStats(
        mean=mean,
        std=pstdev(float(v) for v in values),
        minimum=min(values),
        maximum=max(values),
        median=median(values),
        mode=mode,
    )


def els_distribution(corpus: Iterable[Union[int, DialogueLexicon]]) -> ElsDistribution:
    """Histogram of per-dialogue lexicon sizes, with mean/zero-count/max."""
    sizes = [item if isinstance(item, int) else els(item) for item in corpus]
    if not sizes:
        raise ValidationError("els_distribution needs at least one dialogue")
    histogram = dict(sorted(Counter(sizes).items()))
    return ElsDistribution(
        histogram=histogram,
        mean=Fraction(sum(sizes), len(sizes)),
        zero_dialogues=histogram.get(0, 0),
        maximum=max(sizes),
    )


def measure_summaries(corpus: Iterable[DialogueMeasures]) -> dict[str, SummaryStats]:
    """Expression-measure and per-speaker summary statistics over a corpus.

    The density mode is taken after rounding each value to 2 decimals, since
    the raw ratios rarely repeat exactly.
    """
    measures = list(corpus)
    expressions = [m for dm in measures for m in dm.per_expression.values()]
    if not expressions:
        raise ValidationError("no established entries in the corpus")
    summaries = {
        "frequency": _summarize([m.frequency for m in expressions]),
        "size": _summarize([m.size for m in expressions]),
        "span": _summarize([m.span for m in expressions]),
        "density": _summarize(
            [m.density for m in expressions],
            mode_values=[round(m.density, 2) for m in expressions],
        ),
        "priming": _summarize([m.priming for m in expressions]),
        "priming_distance": _summarize([m.priming_distance for m in expressions]),
        "entr_user": _summarize([dm.entr_user for dm in measures]),
        "entr_agent": _summarize([dm.entr_agent for dm in measures]),
        "err_user": _summarize([dm.err_user for dm in measures]),
        "err_agent": _summarize([dm.err_agent for dm in measures]),
    }
    ier_user = [dm.ier_user for dm in measures if dm.ier_user is not None]
    ier_agent = [dm.ier_agent for dm in measures if dm.ier_agent is not None]
    if ier_user:
        summaries["ier_user"] = _summarize(ier_user)
        summaries["ier_agent"] = _summarize(ier_agent)
    return summaries


def group_by_domain(
    tagged: Iterable[tuple[Sequence[str], Number]]
) -> dict[str, list[Number]]:
    """Bucket per-dialogue values by domain; multi-domain dialogues land in
    every one of their domains."""
    groups: dict[str, list[Number]] = {}
    for domains, value in tagged:
        for domain in domains:
            groups.setdefault(domain, []).append(value)
    return dict(sorted(groups.items()))


def anova_domains(groups: Mapping[str, Sequence[Number]]) -> AnovaResult:
    """Classical one-way ANOVA over the given groups.

    F is exact-rational; only the tail probability uses scipy. Zero
    between-group variance yields F = 0, p = 1 even when the within-group
    variance is also zero.
    """
    if len(groups) < 2:
        raise ValidationError(f"ANOVA needs >= 2 groups, got {len(groups)}")
    for name, samples in groups.items():
        if len(samples) < 2:
            raise ValidationError(
                f"ANOVA group {name!r} has {len(samples)} sample(s), needs >= 2"
            )
    converted = {
        name: [_as_fraction(v) for v in samples] for name, samples in groups.items()
    }
    total_n = sum(len(samples) for samples in converted.values())
    grand_mean = Fraction(
        sum(sum(samples, Fraction(0)) for samples in converted.values()), total_n
    )
    ss_between = Fraction(0)
    ss_within = Fraction(0)
    for samples in converted.values():
        group_mean = Fraction(sum(samples, Fraction(0)), len(samples))
        ss_between += len(samples) * (group_mean - grand_mean) ** 2
        ss_within += sum((x - group_mean) ** 2 for x in samples)
    df_between = len(converted) - 1
    df_within = total_n - len(converted)
    group_sizes = {name: len(samples) for name, samples in converted.items()}
    if ss_between == 0:
        return AnovaResult(Fraction(0), 1.0, group_sizes)
    if ss_within == 0:
        return AnovaResult(math.inf, 0.0, group_sizes)
    f_statistic = (ss_between / df_between) / (ss_within / df_within)
    p_value = float(_scipy_stats.f.sf(float(f_statistic), df_between, df_within))
    return AnovaResult(f_statistic, p_value, group_sizes)


def welch_t_test(a: Sequence[Number], b: Sequence[Number]) -> WelchResult:
    """Welch's unequal-variance two-sided t-test."""
    if len(a) < 2 or len(b) < 2:
        raise ValidationError("Welch's t-test needs >= 2 samples per side")
    fa = [_as_fraction(v) for v in a]
    fb = [_as_fraction(v) for v in b]
    mean_a = Fraction(sum(fa, Fraction(0)), len(fa))
    mean_b = Fraction(sum(fb, Fraction(0)), len(fb))
    var_a = sum((x - mean_a) ** 2 for x in fa) / (len(fa) - 1)
    var_b = sum((x - mean_b) ** 2 for x in fb) / (len(fb) - 1)
    se2 = var_a / len(fa) + var_b / len(fb)
    if se2 == 0:
        # no sampling variance at all: the test degenerates
        equal = mean_a == mean_b
        return WelchResult(
            t_statistic=0.0 if equal else math.copysign(math.inf, mean_a - mean_b),
            degrees_of_freedom=float(len(fa) + len(fb) - 2),
            p_value=1.0 if equal else 0.0,
            mean_a=mean_a,
            mean_b=mean_b,
            n_a=len(fa),
            n_b=len(fb),
        )
    t_statistic = float(mean_a - mean_b) / math.sqrt(se2)
    df_denominator = var_a ** 2 / (len(fa) ** 2 * (len(fa) - 1)) + var_b ** 2 / (
        len(fb) ** 2 * (len(fb) - 1)
    )
    degrees_of_freedom = float(se2 ** 2 / df_denominator)
    p_value = float(2 * _scipy_stats.t.sf(abs(t_statistic), degrees_of_freedom))
    return WelchResult(
        t_statistic=t_statistic,
        degrees_of_freedom=degrees_of_freedom,
        p_value=p_value,
        mean_a=mean_a,
        mean_b=mean_b,
        n_a=len(fa),
        n_b=len(fb),
    )


def act_overlap(
    act_phrases: Iterable[str],
    keys: Iterable[ExpressionKey],
    cfg: NormalizationConfig,
) -> OverlapResult:
    """Vocabulary overlap between dialogue-act text and lexicon entries.

    Act phrases are tokenized and canonicalized with the same normalizer the
    expressions went through; expression keys are already canonical.
    """
    act_tokens: set[str] = set()
    seen_any = False
    for phrase in act_phrases:
        seen_any = True
        for surface, _ in tokenize(phrase):
            if not is_punct_token(surface):
                act_tokens.add(normalize_token(surface, cfg))
    if not seen_any:
        raise ValidationError("no dialogue acts present; overlap needs act annotations")
    expression_tokens = {token for key in keys for token in key}
    return OverlapResult(
        act_tokens=len(act_tokens),
        expression_tokens=len(expression_tokens),
        intersection=len(act_tokens & expression_tokens),
    )


def gaussian_kernel(sigma: float) -> list[float]:
    """Normalized 1-D Gaussian kernel truncated at +/- 3 sigma."""
    if sigma <= 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3 * sigma)
    raw = [math.exp(-(offset ** 2) / (2 * sigma ** 2)) for offset in range(-radius, radius + 1)]
    total = sum(raw)
    return [weight / total for weight in raw]


def _smooth(values: Sequence[float], sigma: float) -> list[float]:
    # kernel renormalized within array bounds so constants stay constant
    kernel = gaussian_kernel(sigma)
    radius = len(kernel) // 2
    smoothed = []
    for i in range(len(values)):
        acc = 0.0
        weight_sum = 0.0
        for offset in range(-radius, radius + 1):
            j = i + offset
            if 0 <= j < len(values):
                weight = kernel[offset + radius]
                acc += weight * values[j]
                weight_sum += weight
        smoothed.append(acc / weight_sum)
    return smoothed


def entr_by_turncount(
    rows: Iterable[tuple[int, Number]], sigma: float
) -> list[CurveRow]:
    """Mean/std of a per-dialogue value bucketed by dialogue turn count,
    with the bucket means smoothed positionally by a Gaussian kernel."""
    buckets: dict[int, list[Number]] = {}
    for turn_count, value in rows:
        buckets.setdefault(turn_count, []).append(value)
    if not buckets:
        return []
    ordered = sorted(buckets)
    raw_means = [
        Fraction(sum(_as_fraction(v) for v in buckets[tc]), len(buckets[tc]))
        for tc in ordered
    ]
    smoothed = _smooth([float(m) for m in raw_means], sigma)
    return [
        CurveRow(
            turn_count=tc,
            raw_mean=raw_means[i],
            smoothed_mean=smoothed[i],
            std=pstdev(float(v) for v in buckets[tc]) if len(buckets[tc]) > 1 else 0.0,
        )
        for i, tc in enumerate(ordered)
    ]
