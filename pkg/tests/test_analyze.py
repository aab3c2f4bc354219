import math
from fractions import Fraction

import pytest
from scipy import stats as scipy_stats

from entrain.analyze import (
    act_overlap,
    anova_domains,
    els_distribution,
    entr_by_turncount,
    gaussian_kernel,
    group_by_domain,
    measure_summaries,
    welch_t_test,
)
from entrain.errors import ValidationError
from entrain.lexicon import DialogueLexicon, build_lexicon
from entrain.measures import DialogueMeasures, ExpressionMeasures
from entrain.normalize import normalize_token

from conftest import normalized_dialogue


def make_measures(dialogue_id, densities=(), entr_user=Fraction(0), ier=None):
    per_expression = {
        f"expr{i}": ExpressionMeasures(
            frequency=1, size=1, span=1, density=d, priming=0, priming_distance=1
        )
        for i, d in enumerate(densities)
    }
    return DialogueMeasures(
        dialogue_id=dialogue_id,
        els=len(per_expression),
        entr_user=entr_user,
        entr_agent=Fraction(0),
        ier_user=ier,
        ier_agent=None if ier is None else 1 - ier,
        err_user=Fraction(0),
        err_agent=Fraction(0),
        per_turn=[],
        per_expression=per_expression,
    )


class TestElsDistribution:
    def test_histogram_and_mean(self):
        dist = els_distribution([0, 2, 2, 5])
        assert dist.histogram == {0: 1, 2: 2, 5: 1}
        assert dist.mean == Fraction(9, 4)
        assert dist.zero_dialogues == 1
        assert dist.maximum == 5

    def test_accepts_lexicons(self, cfg, dicts):
        dialogue = normalized_dialogue(["a hotel", "the hotel"], cfg)
        lexicon = build_lexicon(dialogue, dicts)
        dist = els_distribution([lexicon, DialogueLexicon("empty", [])])
        assert dist.histogram == {0: 1, 1: 1}
        assert dist.mean == Fraction(1, 2)

    def test_empty_corpus(self):
        with pytest.raises(ValidationError, match="at least one dialogue"):
            els_distribution([])


class TestMeasureSummaries:
    def test_golden_frequency_summary(self, table1_record):
        summary = measure_summaries([table1_record.measures])["frequency"]
        assert summary.mean == Fraction(31, 10)
        assert summary.minimum == 2
        assert summary.maximum == 5
        assert summary.median == 3
        assert summary.mode == 3

    def test_golden_size_summary(self, table1_record):
        summary = measure_summaries([table1_record.measures])["size"]
        assert summary.mean == Fraction(3, 2)
        assert summary.mode == 1

    def test_single_dialogue_speaker_stats(self, table1_record):
        summaries = measure_summaries([table1_record.measures])
        assert summaries["entr_user"].mean == Fraction(7, 10)
        assert summaries["entr_user"].std == 0.0
        assert summaries["ier_agent"].mean == Fraction(3, 10)

    def test_density_mode_rounds_first(self):
        record = make_measures(
            "d1", densities=(Fraction(1, 3), Fraction(33, 100), Fraction(1, 2))
        )
        summary = measure_summaries([record])["density"]
        assert summary.mode == Fraction(33, 100)

    def test_mode_ties_take_smallest(self):
        record = make_measures("d1", densities=(Fraction(1), Fraction(2)))
        assert measure_summaries([record])["density"].mode == Fraction(1)

    def test_ier_dropped_when_unavailable(self):
        record = make_measures("d1", densities=(Fraction(1),), ier=None)
        summaries = measure_summaries([record])
        assert "ier_user" not in summaries
        assert "ier_agent" not in summaries

    def test_no_established_entries(self):
        with pytest.raises(ValidationError, match="no established entries"):
            measure_summaries([make_measures("d1")])


class TestGroupByDomain:
    def test_multi_domain_dialogues_in_every_group(self):
        groups = group_by_domain(
            [(("restaurant", "hotel"), 3), (("hotel",), 1), (("restaurant",), 2)]
        )
        assert groups == {"hotel": [3, 1], "restaurant": [3, 2]}
        assert list(groups) == ["hotel", "restaurant"]


class TestAnova:
    def test_exact_f_statistic(self):
        result = anova_domains({"a": [1, 2, 3], "b": [2, 3, 4]})
        assert result.f_statistic == Fraction(3, 2)
        assert isinstance(result.f_statistic, Fraction)
        assert result.group_sizes == {"a": 3, "b": 3}

    def test_matches_scipy(self):
        a = [1, 2, 3, 7]
        b = [2, 3, 4, 4]
        c = [5, 5, 6, 9]
        result = anova_domains({"a": a, "b": b, "c": c})
        expected = scipy_stats.f_oneway(a, b, c)
        assert math.isclose(float(result.f_statistic), expected.statistic, rel_tol=1e-12)
        assert math.isclose(result.p_value, expected.pvalue, rel_tol=1e-9)

    def test_two_groups_f_equals_pooled_t_squared(self):
        a = [1.5, 2.0, 3.5, 4.0]
        b = [2.5, 5.0, 6.0]
        result = anova_domains({"a": a, "b": b})
        pooled = scipy_stats.ttest_ind(a, b, equal_var=True)
        assert math.isclose(float(result.f_statistic), pooled.statistic ** 2, rel_tol=1e-9)

    def test_identical_groups(self):
        result = anova_domains({"a": [2, 2, 2], "b": [2, 2, 2]})
        assert result.f_statistic == 0
        assert result.p_value == 1.0

    def test_zero_within_variance(self):
        result = anova_domains({"a": [1, 1], "b": [2, 2]})
        assert result.f_statistic == math.inf
        assert result.p_value == 0.0

    def test_shift_invariance(self):
        groups = {"a": [Fraction(1, 3), Fraction(2, 3), 1], "b": [2, 3, Fraction(7, 2)]}
        shifted = {name: [v + 7 for v in vals] for name, vals in groups.items()}
        assert anova_domains(groups).f_statistic == anova_domains(shifted).f_statistic

    def test_needs_two_groups(self):
        with pytest.raises(ValidationError, match=">= 2 groups"):
            anova_domains({"a": [1, 2]})

    def test_small_group_named(self):
        with pytest.raises(ValidationError, match="'b' has 1 sample"):
            anova_domains({"a": [1, 2], "b": [1]})


class TestWelch:
    def test_matches_scipy(self):
        a = [1.0, 2.0, 3.0, 4.0]
        b = [2.0, 4.0, 6.0, 9.0]
        result = welch_t_test(a, b)
        expected = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert math.isclose(result.t_statistic, expected.statistic, rel_tol=1e-9)
        assert math.isclose(result.p_value, expected.pvalue, rel_tol=1e-9)
        assert math.isclose(result.degrees_of_freedom, expected.df, rel_tol=1e-9)

    def test_exact_means(self):
        result = welch_t_test([1, 2, 3], [Fraction(1, 2), Fraction(3, 2)])
        assert result.mean_a == Fraction(2)
        assert result.mean_b == Fraction(1)
        assert result.n_a == 3
        assert result.n_b == 2

    def test_identical_constant_samples(self):
        result = welch_t_test([3, 3, 3], [3, 3])
        assert result.t_statistic == 0.0
        assert result.p_value == 1.0

    def test_distinct_constant_samples(self):
        result = welch_t_test([4, 4], [3, 3])
        assert result.t_statistic == math.inf
        assert result.p_value == 0.0

    def test_needs_two_samples_each(self):
        with pytest.raises(ValidationError, match=">= 2 samples"):
            welch_t_test([1], [1, 2])


class TestActOverlap:
    def test_identical_vocabulary(self, cfg):
        key = tuple(normalize_token(w, cfg) for w in ["price", "range"])
        result = act_overlap(["price range"], [key], cfg)
        assert result.act_tokens == 2
        assert result.expression_tokens == 2
        assert result.intersection == 2

    def test_stemming_unifies(self, cfg):
        key = (normalize_token("restaurant", cfg),)
        result = act_overlap(["restaurants"], [key], cfg)
        assert result.intersection == 1

    def test_punctuation_skipped(self, cfg):
        result = act_overlap(["centre , town"], [], cfg)
        assert result.act_tokens == 2
        assert result.expression_tokens == 0
        assert result.intersection == 0

    def test_disjoint(self, cfg):
        result = act_overlap(["taxi"], [("hotel",)], cfg)
        assert result.intersection == 0

    def test_requires_acts(self, cfg):
        with pytest.raises(ValidationError, match="act annotations"):
            act_overlap([], [("hotel",)], cfg)


class TestGaussianKernel:
    def test_normalized(self):
        for sigma in (0.5, 0.8, 2.0):
            assert abs(sum(gaussian_kernel(sigma)) - 1) <= 1e-12

    def test_shape(self):
        kernel = gaussian_kernel(0.8)
        assert len(kernel) == 2 * math.ceil(3 * 0.8) + 1
        assert kernel == kernel[::-1]
        assert max(kernel) == kernel[len(kernel) // 2]

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValidationError, match="sigma"):
            gaussian_kernel(0)


class TestEntrByTurncount:
    def test_bucketing(self):
        rows = [(4, 1), (4, 2), (2, 5)]
        curve = entr_by_turncount(rows, sigma=0.8)
        assert [row.turn_count for row in curve] == [2, 4]
        assert curve[0].raw_mean == Fraction(5)
        assert curve[1].raw_mean == Fraction(3, 2)
        assert curve[0].std == 0.0
        assert curve[1].std == 0.5

    def test_constant_series_unchanged(self):
        rows = [(i, 1) for i in range(2, 12)]
        curve = entr_by_turncount(rows, sigma=1.0)
        assert all(row.smoothed_mean == 1.0 for row in curve)

    def test_impulse_spreads(self):
        rows = [(1, 0.0), (2, 0.0), (3, 1.0), (4, 0.0), (5, 0.0)]
        curve = entr_by_turncount(rows, sigma=0.5)
        smoothed = [row.smoothed_mean for row in curve]
        assert smoothed[2] < 1.0
        assert smoothed[1] > 0.0
        assert smoothed[2] == max(smoothed)

    def test_empty(self):
        assert entr_by_turncount([], sigma=1.0) == []
