import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autotour.evalkit import (
    MetricWeights,
    RatingSet,
    SystemCounts,
    ZeroDenominator,
    bucket_scores,
    density_bucket_scores,
    f1_from_pr,
    names_match,
    score_scene,
    system_metrics,
    weighted_score,
)


class TestWeights:
    def test_defaults_sum_to_one(self):
        MetricWeights()

    @pytest.mark.parametrize("weights", [
        (0.5, 0.5, 0.5, 0.5), (0.25, 0.25, 0.25, 0.2), (-0.1, 0.5, 0.3, 0.3),
    ])
    def test_invalid_rejected(self, weights):
        with pytest.raises(ValueError):
            MetricWeights(*weights)


class TestRatings:
    @pytest.mark.parametrize("value", [0.5, 4.5, 0.0])
    def test_range_enforced(self, value):
        with pytest.raises(ValueError):
            RatingSet(value, 2.0, 2.0, 2.0)


class TestWeightedScore:
    def test_reference_city_score(self):
        r = RatingSet(3.908, 3.892, 3.538, 3.769)
        assert weighted_score(r) == pytest.approx(3.80, abs=0.01)

    def test_uniform_ratings_fixed_point(self):
        r = RatingSet(3.0, 3.0, 3.0, 3.0)
        assert weighted_score(r) == pytest.approx(3.0)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=1.0, max_value=4.0), min_size=4, max_size=4))
    def test_bounded_by_extremes(self, vals):
        r = RatingSet(*vals)
        assert min(vals) - 1e-9 <= weighted_score(r) <= max(vals) + 1e-9


class TestSystemMetrics:
    def test_reference_f1(self):
        assert f1_from_pr(0.877, 0.884) == pytest.approx(0.880, abs=0.001)

    def test_counts(self):
        c = SystemCounts(n_correct_identified=8, n_ground_truth=10,
                         n_total_identified=9, n_correct_matches=7, n_total_matches=8)
        m = system_metrics(c)
        assert m["IR"] == pytest.approx(0.8)
        assert m["IP"] == pytest.approx(8 / 9)
        assert m["MR"] == pytest.approx(0.7)
        assert m["MP"] == pytest.approx(7 / 8)
        assert m["F1_id"] == pytest.approx(f1_from_pr(m["IP"], m["IR"]))

    def test_zero_denominator_named(self):
        with pytest.raises(ZeroDenominator) as exc:
            system_metrics(SystemCounts(0, 0, 5, 0, 5))
        assert exc.value.metric == "IR"

    def test_counts_invariants(self):
        with pytest.raises(ValueError):
            SystemCounts(n_correct_identified=5, n_total_identified=3)

    def test_addition(self):
        a = SystemCounts(1, 2, 3, 1, 2)
        b = SystemCounts(2, 3, 4, 2, 3)
        assert a + b == SystemCounts(3, 5, 7, 3, 5)


class TestBuckets:
    def test_distance_bucket_labels(self):
        r = RatingSet(3.0, 3.0, 3.0, 3.0)
        out = bucket_scores([(5.0, r), (15.0, r), (35.0, r), (80.0, r)])
        assert set(out) == {"<10m", "10-30m", "30-50m", ">50m"}

    def test_empty_bucket_absent(self):
        r = RatingSet(3.0, 3.0, 3.0, 3.0)
        out = bucket_scores([(5.0, r)])
        assert set(out) == {"<10m"}

    def test_means_computed(self):
        out = bucket_scores([
            (5.0, RatingSet(2.0, 2.0, 2.0, 2.0)),
            (6.0, RatingSet(4.0, 4.0, 4.0, 4.0)),
        ])
        assert out["<10m"].completeness == pytest.approx(3.0)

    def test_density_levels(self):
        r = RatingSet(3.0, 3.0, 3.0, 3.0)
        out = density_bucket_scores([(1, r), (3, r), (5, r)])
        assert set(out) == {"1", "3", "5"}


class TestNamesMatch:
    @pytest.mark.parametrize("a,b,expected", [
        ("Multi-storey building (left)", "Multi-storey building (left)", True),
        ("multi-storey building", "Multi-Storey Building (left)", True),
        ("Elevated walkway", "walkway", True),
        ("Clock Tower", "Harbour Office", False),
        ("", "x", False),
    ])
    def test_token_overlap(self, a, b, expected):
        assert names_match(a, b) is expected


class _FakeScene:
    def __init__(self, annotations):
        self.annotations = annotations


class _FakeAnnotation:
    def __init__(self, label, matched_feature_id):
        self.label = label
        self.matched_feature_id = matched_feature_id


class TestScoreScene:
    TRUTH = {"features": [
        {"name": "West Tower", "osm_id": "way/1"},
        {"name": "Footbridge", "osm_id": "way/2"},
    ]}

    def test_perfect_scene(self):
        scene = _FakeScene([
            _FakeAnnotation("West Tower", "way/1"),
            _FakeAnnotation("Footbridge", "way/2"),
        ])
        c = score_scene(scene, self.TRUTH)
        assert system_metrics(c) == {
            "IR": 1.0, "IP": 1.0, "MR": 1.0, "MP": 1.0, "F1_id": 1.0, "F1_match": 1.0}

    def test_wrong_match_counts_identification_only(self):
        scene = _FakeScene([_FakeAnnotation("West Tower", "way/9")])
        c = score_scene(scene, self.TRUTH)
        assert c.n_correct_identified == 1
        assert c.n_correct_matches == 0

    def test_false_positive_lowers_precision(self):
        scene = _FakeScene([
            _FakeAnnotation("West Tower", "way/1"),
            _FakeAnnotation("Phantom Cathedral", "way/3"),
        ])
        c = score_scene(scene, self.TRUTH)
        m = system_metrics(c)
        assert m["IP"] == pytest.approx(0.5)
        assert m["IR"] == pytest.approx(0.5)

    def test_each_truth_feature_used_once(self):
        scene = _FakeScene([
            _FakeAnnotation("West Tower", "way/1"),
            _FakeAnnotation("West Tower", "way/1"),
        ])
        c = score_scene(scene, self.TRUTH)
        assert c.n_correct_identified == 1
