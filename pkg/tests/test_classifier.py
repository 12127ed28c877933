import json
import time

import numpy as np
import pytest

from jointscope.classifier import (
    BackendInvocationError,
    FunctionScorer,
    ReferenceScorer,
    ScoreRecord,
    load_external_scores,
    measure_latency,
    reference_features,
    reference_score,
)
from jointscope.synthgen import DefectKind, JointSpec, generate_joint

# logistic(bias) with every feature at its no-structure value of zero
SIGMA_BIAS = 1.0 / (1.0 + np.exp(3.0))


def test_uniform_gray_scores_at_bias():
    img = np.full((256, 256, 3), 0.5, np.float32)
    assert np.array_equal(reference_features(img), np.zeros(5))
    assert reference_score(img) == pytest.approx(SIGMA_BIAS, rel=1e-12)
    assert reference_score(img) < 0.5


def test_clean_joint_golden_value():
    img, _ = generate_joint(JointSpec(seed=1, kind=DefectKind.NONE, pad_radius_px=60, board_hue=0.45))
    score = reference_score(img.astype(np.float32) / 255.0)
    assert score == pytest.approx(0.04742587317756678, rel=1e-6)
    assert score < 0.5


def test_splash_joint_golden_value():
    img, _ = generate_joint(JointSpec(seed=1, kind=DefectKind.SPLASH, pad_radius_px=60, board_hue=0.45))
    score = reference_score(img.astype(np.float32) / 255.0)
    assert score == pytest.approx(0.9861339160695783, rel=1e-6)
    assert score > 0.5


def test_growing_splash_confidence_non_decreasing():
    base_img, _ = generate_joint(JointSpec(seed=3, kind=DefectKind.NONE, pad_radius_px=55, board_hue=0.5))
    base = base_img.astype(np.float32) / 255.0
    yy, xx = np.mgrid[0:256, 0:256]
    prev = -1.0
    for radius in (4, 7, 10, 14, 18):
        img = base.copy()
        blob = (xx - 210) ** 2 + (yy - 60) ** 2 <= radius * radius
        img[blob] = (0.78, 0.78, 0.80)
        score = reference_score(img)
        assert score >= prev
        prev = score


def test_scores_stay_in_unit_interval_on_random_images():
    rng = np.random.default_rng(12)
    scorer = ReferenceScorer()
    for _ in range(500):
        img = rng.uniform(0.0, 1.0, (256, 256, 3)).astype(np.float32)
        s = scorer.score(img)
        assert 0.0 <= s <= 1.0


def test_features_hook_matches_function():
    img, _ = generate_joint(JointSpec(seed=9, kind=DefectKind.BURN))
    norm = img.astype(np.float32) / 255.0
    assert np.array_equal(ReferenceScorer().features(norm), reference_features(norm))


# -- external scores ----------------------------------------------------------

def test_load_external_scores(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"id":"a","confidence":0.91}\n{"id":"b","confidence":0.2,"label":0}\n')
    records = load_external_scores(path)
    assert records[0].id == "a" and records[0].confidence == 0.91
    assert records[0].oracle_label is None
    assert records[1].oracle_label == 0


def test_load_external_scores_empty_file(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text("")
    assert load_external_scores(path) == []


def test_load_external_scores_out_of_range(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"id":"bad","confidence":1.2}\n')
    with pytest.raises(ValueError, match="bad"):
        load_external_scores(path)


def test_load_external_scores_malformed_line_reports_lineno(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"id":"a","confidence":0.5}\nnot json\n')
    with pytest.raises(ValueError, match=":2"):
        load_external_scores(path)


def test_score_record_validation():
    with pytest.raises(ValueError):
        ScoreRecord(id="x", confidence=-0.1)
    with pytest.raises(ValueError):
        ScoreRecord(id="x", confidence=0.5, oracle_label=2)


# -- latency harness ----------------------------------------------------------

class CountingBackend:
    def __init__(self):
        self.calls = 0

    def score(self, image):
        self.calls += 1
        return 0.5


def test_latency_invokes_exactly_warmups_plus_runs():
    backend = CountingBackend()
    img = np.zeros((4, 4, 3), np.float32)
    measure_latency(backend, img, warmups=20, runs=100)
    assert backend.calls == 120


def test_latency_reports_only_after_warmups():
    recorded = []

    class PhaseBackend:
        def __init__(self):
            self.calls = 0

        def score(self, image):
            self.calls += 1
            recorded.append(self.calls)
            return 0.0

    backend = PhaseBackend()
    measure_latency(backend, np.zeros((2, 2, 3), np.float32), warmups=5, runs=3)
    # the mean can only be formed after every one of the 5 warmups happened
    assert recorded == [1, 2, 3, 4, 5, 6, 7, 8]


def test_latency_sleepy_backend_bounds():
    backend = FunctionScorer(lambda img: time.sleep(0.01) or 0.5)
    mean_s = measure_latency(backend, np.zeros((2, 2, 3), np.float32), warmups=2, runs=10)
    assert 0.010 <= mean_s <= 0.020


def test_latency_single_run_no_warmup():
    times = iter([0.0, 0.25])

    class OneShot:
        def score(self, image):
            return 1.0

    mean_s = measure_latency(OneShot(), np.zeros((2, 2, 3), np.float32), warmups=0, runs=1)
    assert mean_s >= 0.0


def test_latency_propagates_failure_with_index():
    class Flaky:
        def __init__(self):
            self.calls = 0

        def score(self, image):
            self.calls += 1
            if self.calls == 4:
                raise RuntimeError("boom")
            return 0.5

    with pytest.raises(BackendInvocationError) as err:
        measure_latency(Flaky(), np.zeros((2, 2, 3), np.float32), warmups=2, runs=5)
    assert err.value.index == 3


def test_latency_validates_params():
    with pytest.raises(ValueError):
        measure_latency(CountingBackend(), np.zeros((2, 2, 3), np.float32), runs=0)
