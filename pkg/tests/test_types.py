import json
import math

import numpy as np
import pytest

from cpdkit import (
    ConformalModel,
    ContractError,
    EvalReport,
    LabeledExample,
    PointPrediction,
    PredictionInterval,
    PredictiveDistribution,
)


class TestLabeledExample:
    def test_valid_construction(self):
        ex = LabeledExample("a", (0.0, 1.5), -0.25)
        assert ex.features == (0.0, 1.5)
        assert ex.label == -0.25

    def test_rejects_nan_feature(self):
        with pytest.raises(ContractError, match="feature"):
            LabeledExample("a", (0.0, float("nan")), 0.0)

    def test_rejects_infinite_label(self):
        with pytest.raises(ContractError, match="label"):
            LabeledExample("a", (0.0,), math.inf)

    def test_rejects_empty_features(self):
        with pytest.raises(ContractError, match="dimension"):
            LabeledExample("a", (), 0.0)

    def test_rejects_empty_id(self):
        with pytest.raises(ContractError, match="id"):
            LabeledExample("", (0.0,), 0.0)


class TestPointPrediction:
    def test_valid(self):
        p = PointPrediction("x", 0.5, 2.0)
        assert p.sigma_hat == 2.0

    @pytest.mark.parametrize("sigma", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_bad_sigma(self, sigma):
        with pytest.raises(ContractError):
            PointPrediction("x", 0.5, sigma)


class TestConformalModel:
    def test_rejects_unsorted(self):
        with pytest.raises(ContractError, match="sorted"):
            ConformalModel(residuals=np.array([1.0, 0.0]), n_calib=2, feature_dim=1)

    def test_rejects_empty(self):
        with pytest.raises(ContractError):
            ConformalModel(residuals=np.array([]), n_calib=0, feature_dim=1)

    def test_rejects_count_mismatch(self):
        with pytest.raises(ContractError, match="n_calib"):
            ConformalModel(residuals=np.array([0.0, 1.0]), n_calib=3, feature_dim=1)

    def test_residuals_read_only(self):
        m = ConformalModel(residuals=np.array([0.0, 1.0]), n_calib=2, feature_dim=1)
        with pytest.raises(ValueError):
            m.residuals[0] = 5.0


class TestPredictiveDistribution:
    def test_rejects_bad_tau(self):
        with pytest.raises(ContractError, match="tau"):
            PredictiveDistribution(thresholds=np.array([0.0]), tau=1.5)

    def test_rejects_unsorted_thresholds(self):
        with pytest.raises(ContractError, match="sorted"):
            PredictiveDistribution(thresholds=np.array([2.0, 1.0]), tau=0.5)

    def test_ties_allowed(self):
        d = PredictiveDistribution(thresholds=np.array([1.0, 1.0, 1.0]), tau=0.0)
        assert d.n_calib == 3


class TestPredictionInterval:
    def test_rejects_inverted(self):
        with pytest.raises(ContractError, match="exceeds"):
            PredictionInterval(lower=1.0, upper=0.0, confidence=0.5)

    def test_infinite_endpoints_cover_everything(self):
        iv = PredictionInterval(lower=-math.inf, upper=math.inf, confidence=0.5)
        assert iv.covers(1e300) and iv.covers(-1e300)
        assert not iv.bounded

    def test_closed_endpoints_cover(self):
        iv = PredictionInterval(lower=0.0, upper=1.0, confidence=0.5)
        assert iv.covers(0.0) and iv.covers(1.0)
        assert not iv.covers(1.0000000001)

    def test_zero_confidence_allowed(self):
        # the top of the significance grid produces confidence-0 intervals
        assert PredictionInterval(0.0, 0.0, 0.0).width == 0.0


class TestEvalReport:
    def test_rejects_out_of_range_ece(self):
        with pytest.raises(ContractError, match="ece"):
            EvalReport("m", 1.5, {0.9: 1.0}, 0.5, 10)

    def test_rejects_out_of_range_auroc(self):
        with pytest.raises(ContractError, match="auroc"):
            EvalReport("m", 0.1, {0.9: 1.0}, -0.1, 10)


def test_serialization_round_trip_is_bit_exact():
    # floats written with repr and reparsed must be the same doubles
    values = [0.1, 1 / 3, math.pi, 1e-300, -2.5000000000000004, 0.30000000000000004]
    for v in values:
        assert float(json.loads(json.dumps(v))) == v
    ex = LabeledExample("r", tuple(values[:3]), values[3])
    blob = json.dumps({"id": ex.id, "features": list(ex.features), "label": ex.label})
    back = json.loads(blob)
    restored = LabeledExample(back["id"], tuple(back["features"]), back["label"])
    assert restored == ex
