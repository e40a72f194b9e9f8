import json
import math

import numpy as np
import pytest

import cpdkit as ck
from cpdkit.api import handle_raw, handle_request


def call(op, **fields):
    response = handle_request({"op": op, **fields})
    assert response["ok"], response
    return response["result"]


def call_error(op, **fields):
    response = handle_request({"op": op, **fields})
    assert not response["ok"], response
    return response["error"]


HAND_MODEL = {"residuals": [-0.4, 0.5, 0.5], "n_calib": 3}


class TestFitOp:
    def test_matches_fit_conformal(self):
        result = call("fit", y=[1.0, 0.0, 2.0], y_hat=[0.5, 0.2, 1.0], sigma_hat=[1.0, 0.5, 2.0])
        assert result["model"]["residuals"] == pytest.approx([-0.4, 0.5, 0.5], abs=1e-12)
        assert result["model"]["n_calib"] == 3

    def test_length_mismatch_names_arrays(self):
        err = call_error("fit", y=[1.0], y_hat=[0.5, 0.2], sigma_hat=[1.0, 0.5])
        assert err["type"] == "contract"
        assert "y=1" in err["message"] and "y_hat=2" in err["message"]

    def test_bad_sigma_is_contract_error(self):
        err = call_error("fit", y=[1.0], y_hat=[0.5], sigma_hat=[0.0])
        assert err["type"] == "contract"


class TestCdfOps:
    def test_scalar(self):
        result = call("cdf", model=HAND_MODEL, y_hat=1.0, sigma_hat=1.0, y=1.0, tau=0.5)
        assert result["value"] == 0.375

    def test_batch(self):
        queries = [
            {"y_hat": 1.0, "sigma_hat": 1.0, "y": 1.0, "tau": 0.5},
            {"y_hat": 1.0, "sigma_hat": 1.0, "y": 1.5, "tau": 0.5},
            {"y_hat": 1.0, "sigma_hat": 1.0, "y": -10.0, "tau": 0.5},
        ]
        result = call("cdf_batch", model=HAND_MODEL, queries=queries)
        assert result["values"] == [0.375, 0.625, 0.125]

    def test_equals_in_process(self):
        dist = ck.PredictiveDistribution(
            thresholds=ck.calibration_scores(
                ck.ConformalModel(np.array([-0.4, 0.5, 0.5]), 3, 1),
                ck.PointPrediction("t", 0.3, 1.7),
            ),
            tau=0.25,
        )
        result = call("cdf", model=HAND_MODEL, y_hat=0.3, sigma_hat=1.7, y=0.9, tau=0.25)
        assert result["value"] == ck.cdf_value(dist, 0.9)


class TestIntervalOp:
    def test_unbounded_encoded_as_tokens(self):
        result = call("interval", model=HAND_MODEL, y_hat=0.0, sigma_hat=1.0, epsilon=0.05)
        assert result["interval"]["lower"] == "-inf"
        assert result["interval"]["upper"] == "inf"

    def test_bounded(self):
        model = {"residuals": [float(i) for i in range(1, 20)], "n_calib": 19}
        result = call("interval", model=model, y_hat=0.0, sigma_hat=1.0, epsilon=0.2)
        assert result["interval"] == {"lower": 2.0, "upper": 18.0, "confidence": 0.8}


class TestGaussianOps:
    def test_fit(self):
        assert call("gaussian_fit", labels=[1.0, -1.0], preds=[0.0, 0.0])["sigma_fixed"] == 1.0

    def test_fit_degenerate(self):
        err = call_error("gaussian_fit", labels=[1.0, 2.0], preds=[1.0, 2.0])
        assert err["type"] == "degenerate"

    def test_interval(self):
        result = call("gaussian_interval", mu=0.0, sigma_fixed=1.0, confidence=0.9)
        assert result["interval"]["lower"] == pytest.approx(-1.644854, abs=1e-6)

    def test_cdf_and_probit(self):
        assert call("gaussian_cdf", mu=0.0, sigma_fixed=1.0, y=0.0)["value"] == 0.5
        assert call("probit", p=0.975)["value"] == pytest.approx(1.959964, abs=1e-6)

    def test_probit_domain(self):
        assert call_error("probit", p=1.0)["type"] == "contract"


class TestMetricOps:
    def test_ece_hand_example(self):
        labels = [float(i) for i in range(50)]

        def intervals(miss):
            return [
                [y + 10.0, y + 11.0] if i < miss else [y - 1.0, y + 1.0]
                for i, y in enumerate(labels)
            ]

        result = call(
            "ece",
            labels=labels,
            levels=[0.1, 0.5],
            intervals=[intervals(6), intervals(23)],
        )
        assert result["ece"] == pytest.approx(0.03, abs=1e-12)
        assert result["table"] == [[0.1, 0.12], [0.5, 0.46]]

    def test_sharpness_with_inf_tokens(self):
        result = call("sharpness", intervals=[[0.0, 2.0], ["-inf", 1.0], [1.0, 2.0]])
        assert result == {"mean_width": 1.5, "excluded_unbounded": 1}

    def test_auroc(self):
        assert call("auroc", scores=[0.9, 0.8, 0.3, 0.1], flags=[1, 1, 0, 0])["value"] == 1.0

    def test_auroc_mismatch(self):
        err = call_error("auroc", scores=[0.9], flags=[1, 0])
        assert "scores=1" in err["message"] and "flags=2" in err["message"]

    def test_decile_flags(self):
        result = call("decile_flags", labels=[float(i) for i in range(1, 11)])
        assert result["threshold"] == pytest.approx(1.9, abs=1e-12)
        assert result["flags"] == [1] + [0] * 9


class TestEvaluateOp:
    def test_cpd_report_matches_library(self):
        rng = np.random.default_rng(1)
        n_cal, n_test = 120, 200
        cal_y = rng.normal(size=n_cal)
        preds = [ck.PointPrediction(str(i), 0.0, 1.0) for i in range(n_cal)]
        model = ck.fit_conformal(preds, cal_y)
        test_y = rng.normal(size=n_test).tolist()
        test_yh = [0.0] * n_test
        test_sh = [1.0] * n_test
        result = call(
            "evaluate",
            labels=test_y,
            y_hat=test_yh,
            sigma_hat=test_sh,
            method="cpd",
            model={"residuals": model.residuals.tolist(), "n_calib": model.n_calib},
            grid_step=0.1,
            tau={"mode": "fixed", "value": 0.5},
        )
        expected = ck.evaluate_predictions(
            [ck.PointPrediction(str(i), 0.0, 1.0) for i in range(n_test)],
            test_y,
            "cpd",
            ck.grid_from_step(0.1),
            ck.TauPolicy.fixed(0.5),
            conformal=model,
        )
        assert result["report"]["ece"] == expected.ece
        assert result["report"]["auroc"] == expected.auroc
        assert result["report"]["sharpness_at"]["0.9"] == expected.sharpness_at[0.9]

    def test_gaussian_report(self):
        rng = np.random.default_rng(2)
        test_y = rng.normal(size=100).tolist()
        result = call(
            "evaluate",
            labels=test_y,
            y_hat=[0.0] * 100,
            sigma_hat=[1.0] * 100,
            method="gaussian",
            sigma_fixed=1.0,
            grid_step=0.1,
        )
        assert result["report"]["method_name"] == "gaussian"
        assert 0.0 <= result["report"]["ece"] <= 1.0


class TestWireFormat:
    def test_batch_routes_subrequests(self):
        response = json.loads(
            handle_raw(
                json.dumps(
                    {
                        "op": "batch",
                        "requests": [
                            {"op": "probit", "p": 0.5},
                            {"op": "probit", "p": 2.0},
                        ],
                    }
                )
            )
        )
        assert response["ok"]
        sub = response["result"]["responses"]
        assert sub[0]["ok"] and sub[0]["result"]["value"] == 0.0
        assert not sub[1]["ok"]

    def test_bad_json_is_contract_error(self):
        response = json.loads(handle_raw("{not json"))
        assert not response["ok"]
        assert response["error"]["type"] == "contract"

    def test_unknown_op(self):
        assert call_error("frobnicate")["type"] == "contract"

    def test_response_is_strict_json(self):
        raw = handle_raw(
            json.dumps(
                {"op": "interval", "model": HAND_MODEL, "y_hat": 0.0, "sigma_hat": 1.0, "epsilon": 0.05}
            )
        )
        assert "Infinity" not in raw
        parsed = json.loads(raw)
        assert parsed["result"]["interval"]["lower"] == "-inf"
