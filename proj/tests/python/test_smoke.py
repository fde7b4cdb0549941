import json
import os

import numpy as np
import pytest

import supercompliers as sc

DATA_DIR = os.environ.get("SCK_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def small_table():
    z = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=float)
    y = np.array([1, 1, 0, 0, 1, 0, 0, 0], dtype=float)
    x = np.array([[2.0], [4.0], [6.0], [8.0], [1.0], [3.0], [5.0], [7.0]])
    return sc.Table(z, z.copy(), y, x, ["x1"])


def test_version():
    assert sc.__version__ == "0.1.0"


def test_wald_hand_example():
    t = small_table()
    est = sc.characteristics_wald(t, t.covariate("x1"), "supercomplier")
    assert est["value"] == pytest.approx(5.0)
    assert sc.supercomplier_share(t)["value"] == pytest.approx(0.25)


def test_weights_identities():
    dgp = sc.rationalization_example()
    t = sc.sample(dgp, 5000, 3)
    w = sc.compute_weights(t)
    rf = sc.supercomplier_share(t)["value"]
    assert np.mean(w["pi"]) == pytest.approx(rf, rel=1e-10)
    ca, cn = sc.other_group_shares(t)
    fs = sc.first_stage(t)["value"]
    assert ca["value"] + cn["value"] + rf == pytest.approx(fs, rel=1e-10)
    assert sc.fink_noto_check(t, t.covariate("x1"))["equal"]


def test_truth_and_tests():
    dgp = sc.rationalization_example()
    truth = sc.true_values(dgp)
    assert truth["share_cc"] == pytest.approx(0.2)
    assert truth["means"]["x1"]["supercomplier"] == pytest.approx(3.15)
    t = sc.sample(dgp, 20000, 4)
    res = sc.joint_sharp_test(t, draws=5000, seed=1)
    assert res["names"] == ["complier_never", "complier_always", "reduced_form"]
    assert not res["reject"]
    q = sc.supercomplier_quantile(t, "x1", 0.5)
    assert q["value"] == 3.0


def test_rationalize_errors():
    good = [[[0.4, 0.1], [0.3, 0.2]], [[0.15, 0.15], [0.2, 0.5]]]
    assert json.loads(sc.rationalize(good, 0.5))["shares"]["cc"] == pytest.approx(0.2)
    bad = [[[0.15, 0.15], [0.2, 0.5]], [[0.4, 0.1], [0.3, 0.2]]]
    with pytest.raises(sc.InequalityViolation, match="reduced_form"):
        sc.rationalize(bad, 0.5)


def test_data_errors():
    z = np.array([1.0, 1.0])
    with pytest.raises(sc.DataError, match="degenerate assignment arm"):
        sc.Table(z, z, z)


def test_csv_and_cli(tmp_path):
    cfg = json.dumps({"columns": {"covariates": ["x1", "x2"]}})
    t = sc.load_csv(os.path.join(DATA_DIR, "sample.csv"), cfg)
    assert t.n == 2000
    code, out, err = sc.run_cli(
        [
            "estimate",
            "--data",
            os.path.join(DATA_DIR, "sample.csv"),
            "--config",
            os.path.join(DATA_DIR, "config.json"),
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0, err
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema"] == "sck.report/1"
    assert "supercomplier" in report["shares"]
