import json

import numpy as np
import pandas as pd
import pytest

from svyrsq.glm import fit_logistic
from svyrsq.main import main
from svyrsq.utils import Dataset
from svyrsq.utils.tabular import CsvSchema, read_csv, write_csv


@pytest.fixture(scope="module")
def logistic_csv(tmp_path_factory):
    rng = np.random.default_rng(2024)
    n = 300
    frame = pd.DataFrame({"age": rng.uniform(20, 80, n), "smoker": rng.integers(0, 2, n)})
    eta = -4 + 0.05 * frame["age"] + 0.8 * frame["smoker"]
    frame["case"] = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
    frame["wt"] = rng.uniform(1, 10, n)
    path = tmp_path_factory.mktemp("cli") / "cohort.csv"
    frame.to_csv(path, index=False)
    return path


def _json_out(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_fit_bundled_esoph(capsys):
    code, report = _json_out(capsys, ["fit", "bundled:esoph", "--weights", "w", "--family", "logistic", "--json"])
    assert code == 0, "fit: bundled data fits cleanly"
    stats = report["statistics"]
    assert stats["design_cox_snell"] == pytest.approx(0.0005, abs=0.0002), "fit: esoph design Cox-Snell"
    assert stats["cox_snell"] > 0.1, "fit: weighted loglik ratio over n is not a design statistic"
    assert report["formula"] == "y ~ C(agegp) + C(alcgp) + C(tobgp)"
    assert report["weight_sum"] == pytest.approx(200 + 975 * 440)


def test_fit_text_report(capsys, logistic_csv):
    code = main(["fit", str(logistic_csv), "--formula", "case ~ age + C(smoker)", "--weights", "wt"])
    out = capsys.readouterr().out
    assert code == 0
    for label in ("(Intercept)", "C(smoker)[T.1]", "cox_snell", "nagelkerke", "design_cox_snell", "design_nagelkerke"):
        assert label in out, f"fit: text report shows {label}"


def test_fit_without_weights_collapses(capsys, logistic_csv):
    code, report = _json_out(capsys, ["fit", str(logistic_csv), "--formula", "case ~ age + smoker", "--json"])
    stats = report["statistics"]
    assert code == 0
    assert stats["design_cox_snell"] == stats["cox_snell"], "fit: unit weights give equal statistics"
    assert stats["design_nagelkerke"] == stats["nagelkerke"]


def test_fit_json_matches_text(capsys, logistic_csv):
    argv = ["fit", str(logistic_csv), "--formula", "case ~ age", "--weights", "wt"]
    _, report = _json_out(capsys, argv + ["--json"])
    main(argv)
    text = capsys.readouterr().out
    for value in report["statistics"].values():
        assert repr(value) in text, "fit: text and JSON carry identical digits"
    for value in report["coef"].values():
        assert repr(value) in text


def test_fit_response_and_spline_flags(capsys, logistic_csv):
    code, report = _json_out(capsys, ["fit", str(logistic_csv), "--response", "case", "--weights", "wt",
                                      "--spline", "age=40,60", "--json"])
    assert code == 0
    assert list(report["coef"]) == ["(Intercept)", "age", "age>40", "age>60", "smoker"], "fit: spline expansion"


def test_fit_gaussian(capsys, logistic_csv):
    code, report = _json_out(capsys, ["fit", str(logistic_csv), "--formula", "age ~ smoker + case",
                                      "--family", "gaussian", "--json"])
    assert code == 0 and report["family"] == "gaussian_mle"
    assert report["statistics"]["nagelkerke"] is None, "fit: no Nagelkerke for Gaussian fits"


def test_fit_negative_weight(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"y": [0, 1, 0, 1], "x": [1.0, 2.0, 3.0, 4.0], "w": [1.0, -2.0, 1.0, 1.0]}).to_csv(path, index=False)
    code = main(["fit", str(path), "--formula", "y ~ x", "--weights", "w"])
    assert code == 2, "fit: negative weight is a schema error"
    assert "weight" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["fit", "MISSING", "--formula", "case ~ nothing"],
    ["fit", "CSV", "--formula", "case ~ nothing"],
    ["fit", "CSV", "--formula", "case age"],
    ["fit", "bundled:nope"],
])
def test_fit_usage_errors(capsys, logistic_csv, argv, tmp_path):
    argv = [str(logistic_csv) if a == "CSV" else str(tmp_path / "missing.csv") if a == "MISSING" else a for a in argv]
    assert main(argv) == 2, f"fit: usage error for {argv[1:]}"
    assert capsys.readouterr().err.startswith("error:")


def test_fit_failures_exit_3(capsys, tmp_path):
    path = tmp_path / "separated.csv"
    pd.DataFrame({"y": [0, 0, 1, 1], "x": [0.0, 1.0, 2.0, 3.0]}).to_csv(path, index=False)
    assert main(["fit", str(path), "--formula", "y ~ x"]) == 3, "fit: separation exits 3"
    assert "SeparationError" in capsys.readouterr().err


def test_fit_unconverged_exit_3(capsys, logistic_csv):
    code = main(["fit", str(logistic_csv), "--formula", "case ~ age + smoker", "--max-iter", "1"])
    captured = capsys.readouterr()
    assert code == 3, "fit: unconverged fit exits 3"
    assert "did not converge" in captured.err and "(Intercept)" in captured.out


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((120, 2))
    y = (rng.random(120) < 1 / (1 + np.exp(-(X @ [1.0, -0.7])))).astype(float)
    data = Dataset(y=y, X=X, weights=rng.uniform(0.3, 30.0, 120) / 7)
    path = tmp_path / "data.csv"
    write_csv(data, path)
    again = read_csv(path, CsvSchema.from_frame(pd.read_csv(path), "y", "weight"))
    assert np.array_equal(again.weights, data.weights) and np.array_equal(again.X, data.X), \
        "write_csv: values survive the round trip exactly"
    assert np.allclose(fit_logistic(again).coef, fit_logistic(data).coef, atol=1e-12, rtol=0)


def test_simulate_default_shape(capsys):
    code = main(["simulate", "--replicates", "3"])
    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    assert lines[0].split("\t")[:2] == ["design", "sampling_fraction"]
    assert [line.split("\t")[0] for line in lines[1:]] == \
        [f"case_control m={m}" for m in (1, 2, 5, 10, 20)] + ["population"], "simulate: five ratio rows + population"


def test_simulate_is_reproducible(capsys, monkeypatch):
    argv = ["simulate", "--pop-size", "20000", "--coef=-4,1", "--ratios", "1,2", "--replicates", "1"]
    main(argv + ["--seed", "42"])
    first = capsys.readouterr().out
    main(argv + ["--seed", "42"])
    assert capsys.readouterr().out == first, "simulate: same seed, same bytes"
    monkeypatch.setenv("SVYRSQ_SEED", "42")
    main(argv)
    assert capsys.readouterr().out == first, "simulate: SVYRSQ_SEED sets the default seed"


def test_simulate_null_signal_json(capsys):
    code, report = _json_out(capsys, ["simulate", "--pop-size", "50000", "--coef=-6,0", "--ratios", "1,5",
                                      "--replicates", "5", "--json"])
    assert code == 0
    for row in report["rows"]:
        for statistic in ("naive_cs", "design_cs", "naive_nag", "design_nag"):
            assert row[statistic] < 0.05, f"simulate: no signal gives R2 near 0 ({row['design']} {statistic})"


def test_simulate_two_phase_to_file(capsys, tmp_path):
    out = tmp_path / "table.tsv"
    code = main(["simulate", "--design", "two-phase", "--replicates", "2", "--out", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    rows = pd.read_csv(out, sep="\t")
    assert list(rows["design"]) == ["case_control", "two_phase", "full cohort"]


def test_simulate_invalid_flags(capsys):
    assert main(["simulate", "--replicates", "0"]) == 2, "simulate: replicates must be positive"
    assert main(["simulate", "--ratios", "a,b"]) == 2
    assert main(["simulate", "--design", "stratified"]) == 2


def test_replicate_esoph(capsys):
    assert main(["replicate", "esoph"]) == 0
    out = capsys.readouterr().out
    assert "main effects" in out and "interaction" in out and "Published values" in out


def test_replicate_table2_and_heuristic(capsys):
    assert main(["replicate", "table2", "--replicates", "2"]) == 0
    out = capsys.readouterr().out
    assert "population" in out and "0.0037" in out, "replicate table2: published population row shown"
    assert main(["replicate", "heuristic"]) == 0
    assert "expected_ratio" in capsys.readouterr().out


def test_replicate_unknown_target(capsys):
    assert main(["replicate", "table9"]) == 2
