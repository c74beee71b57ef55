import numpy as np
import pytest

from svreg.cli import CURVE_INFO_HEADER, TUNE_HEADER, main
from svreg.estimator import FitConfig, fit, predict
from svreg.experiments import CSV_HEADER
from svreg.persist import load_dataset, load_model
from svreg.synthesis import sample_dataset
from svreg.tuning import constants_from_model, select_noisy

MODEL_CFG = """
curve.kind = line
curve.d = 3
curve.length = 2.0
link.kind = identity
sigma_gamma = 0.2
sigma_zeta = 0.05
"""

FIT_CFG = "l = 6\nj = 1\nm = 1\n"


@pytest.fixture()
def model_cfg(tmp_path):
    path = tmp_path / "model.cfg"
    path.write_text(MODEL_CFG)
    return path


def test_curve_info_prints_one_csv_row(capsys):
    main(["curve-info", "--kind", "arc", "--d", "4", "--length", "2.0",
          "--kappa", "0.5"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == CURVE_INFO_HEADER
    cells = lines[1].split(",")
    assert cells[0] == "arc" and cells[1] == "4"
    assert float(cells[2]) == pytest.approx(2.0, rel=1e-3)    # length
    assert float(cells[3]) == pytest.approx(2.0, rel=1e-2)    # reach = 1/kappa
    assert float(cells[4]) == pytest.approx(0.5, rel=1e-2)    # curvature


def test_curve_info_normalize_reach(capsys):
    main(["curve-info", "--kind", "meyer-helix", "--d", "3",
          "--normalize-reach", "1.7320508075688772", "--grid", "2000"])
    cells = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(cells[3]) == pytest.approx(3 ** 0.5, rel=1e-6)


def test_synth_fit_predict_round_trip(tmp_path, model_cfg):
    data = tmp_path / "train.csv"
    main(["synth", "--model", str(model_cfg), "--n", "2000",
          "--seed", "5", "--out", str(data)])
    ds = load_dataset(data)
    assert ds.n == 2000 and ds.d == 3
    assert ds.oracle_t is not None

    fit_cfg = tmp_path / "fit.cfg"
    fit_cfg.write_text(FIT_CFG)
    model_out = tmp_path / "model.json"
    main(["fit", "--data", str(data), "--config", str(fit_cfg),
          "--out", str(model_out)])
    preds_out = tmp_path / "preds.csv"
    main(["predict", "--model", str(model_out), "--data", str(data),
          "--out", str(preds_out)])

    # the files carry exactly the in-memory pipeline
    lib_model = fit(ds.X, ds.Y, FitConfig(l=6, j=1, m=1))
    expect = predict(lib_model, ds.X)
    assert np.array_equal(np.loadtxt(preds_out, skiprows=1), expect)
    assert np.array_equal(predict(load_model(model_out), ds.X), expect)


def test_synth_no_oracle_drops_columns(tmp_path, model_cfg):
    data = tmp_path / "bare.csv"
    main(["synth", "--model", str(model_cfg), "--n", "100", "--seed", "5",
          "--out", str(data), "--no-oracle"])
    ds = load_dataset(data)
    assert ds.oracle_t is None and ds.oracle_tangent is None
    # X, Y agree with the oracle-bearing draw at the same seed
    full = tmp_path / "full.csv"
    main(["synth", "--model", str(model_cfg), "--n", "100", "--seed", "5",
          "--out", str(full)])
    assert np.array_equal(ds.X, load_dataset(full).X)


def test_tune_row_matches_library_selection(tmp_path, model_cfg, capsys):
    main(["tune", "--model", str(model_cfg), "--n", "50000",
          "--abs-const", "regime_high=100.0"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == TUNE_HEADER
    cells = lines[1].split(",")

    from svreg.persist import model_from_config
    model = model_from_config(model_cfg)
    tc = constants_from_model(model, {"regime_high": 100.0})
    sel = select_noisy(tc, 50_000)
    assert cells[0] == str(sel.l) and cells[1] == str(sel.j)
    assert cells[2] == sel.regime
    assert all(np.isfinite(float(c)) for c in cells[3:6])
    assert int(cells[6]) >= 3


def test_tune_noiseless_regime_reports_nan_mstar(tmp_path, capsys):
    cfg = tmp_path / "noiseless.cfg"
    cfg.write_text(MODEL_CFG.replace("sigma_zeta = 0.05", "sigma_zeta = 0"))
    main(["tune", "--model", str(cfg), "--n", "1000",
          "--regime", "noiseless"])
    cells = capsys.readouterr().out.splitlines()[1].split(",")
    assert cells[2] == "noiseless"
    assert cells[4] == "nan" and cells[5] == "nan"   # noisy-only constants


def test_experiment_runs_config_to_csv(tmp_path, model_cfg, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(MODEL_CFG + "\nn_grid = 500, 1000\nreps = 2\n"
                   "strategy = fixed\nfixed.l = 5\nfixed.j = 1\n"
                   "fixed.m = 1\noracle_n = 2000\nseed = 7\n")
    out = tmp_path / "rows.csv"
    main(["experiment", "--config", str(cfg), "--out", str(out)])
    assert "4 rows" in capsys.readouterr().err
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 5

    # a rerun is byte-identical
    again = tmp_path / "again.csv"
    main(["experiment", "--config", str(cfg), "--out", str(again)])
    capsys.readouterr()
    assert again.read_bytes() == out.read_bytes()


def test_errors_exit_with_code_two(tmp_path, capsys):
    missing = tmp_path / "nope.cfg"
    with pytest.raises(SystemExit) as err:
        main(["synth", "--model", str(missing), "--n", "10", "--seed", "1",
              "--out", str(tmp_path / "x.csv")])
    assert err.value.code == 2
    assert "svr: error:" in capsys.readouterr().err

    bad = tmp_path / "bad.cfg"
    bad.write_text("curve.kind = dodecahedron\n")
    with pytest.raises(SystemExit) as err:
        main(["tune", "--model", str(bad), "--n", "100"])
    assert err.value.code == 2
