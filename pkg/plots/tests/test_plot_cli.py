import pytest

from svrplot.cli import main

from test_plotting import NS, power_law_rows, write_bars, write_metrics


def test_loglog_writes_file_and_prints_slopes(tmp_path, capsys):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5, sigma_zeta="0.05")
                  + power_law_rows(NS, -1.0, sigma_zeta="0.2"))
    out = tmp_path / "curves.png"
    rc = main(["loglog", "--csv", str(csv), "--y", "mse",
               "--group", "sigma_zeta",
               "--window", f"{NS[0]},{NS[-1]}", "--out", str(out)])
    assert rc == 0 and out.exists()
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    got = {ln.split(",")[0]: float(ln.split(",")[1]) for ln in lines}
    assert abs(got["0.05"] + 0.5) < 1e-12
    assert abs(got["0.2"] + 1.0) < 1e-12


def test_loglog_explicit_format_overrides_suffix(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    out = tmp_path / "curves.img"
    main(["loglog", "--csv", str(csv), "--y", "mse", "--group", "sigma_zeta",
          "--window", f"{NS[0]},{NS[-1]}", "--out", str(out),
          "--format", "svg"])
    assert out.read_bytes().startswith(b"<?xml")


def test_bars_writes_file(tmp_path):
    csv = tmp_path / "s.csv"
    write_bars(csv, [(0.04, 2.5e-6), (0.4, 3.5e-5)])
    out = tmp_path / "bars.png"
    rc = main(["bars", "--csv", str(csv), "--group", "kappa",
               "--out", str(out)])
    assert rc == 0 and out.exists()


def test_missing_csv_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["loglog", "--csv", str(tmp_path / "nope.csv"), "--y", "mse",
              "--group", "sigma_zeta", "--window", "1,2",
              "--out", str(tmp_path / "o.png")])
    assert exc.value.code == 2
    assert "svr-plot: error:" in capsys.readouterr().err


def test_bad_window_exits_2(tmp_path, capsys):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    with pytest.raises(SystemExit) as exc:
        main(["loglog", "--csv", str(csv), "--y", "mse",
              "--group", "sigma_zeta", "--window", "10000",
              "--out", str(tmp_path / "o.png")])
    assert exc.value.code == 2
    assert "--window" in capsys.readouterr().err


def test_bad_y_field_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["loglog", "--csv", "x.csv", "--y", "fit_ms",
              "--group", "sigma_zeta", "--window", "1,2", "--out", "o.png"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err
