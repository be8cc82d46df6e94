import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from netcrlb import config
from netcrlb.analytic import CondCdfParams, cond_cdf_s
from netcrlb.cli import main


def read_csv(path_or_text):
    text = path_or_text.read_text() if hasattr(path_or_text, "read_text") else path_or_text
    lines = text.splitlines()
    assert lines[0].startswith("# manifest_sha256=")
    rows = list(csv.reader(lines[1:]))
    return lines[0].split("=", 1)[1], rows[0], rows[1:]


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cond_cdf_rows_and_support(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, _ = run(["cond-cdf", "--L", 4, "--sigma_r", 20, "--points", 50, "-o", out], capsys)
    assert code == 0
    digest, header, rows = read_csv(out)
    assert header == ["s_meters", "cdf"]
    s = np.array([float(r[0]) for r in rows])
    F = np.array([float(r[1]) for r in rows])
    assert len(rows) == 50 and s[0] > 20.0
    assert np.all(np.diff(F) >= 0)
    np.testing.assert_allclose(F, cond_cdf_s(s, CondCdfParams(4, 20.0)), rtol=0, atol=1e-15)
    manifest = json.loads((tmp_path / "c.csv.manifest.txt").read_text())
    assert manifest["sha256"] == digest and manifest["params"]["L"] == 4


def test_cond_cdf_single_point(capsys):
    code, out, _ = run(["cond-cdf", "--L", 5, "--points", 1], capsys)
    assert code == 0
    assert len(read_csv(out)[2]) == 1


def test_cond_cdf_usage_errors(capsys):
    assert run(["cond-cdf", "--L", 2], capsys)[0] == 2
    assert run(["cond-cdf", "--L", 4, "--points", 0], capsys)[0] == 2
    assert run(["cond-cdf", "--L", 4, "--s-max", 5], capsys)[0] == 2
    assert run(["cond-cdf", "--L", 4, "--sigma_r", -1], capsys)[0] == 2


def test_cond_cdf_with_mc_reports_sup_norm(capsys):
    code, out, err = run(["cond-cdf", "--L", 4, "--points", 20, "--mc", 20000, "--seed", 3], capsys)
    assert code == 0
    assert read_csv(out)[1] == ["s_meters", "cdf", "empirical"]
    assert "sup-norm" in err


def test_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(["marginal", "--preset", "reuse", "--points", 100, "-o", path], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    for path in (a, b):
        assert run(["pmf-l", "--ell-max", 12, "-o", path], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_pmf_l_rows_normalized(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert run(["pmf-l", "--preset", "reuse", "--K", 2, "-o", out], capsys)[0] == 0
    _, header, rows = read_csv(out)
    assert header == ["ell", "prob"]
    assert rows[-1][0] == "tail_mass"
    probs = np.array([float(r[1]) for r in rows])
    assert probs.sum() == pytest.approx(1.0, abs=1e-6)
    assert probs[3:].sum() == pytest.approx(0.85, abs=0.05)


def test_pmf_l_single_band_paths_identical(capsys):
    a = run(["pmf-l", "--K", 1, "--ell-max", 15], capsys)[1]
    b = run(["pmf-l", "--gamma_db", 20, "--ell-max", 15], capsys)[1]
    assert read_csv(a)[2] == read_csv(b)[2]


def test_pmf_l_unreachable_threshold(capsys):
    _, out, _ = run(["pmf-l", "--beta_db", 120, "--gamma_db", 0, "--ell-max", 5], capsys)
    assert float(read_csv(out)[2][0][1]) == pytest.approx(1.0, abs=1e-9)


def test_pmf_l_validation_exit_code(capsys):
    code, out, err = run(["pmf-l", "--validate", 1000, "--ell-max", 10, "--tolerance", 1e-9], capsys)
    assert code == 4
    assert read_csv(out)[1] == ["ell", "prob", "empirical"]
    assert "deviation" in err


def test_marginal_stub_equals_conditional(capsys):
    code, out, err = run(["marginal", "--stub-pmf", "4:1", "--points", 80], capsys)
    assert code == 0
    rows = read_csv(out)[2]
    s = np.array([float(r[0]) for r in rows])
    F = np.array([float(r[1]) for r in rows])
    np.testing.assert_allclose(F, cond_cdf_s(s, CondCdfParams(4, 20.0)), atol=1e-15)
    assert "P[L<=2] = 0.000000" in err


def test_marginal_atom_at_M(capsys):
    _, out, err = run(["marginal", "--preset", "reuse", "--points", 200], capsys)
    rows = read_csv(out)[2]
    s = np.array([float(r[0]) for r in rows])
    F = np.array([float(r[1]) for r in rows])
    i = int(np.flatnonzero(s == 200.0)[0])
    assert F[i] - F[i - 1] > 0.7
    assert np.all(np.diff(F) >= 0) and F[-1] == pytest.approx(1.0, abs=1e-6)


def test_marginal_missing_M_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "net.cfg"
    cfg.write_text("alpha = 4\ngamma_db = 20\nbeta_db = 10\nsigma_r = 20\nN = 10\n")
    code, _, err = run(["marginal", "--config", cfg], capsys)
    assert code == 2 and "M" in err


def test_bad_config_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["pmf-l", "--config", bad], capsys)[0] == 2
    assert run(["pmf-l", "--config", tmp_path / "missing.cfg"], capsys)[0] == 2
    assert run(["marginal", "--stub-pmf", "four"], capsys)[0] == 2
    assert run(["pmf-l", "--K", 1.5], capsys)[0] == 2


def test_sweep_sigma_r_scales(tmp_path, capsys):
    code, _, _ = run(["sweep", "--param", "sigma_r", "--values", "20,40", "--outdir", tmp_path,
                      "--points", 300], capsys)
    assert code == 0
    _, header, rows = read_csv(tmp_path / "summary.csv")
    assert header == ["value", "localizable_fraction", "p80_meters"]
    assert float(rows[0][1]) == float(rows[1][1])
    curves = {}
    for v in (20, 40):
        _, _, r = read_csv(tmp_path / f"marginal_sigma_r={v}.csv")
        curves[v] = (np.array([float(x[0]) for x in r]), np.array([float(x[1]) for x in r]))
    s20, F20 = curves[20]
    s40, F40 = curves[40]
    # stay clear of the jump at M = 200 on the sigma_r = 40 curve
    below = (s20 < 95.0) & (s20 > 30.0)
    np.testing.assert_allclose(np.interp(2 * s20[below], s40, F40), F20[below], atol=2e-3)


def test_sweep_empty_values(tmp_path, capsys):
    assert run(["sweep", "--param", "K", "--values", "", "--outdir", tmp_path], capsys)[0] == 2
    assert run(["sweep", "--param", "nope", "--values", "1", "--outdir", tmp_path], capsys)[0] == 2


def test_sweep_presets_roundtrip(tmp_path, capsys):
    param, values = config.SWEEPS["gain"]
    vals = ",".join(str(v) for v in values[:2])
    assert run(["sweep", "--preset", "gain", "--param", param, "--values", vals, "--outdir", tmp_path,
                "--points", 100], capsys)[0] == 0
    _, _, rows = read_csv(tmp_path / "summary.csv")
    assert float(rows[0][1]) <= float(rows[1][1])


def test_mi_dedupes_and_warns(capsys, caplog):
    code, out, err = run(["mi", "--L", "4,4,3", "--samples", 20000, "--no-assert"], capsys)
    assert code == 0
    _, header, rows = read_csv(out)
    assert header == ["L", "i", "mi_bits", "n_samples", "bin_width"]
    assert [r[0] for r in rows] == ["3"] * 3 + ["4"] * 3
    assert "below" in caplog.text


def test_mi_usage_errors(capsys):
    assert run(["mi", "--L", "2,3"], capsys)[0] == 2
    assert run(["mi", "--L", "x"], capsys)[0] == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\ngamma_db = 30  # trailing\nK = 2\n")
    parsed = config.load(cfg)
    assert parsed["gamma"] == pytest.approx(1000.0) and parsed["K"] == 2
    with pytest.raises(config.ConfigParseError):
        config.parse_text("gamma 30")
    assert config.default_config()["M"] == 200.0


def test_console_script_runs(tmp_path):
    res = subprocess.run([sys.executable, "-m", "netcrlb", "cond-cdf", "--L", "3", "--points", "3"],
                         capture_output=True, text=True, check=True)
    assert len(read_csv(res.stdout)[2]) == 3
