import json

import numpy as np
import pytest

from spinpair.channels import NoiseParams
from spinpair.cli import main
from spinpair.estimation import (
    KIND_DQ,
    KIND_SQ1,
    KIND_SQ2,
    KIND_T1_SPIN1,
    KIND_T1_SPIN2,
    KIND_ZQ,
    fit_exponential,
    load_curve,
    suggested_times,
    synthetic_curve,
    save_curve,
)

ALL_KINDS = (KIND_T1_SPIN1, KIND_T1_SPIN2, KIND_SQ1, KIND_SQ2, KIND_ZQ, KIND_DQ)


def write_config(tmp_path, **fields):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(fields), encoding="utf-8")
    return str(path)


def measured_rate_curves(tmp_path, zq_rate=0.430, dq_rate=12.182):
    """CSV pair decaying at the two measured multiple-quantum rates."""
    paths = {}
    for kind, rate in ((KIND_ZQ, zq_rate), (KIND_DQ, dq_rate)):
        t = np.linspace(0.0, 3.0 / rate, 24)
        curve = synthetic_curve(kind, NoiseParams(rate / 2, rate / 2, 0, 0, 0), t)
        path = tmp_path / f"{kind.lower()}.csv"
        save_curve(curve, path)
        paths[kind] = str(path)
    return paths


# ----------------------------------------------------------------------
# prepare
# ----------------------------------------------------------------------


@pytest.mark.parametrize("target", ["ZQ", "DQ", "SQ1"])
def test_prepare_reports_high_fidelity(tmp_path, capsys, target):
    code = main(["prepare", "--preset", "btc", "--target", target, "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    fid = float(out.split("fidelity vs target = ")[1].split()[0])
    assert fid >= 0.999
    payload = json.loads((tmp_path / f"state_{target}.json").read_text(encoding="utf-8"))
    assert payload["fidelity"] >= 0.999
    assert len(payload["state"]) == 4
    assert len(payload["state"][0][0]) == 2  # [re, im] pairs


def test_prepare_with_zero_polarization(tmp_path, capsys):
    config = write_config(tmp_path, epsilon=0.0)
    code = main(["prepare", "--preset", "btc", "--target", "DQ", "--config", config])
    assert code == 0
    captured = capsys.readouterr()
    assert "fidelity vs target = 1.000000" in captured.out
    assert "deviation part is empty" in captured.err


# ----------------------------------------------------------------------
# decay
# ----------------------------------------------------------------------


def test_decay_zq_matches_pure_dephasing(tmp_path):
    config = write_config(
        tmp_path,
        noise={"gamma1": 1.0, "gamma2": 1.0, "gamma3": 0.0, "Gamma1": 0.0, "Gamma2": 0.0},
        time_grid={"start": 1e-3, "stop": 2.0, "points": 32},
    )
    code = main(["decay", "--kind", "ZQ", "--config", config, "--out", str(tmp_path)])
    assert code == 0
    curve = load_curve(tmp_path / "decay_ZQ.csv", KIND_ZQ)
    assert np.abs(curve.signals - np.exp(-2.0 * curve.times)).max() < 1e-9
    assert curve.times[0] == 0.0
    assert curve.signals[0] == 1.0


def test_decay_dq_half_life_matches_measured_rate(tmp_path):
    code = main(["decay", "--kind", "DQ", "--preset", "btc", "--out", str(tmp_path)])
    assert code == 0
    curve = load_curve(tmp_path / "decay_DQ.csv", KIND_DQ)
    estimate = fit_exponential(curve)
    assert estimate.rate == pytest.approx(12.182, rel=1e-6)
    assert np.log(2.0) / estimate.rate == pytest.approx(0.0569, abs=1e-4)


def test_decay_t1_kind_uses_recovery_model(tmp_path):
    code = main(["decay", "--kind", KIND_T1_SPIN1, "--preset", "btc", "--out", str(tmp_path)])
    assert code == 0
    curve = load_curve(tmp_path / f"decay_{KIND_T1_SPIN1}.csv", KIND_T1_SPIN1)
    assert curve.signals[0] == pytest.approx(-1.0)
    estimate = fit_exponential(curve)
    assert estimate.rate == pytest.approx(0.264, rel=1e-6)


def test_decay_deterministic_and_reingestible(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    config = write_config(tmp_path, noise_sigma=0.01, seed=7)
    for out in (out_a, out_b):
        assert main(["decay", "--kind", "DQ", "--preset", "btc", "--config", config,
                     "--out", str(out)]) == 0
    bytes_a = (out_a / "decay_DQ.csv").read_bytes()
    bytes_b = (out_b / "decay_DQ.csv").read_bytes()
    assert bytes_a == bytes_b
    load_curve(out_a / "decay_DQ.csv", KIND_DQ)  # format self-consistency


def test_decay_json_format(tmp_path):
    code = main(["decay", "--kind", "SQ1", "--preset", "btc", "--format", "json",
                 "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "decay_SQ1.json").read_text(encoding="utf-8"))
    assert payload["kind"] == "SQ1"
    assert payload["signal"][0] == 1.0


def test_decay_without_out_is_config_error(capsys):
    assert main(["decay", "--kind", "ZQ", "--preset", "btc"]) == 2
    assert "config error" in capsys.readouterr().err


# ----------------------------------------------------------------------
# tomo
# ----------------------------------------------------------------------


def test_tomo_emits_matrix_and_fidelity(tmp_path):
    code = main(["tomo", "--preset", "btc", "--target", "ZQ", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "tomo_ZQ.json").read_text(encoding="utf-8"))
    assert payload["fidelity_vs_target"] >= 0.999
    matrix = payload["matrix"]
    assert matrix[1][2][0] == pytest.approx(0.5, abs=1e-9)
    assert set(payload["records"]) == {"II", "IX", "IY", "XX"}


def test_tomo_after_evolution(tmp_path):
    code = main(["tomo", "--preset", "btc", "--target", "DQ", "--time", "0.1",
                 "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "tomo_DQ.json").read_text(encoding="utf-8"))
    # DQ element decayed by exp(-R t) with the preset's DQ rate of 12.182/s
    expected = 0.5 * np.exp(-12.182 * 0.1)
    assert payload["matrix"][0][3][0] == pytest.approx(expected, abs=1e-6)
    assert payload["fidelity_vs_target"] < 0.999


# ----------------------------------------------------------------------
# fit
# ----------------------------------------------------------------------


def test_fit_difference_mode_reproduces_gamma3(tmp_path, capsys):
    paths = measured_rate_curves(tmp_path)
    config = write_config(
        tmp_path,
        noise={"gamma1": 3.741, "gamma2": 3.048, "gamma3": 5.876,
               "Gamma1": 0.264, "Gamma2": 0.255},
    )
    code = main([
        "fit", "--mode", "difference", "--config", config,
        "--curve", f"ZQ={paths[KIND_ZQ]}", "--curve", f"DQ={paths[KIND_DQ]}",
        "--out", str(tmp_path),
    ])
    assert code == 0
    payload = json.loads((tmp_path / "fit_report.json").read_text(encoding="utf-8"))
    assert payload["gamma3"] == pytest.approx(5.876, abs=1e-6)
    assert payload["zq_rate_mismatch"] == pytest.approx(0.7425, abs=1e-4)
    assert payload["dq_rate_mismatch"] == pytest.approx(0.7425, abs=1e-4)
    svg = (tmp_path / "fit_plot.svg").read_text(encoding="utf-8")
    assert svg.startswith("<svg")
    assert "<polyline" in svg and "<circle" in svg


def test_fit_outputs_byte_identical_across_runs(tmp_path):
    paths = measured_rate_curves(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["fit", "--preset", "btc", "--mode", "difference",
                     "--curve", f"ZQ={paths[KIND_ZQ]}", "--curve", f"DQ={paths[KIND_DQ]}",
                     "--out", str(out)]) == 0
    assert (out_a / "fit_report.json").read_bytes() == (out_b / "fit_report.json").read_bytes()
    assert (out_a / "fit_plot.svg").read_bytes() == (out_b / "fit_plot.svg").read_bytes()
    svg = (out_a / "fit_plot.svg").read_text(encoding="utf-8")
    assert "timestamp" not in svg.lower()


def test_fit_joint_mode_full_curve_set(tmp_path):
    params = NoiseParams(3.741, 3.048, 5.876, 0.264, 0.255)
    curve_args = []
    for kind in ALL_KINDS:
        curve = synthetic_curve(kind, params, suggested_times(kind, params))
        path = tmp_path / f"{kind}.csv"
        save_curve(curve, path)
        curve_args += ["--curve", f"{kind}={path}"]
    code = main(["fit", "--mode", "joint", *curve_args, "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "fit_report.json").read_text(encoding="utf-8"))
    assert payload["converged"] is True
    assert payload["gamma3"] == pytest.approx(5.876, rel=1e-6)
    residuals = [v for k, v in payload.items() if k.startswith("residual_norm_")]
    assert max(residuals) <= 1e-8


def test_fit_missing_dq_curve_is_data_error(tmp_path, capsys):
    paths = measured_rate_curves(tmp_path)
    code = main(["fit", "--curve", f"ZQ={paths[KIND_ZQ]}", "--out", str(tmp_path)])
    assert code == 3
    assert "DQ" in capsys.readouterr().err


def test_fit_rejects_unknown_kind(tmp_path, capsys):
    code = main(["fit", "--curve", "QQ=whatever.csv", "--out", str(tmp_path)])
    assert code == 2


def test_fit_non_convergence_exit_code(tmp_path, capsys, monkeypatch):
    import spinpair.cli as cli_module
    from spinpair.estimation import ConvergenceError

    def explode(curve):
        raise ConvergenceError("synthetic failure")

    monkeypatch.setattr(cli_module, "fit_exponential", explode)
    paths = measured_rate_curves(tmp_path)
    code = main(["fit", "--curve", f"ZQ={paths[KIND_ZQ]}",
                 "--curve", f"DQ={paths[KIND_DQ]}", "--out", str(tmp_path)])
    assert code == 4
    assert "fit error" in capsys.readouterr().err


# ----------------------------------------------------------------------
# report and config handling
# ----------------------------------------------------------------------


def test_report_reproduces_table_values(tmp_path):
    code = main(["report", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    by_name = {entry["preset"]: entry for entry in payload["molecules"]}
    assert by_name["btc"]["gamma3"] == pytest.approx(5.876, abs=1e-9)
    assert by_name["cytosine"]["gamma3"] == pytest.approx(3.393, abs=1e-9)
    assert by_name["coumarin"]["gamma3"] == pytest.approx(8.6735, abs=1e-9)
    assert by_name["btc"]["zq_rate_mismatch"] == pytest.approx(0.7425, abs=1e-9)


def test_report_csv_format(tmp_path):
    code = main(["report", "--format", "csv", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "report.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("preset,molecule,gamma3")
    assert len(lines) == 4


def test_unknown_preset_is_config_error(capsys):
    assert main(["prepare", "--preset", "benzene", "--target", "DQ"]) == 2
    assert "unknown preset" in capsys.readouterr().err


def test_malformed_config_is_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["prepare", "--config", str(bad), "--target", "DQ"]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_unknown_config_field_is_config_error(tmp_path, capsys):
    config = write_config(tmp_path, epsilonn=0.5)
    assert main(["prepare", "--preset", "btc", "--config", config, "--target", "DQ"]) == 2
    assert "unknown config field" in capsys.readouterr().err


def test_config_system_object(tmp_path, capsys):
    config = write_config(
        tmp_path,
        system={"nu1": 4407.7, "nu2": 3490.8, "j12": 7.1, "name": "Cytosine"},
    )
    code = main(["prepare", "--config", config, "--target", "DQ"])
    assert code == 0
    assert "fidelity vs target" in capsys.readouterr().out


def test_config_overrides_preset_noise(tmp_path):
    config = write_config(
        tmp_path,
        noise={"gamma1": 1.0, "gamma2": 1.0, "gamma3": 0.0, "Gamma1": 0.0, "Gamma2": 0.0},
        time_grid=[0.0, 0.1, 0.2, 0.4, 0.8],
    )
    code = main(["decay", "--kind", "DQ", "--preset", "btc", "--config", config,
                 "--out", str(tmp_path)])
    assert code == 0
    curve = load_curve(tmp_path / "decay_DQ.csv", KIND_DQ)
    assert np.allclose(curve.times, [0.0, 0.1, 0.2, 0.4, 0.8])
    # config noise replaced the preset's: DQ rate is 2, not 12.182
    assert np.abs(curve.signals - np.exp(-2.0 * curve.times)).max() < 1e-9


def test_tomo_without_out_prints_payload(capsys):
    code = main(["tomo", "--preset", "btc", "--target", "SQ2"])
    assert code == 0
    out = capsys.readouterr().out
    assert '"matrix"' in out
    assert "fidelity vs target" in out


def test_missing_system_is_config_error(capsys):
    assert main(["prepare", "--target", "DQ"]) == 2
    assert "no spin system" in capsys.readouterr().err
