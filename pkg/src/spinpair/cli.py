"""Command-line front end: state preparation and tomography reports, decay
sweeps, noise-model fitting, and the per-molecule rate reports.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 fit
non-convergence.  Outputs carry no timestamps, so identical configuration
and seed produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import estimation
from .channels import NoiseParams
from .estimation import (
    COHERENCE_CURVE_KINDS,
    CURVE_KINDS,
    ConvergenceError,
    DataError,
    DecayCurve,
    fit_exponential,
    fit_noise_model,
    gamma3_difference,
    load_curve,
    save_curve,
    signal_model,
)
from .evolution import default_time_grid, propagate
from .plotting import Series, render_decay_plot
from .presets import PRESETS, get_preset
from .spinops import SpinSystem
from .states import MAXIMALLY_MIXED, coherence_state, prepare_target
from .tomography import SETTINGS, fidelity, reconstruct, simulate_readout

PREPARE_TARGETS = ("ZQ", "DQ", "SQ1", "SQ2")

# Density-matrix element whose magnitude is each coherence kind's signal.
CHARACTERISTIC_ELEMENT = {"ZQ": (1, 2), "DQ": (0, 3), "SQ1": (0, 2), "SQ2": (0, 1)}


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    system: SpinSystem | None = None
    noise: NoiseParams | None = None
    epsilon: float = 1.0
    nu_rf: float | None = None
    time_grid: np.ndarray | None = None
    seed: int = 0
    noise_sigma: float = 0.0

    def require_system(self) -> SpinSystem:
        if self.system is None:
            raise ConfigError("no spin system configured; pass --preset or a config with 'system'")
        return self.system

    def require_noise(self) -> NoiseParams:
        if self.noise is None:
            raise ConfigError("no noise rates configured; pass --preset or a config with 'noise'")
        return self.noise

    def grid(self) -> np.ndarray:
        return self.time_grid if self.time_grid is not None else default_time_grid()


def _parse_system(value) -> SpinSystem:
    if isinstance(value, str):
        if value not in PRESETS:
            raise ConfigError(f"system: unknown preset {value!r}; available: {sorted(PRESETS)}")
        return PRESETS[value].system
    if not isinstance(value, dict):
        raise ConfigError("system: expected a preset name or an object with nu1/nu2/j12")
    try:
        return SpinSystem(
            nu1=float(value["nu1"]),
            nu2=float(value["nu2"]),
            j12=float(value["j12"]),
            name=str(value.get("name", "")),
        )
    except KeyError as exc:
        raise ConfigError(f"system: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"system: {exc}") from None


def _parse_noise(value) -> NoiseParams:
    if not isinstance(value, dict):
        raise ConfigError("noise: expected an object with gamma1..Gamma2 rates in 1/s")
    try:
        return NoiseParams(
            gamma1=float(value["gamma1"]),
            gamma2=float(value["gamma2"]),
            gamma3=float(value["gamma3"]),
            Gamma1=float(value["Gamma1"]),
            Gamma2=float(value["Gamma2"]),
            nbar=float(value.get("nbar", 0.5)),
        )
    except KeyError as exc:
        raise ConfigError(f"noise: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"noise: {exc}") from None


def _parse_time_grid(value) -> np.ndarray:
    if isinstance(value, dict):
        try:
            grid = default_time_grid(
                start=float(value.get("start", 1e-3)),
                stop=float(value.get("stop", 10.0)),
                points=int(value.get("points", 64)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"time_grid: {exc}") from None
        return grid
    try:
        grid = np.asarray([float(v) for v in value], dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("time_grid: expected a list of seconds or {start, stop, points}") from None
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ConfigError("time_grid: must be a strictly increasing list of non-negative seconds")
    return grid


def load_config(args) -> RunConfig:
    """Resolve the run configuration from preset, config file, and flags."""
    config = RunConfig()
    if getattr(args, "preset", None):
        preset = PRESETS.get(args.preset)
        if preset is None:
            raise ConfigError(f"unknown preset {args.preset!r}; available: {sorted(PRESETS)}")
        config.system = preset.system
        config.noise = preset.noise
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top-level config must be an object")
        known = {"system", "noise", "epsilon", "nu_rf", "time_grid", "seed", "noise_sigma"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown config fields {unknown}")
        if "system" in raw:
            config.system = _parse_system(raw["system"])
        if "noise" in raw:
            config.noise = _parse_noise(raw["noise"])
        if "epsilon" in raw:
            config.epsilon = float(raw["epsilon"])
            if not 0.0 <= config.epsilon <= 1.0:
                raise ConfigError("epsilon: must lie in [0, 1]")
        if "nu_rf" in raw and raw["nu_rf"] is not None:
            config.nu_rf = float(raw["nu_rf"])
        if "time_grid" in raw:
            config.time_grid = _parse_time_grid(raw["time_grid"])
        if "seed" in raw:
            config.seed = int(raw["seed"])
        if "noise_sigma" in raw:
            config.noise_sigma = float(raw["noise_sigma"])
            if config.noise_sigma < 0:
                raise ConfigError("noise_sigma: must be non-negative")
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "nu_rf", None) is not None:
        config.nu_rf = args.nu_rf
    return config


def _out_dir(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _matrix_json(rho: np.ndarray) -> list[list[list[float]]]:
    """Nested [re, im] pairs for a complex matrix."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(rho, dtype=complex)]


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _scaled_target(kind: str, epsilon: float) -> np.ndarray:
    return (1.0 - epsilon) * MAXIMALLY_MIXED + epsilon * coherence_state(kind)


def cmd_prepare(args) -> int:
    config = load_config(args)
    system = config.require_system()
    if config.epsilon == 0.0:
        print("warning: epsilon = 0, the deviation part is empty; "
              "comparing against the maximally mixed state", file=sys.stderr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        state = prepare_target(args.target, system, config.epsilon, config.nu_rf)
    records = [simulate_readout(state, s) for s in SETTINGS]
    reconstructed = reconstruct(records)
    fid = fidelity(reconstructed, _scaled_target(args.target, config.epsilon))
    print(f"prepared {args.target} (epsilon = {config.epsilon:g}): "
          f"fidelity vs target = {fid:.6f}")
    out = _out_dir(args)
    if out is not None:
        payload = {
            "target": args.target,
            "epsilon": config.epsilon,
            "fidelity": fid,
            "state": _matrix_json(state),
            "reconstructed": _matrix_json(reconstructed),
        }
        path = out / f"state_{args.target}.json"
        _write_json(payload, path)
        print(f"wrote {path}")
    return 0


def _decay_signals(kind: str, config: RunConfig, times: np.ndarray) -> np.ndarray:
    """Normalized decay signal on the grid.

    Coherence kinds propagate the prepared state under the full generator and
    read the magnitude of the kind's characteristic element; the
    inversion-recovery kinds use the closed-form recovery signal, since the
    infinite-temperature model relaxes to zero net magnetization rather than
    to the thermal value the experimental procedure rides on.
    """
    noise = config.require_noise()
    if kind in COHERENCE_CURVE_KINDS:
        r, s = CHARACTERISTIC_ELEMENT[kind]
        rho0 = coherence_state(kind)
        # Normalizing by the propagated t = 0 value makes the t = 0 row
        # exactly 1.0: the cached propagator is reused for both evaluations.
        reference = abs(propagate(rho0, noise, 0.0)[r, s])
        return np.array([abs(propagate(rho0, noise, t)[r, s]) / reference for t in times])
    return signal_model(kind, noise, times)


def cmd_decay(args) -> int:
    config = load_config(args)
    times = config.grid()
    signals = _decay_signals(args.kind, config, times)
    if config.noise_sigma > 0.0:
        rng = np.random.default_rng(config.seed)
        signals = signals * (1.0 + config.noise_sigma * rng.standard_normal(times.size))
    curve = DecayCurve(args.kind, times, signals)
    out = _out_dir(args)
    if out is None:
        raise ConfigError("decay requires --out to write the curve")
    if args.format == "json":
        path = out / f"decay_{args.kind}.json"
        _write_json(
            {"kind": args.kind, "t": [float(v) for v in times],
             "signal": [float(v) for v in signals]},
            path,
        )
    else:
        path = out / f"decay_{args.kind}.csv"
        save_curve(curve, path)
    print(f"wrote {path}")
    return 0


def cmd_tomo(args) -> int:
    config = load_config(args)
    system = config.require_system()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        state = prepare_target(args.target, system, config.epsilon, config.nu_rf)
    if args.time is not None:
        if args.time < 0:
            raise ConfigError("--time must be non-negative")
        state = propagate(state, config.require_noise(), args.time)
    records = [simulate_readout(state, s) for s in SETTINGS]
    reconstructed = reconstruct(records)
    fid = fidelity(reconstructed, _scaled_target(args.target, config.epsilon))
    payload = {
        "target": args.target,
        "epsilon": config.epsilon,
        "time": args.time if args.time is not None else 0.0,
        "fidelity_vs_target": fid,
        "matrix": _matrix_json(reconstructed),
        "records": {rec.setting: list(rec.observables) for rec in records},
    }
    print(f"tomography of {args.target}: fidelity vs target = {fid:.6f}")
    out = _out_dir(args)
    if out is not None:
        path = out / f"tomo_{args.target}.json"
        _write_json(payload, path)
        print(f"wrote {path}")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _parse_curve_args(pairs: list[str]) -> dict[str, Path]:
    paths: dict[str, Path] = {}
    for pair in pairs:
        kind, sep, path = pair.partition("=")
        if not sep:
            raise ConfigError(f"--curve expects KIND=PATH, got {pair!r}")
        if kind not in CURVE_KINDS:
            raise ConfigError(f"--curve: unknown kind {kind!r}; expected one of {CURVE_KINDS}")
        if kind in paths:
            raise ConfigError(f"--curve: duplicate kind {kind!r}")
        paths[kind] = Path(path)
    return paths


def _fit_plot(curves: dict[str, DecayCurve], rates: dict[str, float],
              amplitudes: dict[str, float]) -> str:
    """Overlay of data points and fitted curves on log-linear axes.

    Recovery-kind curves are shown as the recovery gap (A - s)/2 = A e^(-Rt)
    so every plotted series is a positive exponential.
    """
    series: list[Series] = []
    for kind, curve in sorted(curves.items()):
        amplitude = amplitudes.get(kind, 1.0)
        if kind in estimation.RECOVERY_KINDS:
            data_y = (amplitude - curve.signals) / 2.0
            label = f"{kind} (recovery gap)"
        else:
            data_y = curve.signals
            label = kind
        series.append(Series(label=f"{label} data", x=list(curve.times), y=list(data_y), style="points"))
        dense = np.linspace(curve.times[0], curve.times[-1], 128)
        fit_y = amplitude * np.exp(-rates[kind] * dense)
        series.append(Series(label=f"{label} fit", x=list(dense), y=list(fit_y), style="line"))
    return render_decay_plot(series, title="decay fits", y_label="signal (log)")


def cmd_fit(args) -> int:
    config = load_config(args)
    paths = _parse_curve_args(args.curve)
    for mandatory in ("ZQ", "DQ"):
        if mandatory not in paths:
            raise DataError(f"fit requires a {mandatory} curve (--curve {mandatory}=PATH)")
    curves = {kind: load_curve(path, kind) for kind, path in paths.items()}

    if args.mode == "difference":
        estimates = {kind: fit_exponential(curve) for kind, curve in curves.items()}
        diff = gamma3_difference(estimates["ZQ"], estimates["DQ"])
        payload: dict = {
            "mode": "difference",
            "gamma3": diff.rate,
            "gamma3_stderr": diff.stderr,
        }
        for kind, est in sorted(estimates.items()):
            payload[f"{kind}_rate"] = est.rate
            payload[f"{kind}_rate_stderr"] = est.stderr
            payload[f"{kind}_amplitude"] = est.amplitude
        if config.noise is not None:
            context = config.noise
            base = context.gamma1 + context.gamma2 + 0.5 * (context.Gamma1 + context.Gamma2)
            payload.update(
                gamma1=context.gamma1,
                gamma2=context.gamma2,
                Gamma1=context.Gamma1,
                Gamma2=context.Gamma2,
                zq_rate_predicted=base - diff.rate,
                dq_rate_predicted=base + diff.rate,
                zq_rate_mismatch=base - diff.rate - estimates["ZQ"].rate,
                dq_rate_mismatch=base + diff.rate - estimates["DQ"].rate,
            )
        fitted_rates = {kind: est.rate for kind, est in estimates.items()}
        fitted_amplitudes = {kind: est.amplitude for kind, est in estimates.items()}
        print(f"gamma3 = {diff.rate:.6g} +/- {diff.stderr:.3g} 1/s (difference estimator)")
    else:
        fixed: dict[str, float] = {}
        needed = {"SQ1": "gamma1", "SQ2": "gamma2",
                  estimation.KIND_T1_SPIN1: "Gamma1", estimation.KIND_T1_SPIN2: "Gamma2"}
        for kind, name in needed.items():
            if kind not in curves:
                if config.noise is None:
                    raise DataError(
                        f"joint fit without a {kind} curve needs --preset/--config noise "
                        f"to fix {name}"
                    )
                fixed[name] = getattr(config.noise, name)
        report = fit_noise_model(list(curves.values()), fixed=fixed)
        payload = {"mode": "joint", **report.to_dict()}
        fitted_rates = {
            kind: estimation.rate_for_kind(kind, report.params) for kind in curves
        }
        fitted_amplitudes = report.amplitudes
        print(
            f"joint fit converged ({report.convergence_reason}, "
            f"{report.iterations} iterations): gamma3 = {report.params.gamma3:.6g} 1/s"
        )

    out = _out_dir(args)
    if out is None:
        raise ConfigError("fit requires --out to write the report")
    report_path = out / "fit_report.json"
    _write_json(payload, report_path)
    svg_path = out / "fit_plot.svg"
    svg_path.write_text(_fit_plot(curves, fitted_rates, fitted_amplitudes), encoding="utf-8")
    print(f"wrote {report_path}")
    print(f"wrote {svg_path}")
    return 0


def _report_entry(name: str) -> dict:
    preset = get_preset(name)
    rates = preset.rates
    gamma3 = rates.gamma3
    stderr = 0.5 * float(np.hypot(rates.zq_rate_err, rates.dq_rate_err))
    # Model prediction with the measured 1/T2 dephasing and 1/T1 damping rates.
    base = rates.t2_rate_1 + rates.t2_rate_2 + 0.5 * (rates.Gamma1 + rates.Gamma2)
    zq_predicted = base - gamma3
    dq_predicted = base + gamma3
    return {
        "preset": name,
        "molecule": preset.system.name,
        "gamma3": gamma3,
        "gamma3_stderr": stderr,
        "zq_rate_measured": rates.zq_rate,
        "dq_rate_measured": rates.dq_rate,
        "zq_rate_predicted": zq_predicted,
        "dq_rate_predicted": dq_predicted,
        "zq_rate_mismatch": zq_predicted - rates.zq_rate,
        "dq_rate_mismatch": dq_predicted - rates.dq_rate,
        "noise": preset.noise.as_dict(),
    }


def cmd_report(args) -> int:
    names = sorted(PRESETS) if args.preset in (None, "all") else [args.preset]
    for name in names:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    entries = [_report_entry(name) for name in names]
    for entry in entries:
        print(
            f"{entry['molecule']}: gamma3 = {entry['gamma3']:.6g} "
            f"+/- {entry['gamma3_stderr']:.3g} 1/s "
            f"(ZQ {entry['zq_rate_measured']:g}, DQ {entry['dq_rate_measured']:g})"
        )
    out = _out_dir(args)
    if out is not None:
        if args.format == "csv":
            lines = ["preset,molecule,gamma3,gamma3_stderr,zq_rate,dq_rate"]
            lines.extend(
                f"{e['preset']},{e['molecule']},{e['gamma3']:.12g},{e['gamma3_stderr']:.12g},"
                f"{e['zq_rate_measured']:.12g},{e['dq_rate_measured']:.12g}"
                for e in entries
            )
            path = out / "report.csv"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        else:
            path = out / "report.json"
            _write_json({"molecules": entries}, path)
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinpair",
        description="Two-spin decoherence simulation and noise-rate estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", help=f"built-in molecule preset: {', '.join(sorted(PRESETS))}")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="random seed override")
        p.add_argument("--nu-rf", type=float, dest="nu_rf",
                       help="rotating-frame frequency in Hz (default: shift midpoint)")

    p_prepare = sub.add_parser("prepare", help="simulate state preparation and report fidelity")
    add_common(p_prepare)
    p_prepare.add_argument("--target", choices=PREPARE_TARGETS, required=True)
    p_prepare.set_defaults(func=cmd_prepare)

    p_decay = sub.add_parser("decay", help="sweep a decay curve and write CSV")
    add_common(p_decay)
    p_decay.add_argument("--kind", choices=CURVE_KINDS, required=True)
    p_decay.add_argument("--format", choices=("csv", "json"), default="csv")
    p_decay.set_defaults(func=cmd_decay)

    p_tomo = sub.add_parser("tomo", help="simulate tomography of a prepared state")
    add_common(p_tomo)
    p_tomo.add_argument("--target", choices=PREPARE_TARGETS, required=True)
    p_tomo.add_argument("--time", type=float, help="evolve under the noise model before readout")
    p_tomo.set_defaults(func=cmd_tomo)

    p_fit = sub.add_parser("fit", help="estimate noise rates from decay-curve CSVs")
    add_common(p_fit)
    p_fit.add_argument("--curve", action="append", default=[], metavar="KIND=PATH",
                       help="decay curve CSV (repeatable)")
    p_fit.add_argument("--mode", choices=("difference", "joint"), default="difference")
    p_fit.set_defaults(func=cmd_fit)

    p_report = sub.add_parser("report", help="per-molecule correlated-dephasing report")
    add_common(p_report)
    p_report.add_argument("--format", choices=("json", "csv"), default="json")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 4


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
