"""Batch command-line front end.

One executable with subcommands for validation, network/growth analysis,
dynamics simulation, and the experiment suites. Every file-producing run
writes a manifest next to its outputs holding the command, input hashes, and
the fully resolved configuration; ``rerun`` replays a manifest and, for the
deterministic commands (all of them), reproduces the outputs byte for byte.

Exit codes: 0 success, 1 validation or assertion failure, 2 usage or I/O
error. Flags override configuration-file values; the PRODNET_OUT environment
variable sets the default output directory root.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, dynamics, experiments, growth, network, plots
from .core import (
    InternalConsistencyError,
    SchemaError,
    Tolerances,
    ValidationError,
    load_economy,
    load_tfp_config,
    validate,
)
from .serialize import file_sha256, write_csv, write_json

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record: command, hashed inputs, resolved configuration."""

    command: str
    tool_version: str
    inputs: dict
    config: dict
    outputs: list

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "inputs": self.inputs,
            "config": self.config,
            "outputs": self.outputs,
        }

    @staticmethod
    def from_dict(doc: dict) -> "RunManifest":
        missing = {"command", "tool_version", "inputs", "config", "outputs"} - set(doc)
        if missing:
            raise SchemaError(f"manifest missing fields: {sorted(missing)}")
        return RunManifest(
            command=doc["command"],
            tool_version=doc["tool_version"],
            inputs=doc["inputs"],
            config=doc["config"],
            outputs=doc["outputs"],
        )


def _hash_inputs(paths: dict[str, str | None]) -> dict:
    hashed = {}
    for name, path in paths.items():
        if path is None:
            continue
        hashed[name] = {"path": str(Path(path).resolve()), "sha256": file_sha256(path)}
    return hashed


def _write_manifest(out_dir: Path, command: str, inputs: dict, config: dict,
                    outputs: list[str]) -> None:
    manifest = RunManifest(
        command=command,
        tool_version=__version__,
        inputs=inputs,
        config=config,
        outputs=outputs,
    )
    write_json(out_dir / MANIFEST_NAME, manifest.to_dict())


def _parse_tolerances(pairs: list[str] | None, base: dict | None = None) -> Tolerances:
    overrides = dict(base or {})
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep:
            raise SchemaError(f"--tolerance expects name=value, got {pair!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError as exc:
            raise SchemaError(f"bad tolerance value in {pair!r}: {exc}") from exc
    return Tolerances().replace(**overrides)


def _tolerances_dict(tol: Tolerances) -> dict:
    return {
        "row_sum": tol.row_sum,
        "share_sum": tol.share_sum,
        "labor_floor": tol.labor_floor,
        "balance_rel": tol.balance_rel,
        "labor_consistency": tol.labor_consistency,
    }


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config file must hold a JSON object")
    return doc


def _resolve_out(explicit: str | None, command: str) -> Path:
    if explicit is not None:
        return Path(explicit)
    root = os.environ.get("PRODNET_OUT", ".")
    return Path(root) / command


def _pick(flag_value, file_config: dict, key: str, default):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    if key in file_config:
        return file_config[key]
    return default


# ---------------------------------------------------------------------------
# Command implementations (consume a fully resolved config dict)
# ---------------------------------------------------------------------------

def run_validate(config: dict, out_dir: Path | None) -> int:
    tol = Tolerances().replace(**config.get("tolerances", {}))
    try:
        economy = load_economy(config["economy"], tol, strict=False)
        report = validate(economy, tol)
    except ValidationError as exc:
        # Monetary-table imbalances surface here; the message carries row and size.
        print(f"FAIL  {exc}")
        return 1
    print(report)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / "validation.json", report.to_dict())
        _write_manifest(
            out_dir, "validate", _hash_inputs({"economy": config["economy"]}),
            config, ["validation.json"],
        )
    return 0 if report.passed else 1


def run_analyze(config: dict, out_dir: Path) -> int:
    tol = Tolerances().replace(**config.get("tolerances", {}))
    economy = load_economy(config["economy"], tol)
    beta = float(config["beta"])
    stats = network.compute_stats(economy, beta=beta)
    spectral = network.spectral_report(
        economy.A, beta=beta,
        n_samples=int(config["spectral_samples"]),
        seed=int(config["spectral_seed"]),
    )
    tfp = None
    gamma0 = None
    if config.get("tfp_config"):
        tfp = load_tfp_config(config["tfp_config"])
        if tfp.n != economy.n:
            raise SchemaError(
                f"TFP config has {tfp.n} industries but the economy has {economy.n}"
            )
        gamma0 = dynamics.steady_state(tfp, economy)
    report = growth.build_growth_report(economy, stats, gamma=gamma0, config=tfp)
    validation = validate(economy, tol)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "network_report.json", {
        "economy": economy.to_dict(),
        "stats": stats.to_dict(),
        "spectral": spectral.to_dict(),
        "validation": validation.to_dict(),
    })
    write_json(out_dir / "growth_report.json", report.to_dict())

    labels = economy.names or [str(i + 1) for i in range(economy.n)]
    header = ["industry", "label", "multiplier", "domar"]
    columns = [stats.multipliers, stats.domar]
    if gamma0 is not None:
        header += ["gamma0", "r_hat"]
        columns += [gamma0, report.r_hat]
    rows = [
        [i + 1, labels[i], *(col[i] for col in columns)] for i in range(economy.n)
    ]
    write_csv(out_dir / "stats.csv", header, rows)

    outputs = ["network_report.json", "growth_report.json", "stats.csv"]
    if config.get("plot", True):
        plots.save_analysis_figure(stats, out_dir / "analyze.png", names=economy.names)
        outputs.append("analyze.png")
    _write_manifest(
        out_dir, "analyze",
        _hash_inputs({"economy": config["economy"], "tfp_config": config.get("tfp_config")}),
        config, outputs,
    )
    print(f"analyze: wrote {', '.join(outputs)} to {out_dir}")
    return 0


def run_simulate(config: dict, out_dir: Path) -> int:
    tol = Tolerances().replace(**config.get("tolerances", {}))
    economy = load_economy(config["economy"], tol)
    tfp = load_tfp_config(config["tfp_config"])
    if tfp.n != economy.n:
        raise SchemaError(
            f"TFP config has {tfp.n} industries but the economy has {economy.n}"
        )
    t_end = float(config["t_end"])
    mode = config["mode"]
    rtol = float(config["rtol"])
    atol = float(config["atol"])
    max_step = config.get("max_step")
    max_step = t_end / 200.0 if max_step is None else float(max_step)

    if mode == "stocks":
        traj = dynamics.integrate_stocks(
            tfp, economy, t_end, rtol=rtol, atol=atol, max_step=max_step
        )
    elif mode == "rates":
        if config.get("gamma0") is not None:
            gamma_init = np.asarray(config["gamma0"], dtype=float)
        else:
            # Initial rates implied by the stock law at t = 0.
            u0 = np.log(tfp.stocks0)
            gamma_init = np.exp(
                tfp.alpha * np.log(tfp.endowments) + np.log(tfp.chi)
                + tfp.beta * (economy.A @ u0) - u0
            )
        traj = dynamics.integrate_rates(
            gamma_init, tfp, economy, t_end, rtol=rtol, atol=atol, max_step=max_step
        )
    else:
        raise SchemaError(f"mode must be 'rates' or 'stocks', got {mode!r}")

    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "trajectory.csv", traj.header(), traj.rows())
    write_json(out_dir / "simulation_report.json", {
        "mode": mode,
        "t_end": t_end,
        "tfp_config": tfp.to_dict(),
        "integrator": traj.stats.to_dict(),
        "convergence": traj.convergence.to_dict(),
    })
    outputs = ["trajectory.csv", "simulation_report.json"]
    if config.get("plot", True):
        plots.save_trajectory_figure(traj, out_dir / "simulate.png", names=economy.names)
        outputs.append("simulate.png")
    _write_manifest(
        out_dir, "simulate",
        _hash_inputs({"economy": config["economy"], "tfp_config": config["tfp_config"]}),
        config, outputs,
    )
    print(
        f"simulate[{mode}]: final gap to steady state "
        f"{traj.convergence.final_gap:.3e} (converged: {traj.convergence.converged}); "
        f"wrote {', '.join(outputs)} to {out_dir}"
    )
    return 0


def run_experiment(config: dict, out_dir: Path) -> int:
    name = config["name"]
    out_dir.mkdir(parents=True, exist_ok=True)
    plot = config.get("plot", True)
    outputs: list[str] = []

    if name == "figure1":
        report = experiments.equal_domar_experiment(
            alpha=float(config["alpha"]), beta=float(config["beta"])
        )
        write_json(out_dir / "experiment_report.json", report.to_dict())
        rows = []
        for tag, theta, dense, comp in (
            ("a", report.theta_a, report.matrix_gradient_a, report.component_gradient_a),
            ("b", report.theta_b, report.matrix_gradient_b, report.component_gradient_b),
        ):
            for i in range(2):
                rows.append([tag, i + 1, theta[i], dense[i], comp[i]])
        write_csv(
            out_dir / "contrast.csv",
            ["economy", "industry", "domar", "matrix_gradient", "component_gradient"],
            rows,
        )
        outputs += ["experiment_report.json", "contrast.csv"]
        if plot:
            plots.save_pair_contrast_figure(report, out_dir / "figure1.png")
            outputs.append("figure1.png")
        print(report.note)

    elif name == "hulten":
        report = experiments.hulten_recovery_experiment(
            n=int(config["n"]),
            seed=int(config["seed"]),
            beta=float(config["beta"]),
            alpha=float(config["alpha"]),
            intermediate_share_range=tuple(config["share_range"]),
        )
        write_json(out_dir / "experiment_report.json", report.to_dict())
        write_csv(
            out_dir / "recovery.csv",
            ["industry", "domar", "gradient", "abs_gap"],
            (
                [i + 1, report.domar[i], report.gradient[i],
                 abs(report.gradient[i] - report.domar[i])]
                for i in range(report.n)
            ),
        )
        outputs += ["experiment_report.json", "recovery.csv"]
        if plot:
            plots.save_hulten_figure(report, out_dir / "hulten.png")
            outputs.append("hulten.png")
        print(
            f"hulten recovery: max gap {report.max_gap:.3e} "
            f"(special case: {report.special_case})"
        )

    elif name == "prop1":
        ens = experiments.EnsembleConfig(
            n_industries=int(config["n"]),
            n_trials=int(config["trials"]),
            seed=int(config["seed"]),
            intermediate_share_range=tuple(config["share_range"]),
            lambda_center=float(config["lambda_center"]),
            lambda_halfwidth=float(config["lambda_halfwidth"]),
            alpha=float(config["alpha"]),
            beta=float(config["beta"]),
        )
        report = experiments.prop1_study(ens)
        sweep = experiments.prop1_sweep(ens, [float(c) for c in config["sweep_centers"]])
        write_json(out_dir / "experiment_report.json", {
            "study": report.to_dict(),
            "sweep": sweep.to_dict(),
        })
        write_csv(out_dir / "samples.csv", report.sample_header(), report.samples)
        outputs += ["experiment_report.json", "samples.csv"]
        if plot:
            plots.save_correlation_figure(report, out_dir / "prop1.png")
            outputs.append("prop1.png")
        z = abs(report.pooled_slope - report.theoretical_slope) / report.pooled_slope_se
        print(
            f"prop1: pooled slope {report.pooled_slope:.5f} vs theoretical "
            f"{report.theoretical_slope:.5f} ({z:.2f} clustered SEs apart); "
            f"mean correlation {report.mean_correlation:.4f}, "
            f"sweep sign agreement: {sweep.all_match}"
        )

    else:
        raise SchemaError(f"unknown experiment {name!r} (expected figure1|hulten|prop1)")

    _write_manifest(out_dir, "experiment", {}, config, outputs)
    print(f"experiment[{name}]: wrote {', '.join(outputs)} to {out_dir}")
    return 0


_RUNNERS = {
    "validate": run_validate,
    "analyze": run_analyze,
    "simulate": run_simulate,
    "experiment": run_experiment,
}


def run_from_manifest(manifest_path: str | Path, out_dir: Path) -> int:
    manifest = RunManifest.from_dict(json.loads(Path(manifest_path).read_text()))
    if manifest.command not in _RUNNERS:
        raise SchemaError(f"manifest names unknown command {manifest.command!r}")
    for name, entry in manifest.inputs.items():
        current = file_sha256(entry["path"])
        if current != entry["sha256"]:
            raise ValidationError(
                f"input {name!r} at {entry['path']} changed since the manifest "
                f"was written (sha256 {current} != {entry['sha256']})"
            )
    return _RUNNERS[manifest.command](manifest.config, out_dir)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodnet",
        description="Production-network growth analytics: validate, analyze, simulate, experiment.",
    )
    parser.add_argument("--version", action="version", version=f"prodnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_economy=True):
        if needs_economy:
            p.add_argument("--economy", required=False, help="economy file (JSON or delimited)")
        p.add_argument("--config", help="JSON config file; flags take precedence")
        p.add_argument("--tolerance", action="append", metavar="NAME=VALUE",
                       help="override a validation tolerance (repeatable)")
        p.add_argument("--out", help="output directory (default: $PRODNET_OUT/<command>)")

    p_val = sub.add_parser("validate", help="check an economy file against all invariants")
    add_common(p_val)

    p_ana = sub.add_parser("analyze", help="network statistics, spectral certificates, growth report")
    add_common(p_ana)
    p_ana.add_argument("--beta", type=float, default=None, help="damping for the spillover inverse (default 1.0)")
    p_ana.add_argument("--tfp-config", help="optional TFP config JSON; adds steady-state and policy fields")
    p_ana.add_argument("--spectral-samples", type=int, default=None,
                       help="random diagonal rescalings for the stability check (default 100)")
    p_ana.add_argument("--spectral-seed", type=int, default=None, help="seed for the sampled check (default 0)")
    p_ana.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p_sim = sub.add_parser("simulate", help="integrate the rate or stock dynamics")
    add_common(p_sim)
    p_sim.add_argument("--tfp-config", help="TFP config JSON (required)")
    p_sim.add_argument("--t-end", type=float, default=None, help="integration horizon")
    p_sim.add_argument("--mode", choices=["rates", "stocks"], default=None, help="which system to integrate")
    p_sim.add_argument("--gamma0", help="comma-separated initial rates (rates mode; default: implied by the stock law)")
    p_sim.add_argument("--rtol", type=float, default=None, help="relative tolerance (default 1e-8)")
    p_sim.add_argument("--atol", type=float, default=None, help="absolute tolerance (default 1e-10)")
    p_sim.add_argument("--max-step", type=float, default=None, help="step cap (default t_end/200)")
    p_sim.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p_exp = sub.add_parser("experiment", help="run a named experiment suite")
    p_exp.add_argument("name", choices=["figure1", "hulten", "prop1"])
    p_exp.add_argument("--config", help="JSON config file; flags take precedence")
    p_exp.add_argument("--out", help="output directory (default: $PRODNET_OUT/experiment-<name>)")
    p_exp.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p_exp.add_argument("--trials", type=int, default=None, help="trial count (prop1; default 1000)")
    p_exp.add_argument("--n", type=int, default=None, help="industry count (hulten/prop1; default 20)")
    p_exp.add_argument("--alpha", type=float, default=None)
    p_exp.add_argument("--beta", type=float, default=None)
    p_exp.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p_rer = sub.add_parser("rerun", help="replay a manifest into a fresh directory")
    p_rer.add_argument("manifest", help="path to a manifest.json")
    p_rer.add_argument("--out", required=True, help="output directory for the replayed run")

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "rerun":
        return run_from_manifest(args.manifest, Path(args.out))

    file_cfg = _load_config_file(getattr(args, "config", None))
    tol = _parse_tolerances(args.tolerance if hasattr(args, "tolerance") else None,
                            base=file_cfg.get("tolerances"))

    if args.command == "validate":
        economy = _pick(args.economy, file_cfg, "economy", None)
        if economy is None:
            raise SchemaError("validate needs --economy (or 'economy' in the config file)")
        config = {"economy": str(Path(economy).resolve()),
                  "tolerances": _tolerances_dict(tol)}
        out = Path(args.out) if args.out else None
        return run_validate(config, out)

    if args.command == "analyze":
        economy = _pick(args.economy, file_cfg, "economy", None)
        if economy is None:
            raise SchemaError("analyze needs --economy (or 'economy' in the config file)")
        tfp = _pick(args.tfp_config, file_cfg, "tfp_config", None)
        config = {
            "economy": str(Path(economy).resolve()),
            "tfp_config": str(Path(tfp).resolve()) if tfp else None,
            "beta": float(_pick(args.beta, file_cfg, "beta", 1.0)),
            "spectral_samples": int(_pick(args.spectral_samples, file_cfg, "spectral_samples", 100)),
            "spectral_seed": int(_pick(args.spectral_seed, file_cfg, "spectral_seed", 0)),
            "tolerances": _tolerances_dict(tol),
            "plot": False if args.no_plot else bool(file_cfg.get("plot", True)),
        }
        return run_analyze(config, _resolve_out(args.out, "analyze"))

    if args.command == "simulate":
        economy = _pick(args.economy, file_cfg, "economy", None)
        tfp = _pick(args.tfp_config, file_cfg, "tfp_config", None)
        if economy is None or tfp is None:
            raise SchemaError("simulate needs --economy and --tfp-config")
        gamma0 = args.gamma0
        if gamma0 is not None:
            gamma0 = [float(v) for v in gamma0.split(",") if v.strip()]
        else:
            gamma0 = file_cfg.get("gamma0")
        config = {
            "economy": str(Path(economy).resolve()),
            "tfp_config": str(Path(tfp).resolve()),
            "t_end": float(_pick(args.t_end, file_cfg, "t_end", 50.0)),
            "mode": _pick(args.mode, file_cfg, "mode", "rates"),
            "gamma0": gamma0,
            "rtol": float(_pick(args.rtol, file_cfg, "rtol", 1e-8)),
            "atol": float(_pick(args.atol, file_cfg, "atol", 1e-10)),
            "max_step": _pick(args.max_step, file_cfg, "max_step", None),
            "tolerances": _tolerances_dict(tol),
            "plot": False if args.no_plot else bool(file_cfg.get("plot", True)),
        }
        return run_simulate(config, _resolve_out(args.out, "simulate"))

    if args.command == "experiment":
        config = {
            "name": args.name,
            "seed": int(_pick(args.seed, file_cfg, "seed", 0)),
            "trials": int(_pick(args.trials, file_cfg, "trials", 1000)),
            "n": int(_pick(args.n, file_cfg, "n", 20)),
            "alpha": float(_pick(args.alpha, file_cfg, "alpha",
                                 1.0 if args.name in ("figure1", "hulten") else 0.5)),
            "beta": float(_pick(args.beta, file_cfg, "beta",
                                {"figure1": 1.0, "hulten": 0.0}.get(args.name, 0.9))),
            "share_range": list(file_cfg.get("share_range", [0.2, 0.8])),
            "lambda_center": float(file_cfg.get("lambda_center", 0.1)),
            "lambda_halfwidth": float(file_cfg.get("lambda_halfwidth", 1.0)),
            "sweep_centers": list(file_cfg.get("sweep_centers", [-0.4, -0.15, 0.15, 0.4])),
            "plot": False if args.no_plot else bool(file_cfg.get("plot", True)),
        }
        return run_experiment(config, _resolve_out(args.out, f"experiment-{args.name}"))

    raise SchemaError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (SchemaError, FileNotFoundError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, InternalConsistencyError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
