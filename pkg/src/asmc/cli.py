"""Command-line entry point: ``asmc {plan,sample,oracle,verify,bench,calibrate}``.

Exit status is 0 on success, 1 when a check fails or a computation
errors, and 2 for usage or configuration errors.  Errors are also written
to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .diagnostics import (
    baseline_chains,
    basin_indicator,
    complexity_sweep,
    coverage_trial,
    mc_error,
    separation_benchmark,
)
from .oracle.fixtures import load_fixture, write_fixtures
from .oracle.grid import well_masses
from .potential import landscape_summary
from .records import StaleArtifactError, to_jsonable, write_artifact
from .schedule import PlanConstants, apply_overrides as override_plan, calibrate_constants, plan_parameters
from .smc import SamplerOptions, TraceWriter, run_asmc, write_samples_csv

OUTPUT_ENV = "ASMC_OUTPUT_DIR"
SUBCOMMANDS = ("plan", "sample", "oracle", "verify", "bench", "calibrate")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared helpers


def output_dir(cfg):
    return Path(cfg.output_dir or os.environ.get(OUTPUT_ENV) or "asmc-output")


def _landscape(cfg, potential):
    return landscape_summary(potential, cfg.alpha) if potential.n_minima > 1 else None


def build_plan(cfg, potential=None, landscape=None):
    potential = potential or cfg.make_potential()
    if landscape is None:
        landscape = _landscape(cfg, potential)
    ratio = landscape.barrier_ratio if landscape else 1.0
    C_K = landscape.C_K if landscape else None
    constants = PlanConstants(cfg.c_n, cfg.c_t, cfg.c_tem)
    overridden = any(v is not None for v in (cfg.m, cfg.n, cfg.t))
    # overrides replace the planned values, so the cap is applied afterwards
    plan = plan_parameters(
        cfg.eta, cfg.delta, cfg.theta, cfg.alpha, cfg.nu, ratio, constants,
        C_K=C_K, eta1=cfg.eta1, dt=cfg.dt, budget_cap=None if overridden else cfg.budget_cap,
    )
    return override_plan(plan, cfg.m, cfg.n, cfg.t, cfg.unsafe, C_K)


def sampler_options(cfg):
    return SamplerOptions(
        dt=cfg.dt, integrator=cfg.integrator, guard_radius=cfg.guard_radius, resampler=cfg.resampler,
        workers=cfg.threads, budget_cap=cfg.budget_cap, c_ini=cfg.c_ini,
    )


def _emit(args, payload, text=None):
    if args.json:
        print(json.dumps(to_jsonable(payload), sort_keys=True))
    else:
        print(text if text is not None else json.dumps(to_jsonable(payload), indent=2, sort_keys=True))


def _reference_basin_mass(cfg, potential, eps):
    masses, _ = well_masses(potential, eps)
    return float(masses[0])


# ---------------------------------------------------------------------------
# subcommands


def cmd_plan(cfg, args):
    potential = cfg.make_potential()
    landscape = _landscape(cfg, potential)
    plan = build_plan(cfg, potential, landscape)
    payload = {"config_hash": cfg.hash, "plan": plan.to_dict()}
    if landscape is not None:
        payload["landscape"] = landscape.to_dict()
    lines = [
        f"M = {plan.M}   N = {plan.N}   T = {plan.T:.6g}   (M N T = {plan.budget:.4g})",
        f"eta_cr = {plan.eta_cr:.6g}   k_cr = {plan.k_cr}",
        "levels: " + ", ".join(f"{v:.6g}" for v in plan.schedule().levels),
    ]
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_sample(cfg, args):
    potential = cfg.make_potential()
    landscape = _landscape(cfg, potential)
    plan = build_plan(cfg, potential, landscape)
    run_dir = output_dir(cfg) / f"run-{cfg.hash}"
    run_dir.mkdir(parents=True, exist_ok=True)
    h = cfg.hash
    write_artifact(
        run_dir / "header.json",
        cfg.result_dict(),
        {"plan": plan.to_dict(), "seed": cfg.seed, "landscape": landscape.to_dict() if landscape else None},
    )
    writer = TraceWriter(run_dir / "trace.csv", potential.n_minima, h)
    X, trace = run_asmc(
        potential, plan.schedule(), plan, cfg.init, cfg.seed, sampler_options(cfg), landscape, on_level=writer
    )
    write_samples_csv(run_dir / "samples.csv", X, h)
    labels = potential.basin_index(X)
    fracs = [float(np.mean(labels == j)) for j in range(1, potential.n_minima + 1)]
    payload = {
        "config_hash": h,
        "run_dir": str(run_dir),
        "N": plan.N,
        "M": plan.M,
        "T": plan.T,
        "basin_fractions": fracs,
        "min_ess": min(r.ess for r in trace),
    }
    _emit(args, payload, f"wrote {run_dir}\nbasin fractions: " + ", ".join(f"{f:.4f}" for f in fracs))
    return 0


def _eps_list(cfg, section):
    eps = cfg.section(section).get("eps", [cfg.eta])
    return [float(e) for e in (eps if isinstance(eps, list) else [eps])]


def _fixtures_dir(cfg, section):
    d = cfg.section(section).get("fixtures_dir")
    return Path(d) if d else output_dir(cfg) / "fixtures"


def cmd_oracle(cfg, args):
    root = _fixtures_dir(cfg, "oracle")
    paths = write_fixtures(
        root, cfg.potential, _eps_list(cfg, "oracle"), cfg.params, cfg.alpha, cfg.section("oracle")["n_modes"]
    )
    _emit(args, {"fixtures": [str(p) for p in paths]}, "\n".join(f"wrote {p}" for p in paths))
    return 0


def _check_fixture_invariants(gibbs, spectral):
    problems = []
    m = np.asarray(gibbs["well_masses"])
    if np.any(m < 0) or m.sum() > 1 + 1e-9:
        problems.append("well masses out of range")
    lam = np.asarray(spectral["eigenvalues"])
    if abs(lam[0]) > 1e-8:
        problems.append("lambda_1 is not zero")
    if np.any(np.diff(lam) < 0):
        problems.append("eigenvalues not ascending")
    return problems


def cmd_verify(cfg, args):
    sec = cfg.section("verify")
    root = _fixtures_dir(cfg, "verify")
    n_modes = cfg.section("oracle")["n_modes"]
    eps_values = _eps_list(cfg, "verify")
    fixtures = {}
    for eps in eps_values:
        gibbs = load_fixture(root, "gibbs", cfg.potential, eps, cfg.params, cfg.alpha)
        spectral = load_fixture(root, "spectral", cfg.potential, eps, cfg.params, cfg.alpha, n_modes)
        fixtures[eps] = (gibbs, spectral)
    checks = {}
    for eps, (g, s) in fixtures.items():
        problems = _check_fixture_invariants(g, s)
        checks[f"fixtures@{eps:g}"] = {"passed": not problems, "problems": problems}
    if cfg.eta not in fixtures:
        raise UsageError(f"no fixture for the sampling temperature eta={cfg.eta:g}; add it to [verify] eps")
    potential = cfg.make_potential()
    plan = build_plan(cfg, potential)
    h = basin_indicator(potential, 1).with_reference(fixtures[cfg.eta][0]["well_masses"][0])
    seeds = range(sec["first_seed"], sec["first_seed"] + sec["runs"])
    report = coverage_trial(
        potential, plan.schedule(), plan, h, cfg.delta, cfg.theta, seeds, sampler_options(cfg), cfg.init,
        min_runs=1,
    )
    checks["coverage"] = report.to_dict()
    passed = all(c["passed"] for c in checks.values())
    payload = {"config_hash": cfg.hash, "passed": passed, "checks": checks}
    lines = [f"{name}: {'PASS' if c['passed'] else 'FAIL'}" for name, c in checks.items()]
    _emit(args, payload, "\n".join(lines))
    return 0 if passed else 1


def cmd_bench(cfg, args):
    sec = cfg.section("bench")
    potential = cfg.make_potential()
    if potential.n_minima < 2:
        raise UsageError("bench needs a potential with at least two minima")
    sweep_alpha = float(sec.get("sweep_alpha", cfg.alpha))
    sweep = complexity_sweep(
        landscape_summary(potential, sweep_alpha), sorted(sec["etas"], reverse=True), cfg.delta, cfg.theta,
        PlanConstants(cfg.c_n, cfg.c_t, cfg.c_tem), alpha=sweep_alpha, nu=cfg.nu, budget_cap=None,
    )
    payload = {"config_hash": cfg.hash, "sweep": sweep}
    if sec["baseline"]:
        plan = build_plan(cfg, potential)
        ref = _reference_basin_mass(cfg, potential, cfg.eta)
        h = basin_indicator(potential, 1)
        seeds = list(range(sec["first_seed"], sec["first_seed"] + sec["seeds"]))
        asmc_err = []
        for s in seeds:
            X, _ = run_asmc(potential, plan.schedule(), plan, cfg.init, s, sampler_options(cfg))
            asmc_err.append(mc_error(X, h, ref))
        base_err = baseline_chains(potential, cfg.eta, plan.total_steps, seeds, h, ref, dt=cfg.dt)
        payload["baseline"] = {
            "budget_steps": plan.total_steps,
            "asmc_errors": asmc_err,
            "baseline_errors": base_err,
            **separation_benchmark(asmc_err, base_err),
        }
    text = f"budget slope {sweep.get('budget_slope', float('nan')):.3f}, mixing slope {sweep.get('mixing_slope', float('nan')):.3f}"
    if "baseline" in payload:
        b = payload["baseline"]
        text += f"\nmedian error: asmc {b['asmc_median']:.4f}, direct Langevin {b['baseline_median']:.4f}"
    _emit(args, payload, text)
    return 0


def cmd_calibrate(cfg, args):
    sec = cfg.section("calibrate")
    potential = cfg.make_potential()
    landscape = _landscape(cfg, potential)
    ref = _reference_basin_mass(cfg, potential, cfg.eta)
    h = basin_indicator(potential, 1).with_reference(ref)
    seeds = range(sec["first_seed"], sec["first_seed"] + sec["runs"])

    def passes(constants):
        run_cfg = replace(cfg, c_n=constants.c_n, c_t=constants.c_t)
        plan = build_plan(run_cfg, potential, landscape)
        report = coverage_trial(
            potential, plan.schedule(), plan, h, cfg.delta, cfg.theta, seeds, sampler_options(cfg), cfg.init,
            min_runs=1,
        )
        return report.success_fraction >= report.target

    constants, history = calibrate_constants(
        passes, PlanConstants(cfg.c_n, cfg.c_t, cfg.c_tem), factor=sec["factor"], max_iter=sec["max_iter"]
    )
    payload = {
        "config_hash": cfg.hash,
        "constants": {"c_n": constants.c_n, "c_t": constants.c_t, "c_tem": constants.c_tem},
        "history": [{"c_n": c.c_n, "c_t": c.c_t, "passed": ok} for c, ok in history],
    }
    path = write_artifact(output_dir(cfg) / f"calibration-{cfg.hash}.json", cfg.result_dict(), payload)
    payload["path"] = str(path)
    _emit(args, payload, f"c_n = {constants.c_n:.6g}, c_t = {constants.c_t:.6g}\nwrote {path}")
    return 0


COMMANDS = {
    "plan": cmd_plan,
    "sample": cmd_sample,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "calibrate": cmd_calibrate,
}


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", "-c", help="TOML config file")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print JSON to stdout")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads for particle moves")
    common.add_argument("--output-dir", default=argparse.SUPPRESS, help=f"artifact directory (default ${OUTPUT_ENV})")
    common.add_argument("--unsafe", action="store_true", default=argparse.SUPPRESS, help="accept overrides that violate the planner")
    parser = _Parser(prog="asmc", description="Annealed sequential Monte Carlo for low-temperature Gibbs measures.")
    parser.add_argument("--version", action="version", version=f"asmc {__version__}")
    parser.add_argument("--json", action="store_true", default=False, help="print JSON to stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "plan": "print the planned (M, N, T) and schedule",
        "sample": "run the sampler and write samples and trace",
        "oracle": "compute quadrature and spectral fixtures",
        "verify": "check fixtures and sampler coverage",
        "bench": "cost scaling and direct-Langevin comparison",
        "calibrate": "tune c_n and c_t by coverage bisection",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        p.add_argument("overrides", nargs="*", metavar="key=value", help="config overrides")
    return parser


def _config_from_args(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    items = list(args.overrides)
    if getattr(args, "threads", None) is not None:
        items.append(f"threads={args.threads}")
    if getattr(args, "output_dir", None):
        items.append(f"output_dir={json.dumps(args.output_dir)}")
    if getattr(args, "unsafe", False):
        items.append("unsafe=true")
    return apply_overrides(cfg, items) if items else cfg


def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        args.json = as_json
        cfg = _config_from_args(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ConfigError, OSError) as exc:
        return _fail(2, exc)
    try:
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError) as exc:
        return _fail(2, exc)
    except StaleArtifactError as exc:
        return _fail(1, exc)
    except Exception as exc:  # inner-module failures map to exit 1
        return _fail(1, exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
