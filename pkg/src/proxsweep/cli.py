"""Command line entry point: ``proxsweep <verb> --config FILE --out DIR``.

Exit codes: 0 success / Solution, 1 NotSolution, 2 step out of prox reach,
3 invalid config or input, 4 a study invariant (or refinement budget) failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import lab
from .config import ConfigError, ScenarioConfig, load_config
from .measure import MeasureError, default_reference_measure, read_trajectory_csv, write_trajectory_csv
from .residual import CrossCheckMismatch, InfeasibleTrajectory, certify, integral_residual
from .solver import BudgetExhausted, InfeasibleStart, RefinementLog, SolverError, StepOutOfReach, catching_up, evaluate, refine_until

EXIT_OK, EXIT_NOT_SOLUTION, EXIT_REACH, EXIT_INPUT, EXIT_STUDY = 0, 1, 2, 3, 4


def _err(msg: str) -> None:
    print(f"proxsweep: {msg}", file=sys.stderr)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args.out)
    s = cfg.scenario
    target = args.tol if args.tol is not None else cfg.get("target_residual")
    try:
        if target is None:
            x = catching_up(s.C, s.x0, cfg.solve)
            history = RefinementLog([evaluate(s.C, x, 0, s.reference)])
        else:
            x, history = refine_until(s.C, s.x0, cfg.solve, target, s.reference)
    except StepOutOfReach as exc:
        _err(str(exc))
        return EXIT_REACH
    except BudgetExhausted as exc:
        write_trajectory_csv(exc.trajectory, out / "trajectory.csv")
        exc.log.write(out / "refinement_log.csv")
        _err(str(exc))
        return EXIT_STUDY
    except InfeasibleStart as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    write_trajectory_csv(x, out / "trajectory.csv")
    history.write(out / "refinement_log.csv")
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args.out)
    s = cfg.scenario
    try:
        x = read_trajectory_csv(args.trajectory)
    except (OSError, ValueError) as exc:
        _err(f"invalid trajectory: {exc}")
        return EXIT_INPUT
    if abs(x.horizon - s.horizon) > 1e-12 or x.dim != s.C.dim:
        _err("trajectory grid or dimension does not match the config")
        return EXIT_INPUT
    tol = args.tol if args.tol is not None else cfg.get("certificate_tol", 1e-7)
    feas = cfg.get("feasibility_tol", 1e-9)
    try:
        nu = default_reference_measure(x)
        cert = certify(x, nu, s.C, tol, gamma=cfg.solve.gamma, feasibility_tol=feas)
        report = integral_residual(x, nu, s.C, certificate_tol=tol, feasibility_tol=feas)
    except InfeasibleTrajectory as exc:
        _err(f"InfeasibleTrajectory: {exc}")
        return EXIT_INPUT
    except MeasureError as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT
    except CrossCheckMismatch as exc:
        _err(f"CrossCheckMismatch: {exc}")
        return EXIT_STUDY
    (out / "certificate.json").write_text(cert.to_json(), encoding="utf-8")
    (out / "residual.csv").write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK if cert.is_solution else EXIT_NOT_SOLUTION


def _family(cfg: ScenarioConfig) -> lab.Scenario:
    if cfg.family is None:
        raise ConfigError("converge/stability need 'family' to name a built-in scenario")
    return cfg.scenario


def _write_study(study: lab.Study, out: Path, stem: str) -> None:
    (out / f"{stem}.csv").write_text(study.to_csv(), encoding="utf-8")
    (out / f"{stem}.json").write_text(study.summary_json(), encoding="utf-8")


def cmd_converge(args) -> int:
    cfg = load_config(args.config)
    s = _family(cfg)
    out = _out_dir(args.out)
    levels = args.levels if args.levels is not None else cfg.get("levels", 5)
    try:
        study = lab.convergence_study(
            s, levels, s.h0, refine=cfg.get("refine", True), factor=cfg.get("factor", 1.5), gamma=cfg.solve.gamma
        )
    except StepOutOfReach as exc:
        _err(str(exc))
        return EXIT_REACH
    _write_study(study, out, f"converge_{s.name}")
    if not study.ok:
        _err(f"convergence invariants failed: {[k for k, v in study.checks.items() if not v]}")
        return EXIT_STUDY
    return EXIT_OK


def cmd_stability(args) -> int:
    cfg = load_config(args.config)
    s = _family(cfg)
    out = _out_dir(args.out)
    nmax = args.nmax if args.nmax is not None else cfg.get("nmax", 256)
    try:
        study = lab.stability_study(
            s,
            nmax,
            n_min=cfg.get("n_min", 4),
            gamma=cfg.solve.gamma,
            residual_tol=cfg.get("residual_tol"),
            cauchy_tol=cfg.get("cauchy_tol"),
            variation_bound=cfg.get("variation_bound"),
        )
    except StepOutOfReach as exc:
        _err(str(exc))
        return EXIT_REACH
    _write_study(study, out, f"stability_{s.name}")
    if not study.ok:
        _err(f"stability invariants failed: {[k for k, v in study.checks.items() if not v]}")
        return EXIT_STUDY
    return EXIT_OK


def cmd_verify(args) -> int:
    """Seeded residual checks on random admissible trajectories of the configured scenario."""
    cfg = load_config(args.config)
    out = _out_dir(args.out)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    samples = cfg.get("samples", 50)
    rng = np.random.default_rng(seed)
    s = cfg.scenario
    lines = ["sample,R,lower_bound,verdict,bounds_ok"]
    all_ok = True
    for i in range(samples):
        x = lab.random_admissible_trajectory(s, cfg.solve.grid, rng)
        nu = default_reference_measure(x)
        try:
            cert = certify(x, nu, s.C, cfg.get("certificate_tol", 1e-7), gamma=cfg.solve.gamma)
        except CrossCheckMismatch as exc:
            _err(f"CrossCheckMismatch on sample {i}: {exc}")
            return EXIT_STUDY
        lb = cert.lower_bound
        ok = (lb - 1e-9 <= cert.R) and cert.R <= 1e-12
        all_ok &= ok
        lines.append(f"{i},{cert.R!r},{lb!r},{cert.verdict},{ok}")
    (out / "verify.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = {"scenario": s.name, "seed": seed, "samples": samples, "ok": all_ok}
    (out / "verify.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK if all_ok else EXIT_STUDY


def cmd_list(args) -> int:
    for s in lab.builtin_scenarios():
        ref = "yes" if s.reference is not None else "no"
        rho = "inf" if math.isinf(s.C.rho) else f"{s.C.rho:g}"
        print(f"{s.name:<12} d={s.C.dim} T={s.horizon:.6g} rho={rho} reference={ref}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxsweep", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def add(name, func, help_, *extra):
        sp = sub.add_parser(name, help=help_)
        if name != "list-scenarios":
            sp.add_argument("--config", required=True)
            sp.add_argument("--out", required=True)
            sp.add_argument("--seed", type=int)
            sp.add_argument("--tol", type=float)
        for flag in extra:
            sp.add_argument(flag[0], **flag[1])
        sp.set_defaults(func=func)
        return sp

    add("solve", cmd_solve, "run catching-up (with refinement when a target residual is set)")
    add("certify", cmd_certify, "certify a trajectory CSV", ("--trajectory", {"required": True}))
    add("converge", cmd_converge, "grid convergence study", ("--levels", {"type": int}))
    add("stability", cmd_stability, "stability study with frozen moving sets", ("--nmax", {"type": int}))
    add("verify", cmd_verify, "seeded residual checks on random admissible trajectories")
    add("list-scenarios", cmd_list, "list built-in scenarios")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_INPUT
    except SolverError as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
