"""Command line interface: ``vascnet {steady,simulate,stability,sweep,verify}``.

Exit status is 0 on success, 1 for invalid input or infeasible data and 2
for numerical failures (vacuum, loss of hyperbolicity, solver breakdown).
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import itertools
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import CliConfig, load_config
from .diagnostics import hardy_check, hardy_constant, random_wall_functions
from .errors import NumericalError, ValidationError, VascnetError
from .experiments import Scenario, initial_state, run_stability_experiment
from .io import config_hash, header_lines, save_report, write_csv
from .model import ModelParams, validate_model
from .solver import Observer, Solver
from .steady import (
    StationaryFunctions,
    compute_steady_profile,
    residual_fields,
    steady_residual,
    solve_rho_minus,
)

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    # usage errors count as invalid input (exit 1); 2 is reserved for numerics
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="vascnet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"vascnet {__version__}")
    sub = ap.add_subparsers(dest="command")

    def common(p, out_help):
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--N", type=int, help="override [grid] N")
        p.add_argument("--L", type=float, help="override [grid] L")
        if out_help:
            p.add_argument("--out", required=True, help=out_help)

    p = sub.add_parser("steady", help="compute the steady profile and write it as CSV")
    common(p, "output CSV file")

    p = sub.add_parser("simulate", help="run the time-dependent solver")
    common(p, "output directory")
    p.add_argument("--T", type=float, help="final time (default [experiment] T_end)")

    p = sub.add_parser("stability", help="perturb the steady profile and measure the decay")
    common(p, "output directory")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--T", type=float)

    p = sub.add_parser("sweep", help="stability runs over amplitudes and one model parameter")
    common(p, "output directory")
    p.add_argument("--amplitudes", required=True,
                   help="comma-separated amplitudes, e.g. 1e-3,1e-2")
    p.add_argument("--param", help="model parameter values, e.g. alpha=0.5,1,2")
    p.add_argument("--T", type=float)

    p = sub.add_parser("verify", help="validation, Hardy and steady-residual checks")
    common(p, None)
    p.add_argument("--seed", type=int, default=0, help="seed for the random Hardy samples")
    return ap


def _config(args) -> CliConfig:
    cfg = load_config(args.config)
    if args.N is not None or args.L is not None:
        cfg = cfg.with_grid(L=args.L, N=args.N)
    return cfg


def _require_valid(cfg: CliConfig):
    rep = validate_model(cfg.params, cfg.law, cfg.bdry)
    if not rep.ok:
        bad = ", ".join(c.name for c in rep.checks if not c.passed)
        raise ValidationError(f"model validation failed ({bad})\n{rep.table()}")
    return rep


def _headers(cfg: CliConfig, *extra):
    return header_lines(config_hash(cfg.text), extra)


def _profile(cfg: CliConfig):
    fns = StationaryFunctions(cfg.law, cfg.params, cfg.bdry)
    return fns, compute_steady_profile(fns, cfg.grid)


def cmd_steady(args) -> int:
    cfg = _config(args)
    _require_valid(cfg)
    fns, prof = _profile(cfg)
    r1, r2 = residual_fields(prof, cfg.law, cfg.params)
    pad = np.array([math.nan])
    write_csv(args.out,
              {"x": prof.x, "rho_bar": prof.rho_bar, "phi_bar": prof.phi_bar,
               "residual1": np.concatenate((pad, r1, pad)),
               "residual2": np.concatenate((pad, r2, pad))},
              _headers(cfg, f"lambda_fit: {prof.lambda_fit!r}", f"rho_minus: {prof.rho_minus!r}",
                       f"lambda_limit: {prof.lambda_limit!r}",
                       "residuals are undefined (nan) at the two end nodes"))
    print(f"rho_minus = {prof.rho_minus:.12g}  lambda_fit = {prof.lambda_fit:.8g}  "
          f"lambda_limit = {prof.lambda_limit:.8g}")
    return 0


def _scenario(cfg: CliConfig, **over) -> Scenario:
    e = dict(cfg.experiment)
    e.update({k: v for k, v in over.items() if v is not None})
    return Scenario(cfg.params, cfg.law, cfg.bdry, cfg.grid, cfg.scheme,
                    amplitude=e["amplitude"], sigma=e["sigma"], seed=e["seed"],
                    T_end=e["T_end"], sample_every=e["sample_every"],
                    perturb_phi=e["perturb_phi"])


def cmd_simulate(args) -> int:
    cfg = _config(args)
    _require_valid(cfg)
    scn = _scenario(cfg, T_end=args.T)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, prof = _profile(cfg)
    s0 = initial_state(scn, prof)
    x = cfg.grid.centers
    taken = []

    def snapshot(s):
        k = len(taken)
        taken.append(s.t)
        write_csv(out / f"snapshot_{k:04d}.csv", {"x": x, "rho": s.rho, "m": s.m, "phi": s.phi},
                  _headers(cfg, f"t: {s.t!r}"))

    solver = Solver(cfg.grid, cfg.scheme, cfg.law, cfg.params, prof)
    obs = [Observer(cfg.experiment["snapshot_every"], snapshot)]
    try:
        final, rep = solver.simulate(s0, scn.T_end, sample_every=scn.sample_every, observers=obs)
    except NumericalError as exc:
        if getattr(exc, "report", None) is not None:
            save_report(exc.report, out / "report.json", config_hash(cfg.text))
        raise
    if taken[-1] != final.t:
        snapshot(final)
    save_report(rep, out / "report.json", config_hash(cfg.text))
    print(f"t = {final.t:g}  steps = {rep.metadata['steps']}  gap = {rep.gap_total[-1]:.6e}")
    return 0


def _stability_summary(rep) -> str:
    rate = "n/a" if rep.fitted_decay_rate is None else f"{rep.fitted_decay_rate:.6g}"
    return (f"initial_gap = {rep.initial_gap:.6e}  final_gap = {rep.final_gap:.6e}  "
            f"ratio = {rep.gap_ratio:.4e}  fitted_rate = {rate}  mass_drift = {rep.mass_drift:.3e}")


def cmd_stability(args) -> int:
    cfg = _config(args)
    _require_valid(cfg)
    scn = _scenario(cfg, amplitude=args.amplitude, sigma=args.sigma, T_end=args.T)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep = run_stability_experiment(scn)
    save_report(rep, out / "stability.json", config_hash(cfg.text))
    write_csv(out / "gap.csv", {"t": rep.gap_times, "gap_total": rep.gap_series,
                                "F_value": rep.energy.F_value or [math.nan] * len(rep.gap_times)},
              _headers(cfg))
    print(_stability_summary(rep))
    return 0


def _threads() -> int:
    env = os.environ.get("VASCNET_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"VASCNET_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("VASCNET_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _parse_list(text, what):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse {what} list {text!r}") from None
    if not vals:
        raise ValidationError(f"empty {what} list")
    return vals


def cmd_sweep(args) -> int:
    cfg = _config(args)
    amps = _parse_list(args.amplitudes, "amplitude")
    pname, pvals = None, [None]
    if args.param:
        pname, _, rest = args.param.partition("=")
        pname = pname.strip()
        if pname not in ("mu", "alpha", "a", "b"):
            raise ValidationError(f"--param must name mu, alpha, a or b, got {pname!r}")
        pvals = _parse_list(rest, pname)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = list(itertools.product(pvals, amps))

    def run(i, pv, amp):
        c = cfg
        if pname is not None:
            params = ModelParams(**{**c.params.__dict__, pname: pv})
            bdry = type(c.bdry).from_params(params, c.bdry.rho_plus, c.bdry.phi_minus)
            c = replace(c, params=params, bdry=bdry)
        try:
            _require_valid(c)
            rep = run_stability_experiment(_scenario(c, amplitude=amp, T_end=args.T, seed=i))
        except ValidationError as exc:
            return 1, str(exc).splitlines()[0], None
        except NumericalError as exc:
            return 2, str(exc).splitlines()[0], None
        save_report(rep, out / f"cell_{i:03d}.json", config_hash(cfg.text))
        return 0, "ok", rep

    with ThreadPoolExecutor(max_workers=min(_threads(), len(cells))) as pool:
        results = list(pool.map(lambda a: run(*a), [(i, pv, amp) for i, (pv, amp) in enumerate(cells)]))

    buf = _stdio.StringIO()
    buf.write("\n".join(_headers(cfg)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell", "param", "value", "amplitude", "status", "initial_gap", "final_gap",
                "ratio", "fitted_rate", "file"])
    for i, ((pv, amp), (code, msg, rep)) in enumerate(zip(cells, results)):
        if rep is None:
            w.writerow([i, pname or "", "" if pv is None else repr(pv), repr(amp), msg,
                        "", "", "", "", ""])
        else:
            rate = "" if rep.fitted_decay_rate is None else repr(rep.fitted_decay_rate)
            w.writerow([i, pname or "", "" if pv is None else repr(pv), repr(amp), "ok",
                        repr(rep.initial_gap), repr(rep.final_gap), repr(rep.gap_ratio), rate,
                        f"cell_{i:03d}.json"])
    (out / "index.csv").write_text(buf.getvalue(), encoding="utf-8")
    worst = max(code for code, _, _ in results)
    print(f"{len(cells)} cells, {sum(code == 0 for code, _, _ in results)} ok; index at {out / 'index.csv'}")
    return worst


def cmd_verify(args) -> int:
    cfg = _config(args)
    rows = []
    vrep = validate_model(cfg.params, cfg.law, cfg.bdry)
    for c in vrep.checks:
        rows.append((f"model:{c.name}", c.passed, f"margin {c.margin:.6g}"))

    x = np.linspace(0.0, 40.0, 8001)
    ck = hardy_constant(1.0)
    h = hardy_check(x * np.exp(-x), 1.0, x)
    # sampled at dx = 0.005; quadrature and differencing errors sit near 1e-5
    ok = abs(h.lhs / (2 / 27) - 1) < 1e-4 and abs(h.rhs / 0.25 - 1) < 1e-4 and h.holds
    rows.append(("hardy:closed-form", ok, f"lhs {h.lhs:.8f} rhs {h.rhs:.8f} C_1 {ck:.6f}"))
    worst = 0.0
    all_hold = True
    for f in random_wall_functions(20, x, seed=args.seed):
        r = hardy_check(f, 1.0, x)
        all_hold &= r.holds
        worst = max(worst, r.ratio)
    rows.append(("hardy:random-20", all_hold, f"max lhs/rhs {worst:.4f} <= {ck:.4f}"))

    if vrep.ok:
        fns, prof = _profile(cfg)
        r1, r2 = steady_residual(prof, cfg.law, cfg.params)
        rows.append(("steady:residual", max(r1, r2) <= 1e-3, f"r1 {r1:.3e} r2 {r2:.3e}"))
        resid = abs(fns.F(solve_rho_minus(fns)) - (cfg.bdry.phi_minus - cfg.bdry.phi_plus))
        rows.append(("steady:rho_minus", resid <= 1e-12, f"|F(rho_-) - (phi_- - phi_+)| {resid:.2e}"))
        d = np.diff(prof.rho_bar)
        mono = bool(np.all(d < 0) if prof.rho_minus > prof.rho_plus else np.all(d > 0))
        rows.append(("steady:monotone", mono, prof.direction.value))
        wall = abs(prof.phi_bar[0] - cfg.bdry.phi_minus)
        rows.append(("steady:wall-value", wall <= 1e-9, f"|phi_bar(0) - phi_-| {wall:.2e}"))
    else:
        rows.append(("steady:skipped", False, "model validation failed"))

    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all(ok for _, ok, _ in rows) else 1


_COMMANDS = {"steady": cmd_steady, "simulate": cmd_simulate, "stability": cmd_stability,
             "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except VascnetError as exc:  # pragma: no cover - every error has a family
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
