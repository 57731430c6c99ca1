"""``kemeny`` command line.

::

    kemeny dtmc      --input FILE [--mc N --seed S --streams J]
    kemeny ctmc      --input FILE [--mc N --seed S --streams J]
    kemeny diffusion --input FILE [--grid N --truncate R --mc N --step h --band eps]
    kemeny verify    --input FILE [any of the above]

Every command prints a JSON run report (``--compact`` for one line,
``--output`` to write it to a file, ``--csv`` to also export the K profile).
Exit status: 0 when every verdict passes, 2 when one fails, 1 for usage or
input errors.  ``KEMENY_SEED`` supplies the seed when ``--seed`` is absent.
"""
import argparse
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import chain, ctmc, diffusion, sim
from .errors import KemenyError
from .report import RunReport, verdict, write_profile_csv
from .specio import load_model

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

DEFAULT_SEED = 0
MC_MAX_STARTS = 10
# stream ids for different Monte Carlo runs in one command never overlap
STREAM_SPACING = 2**32

CHAIN_TOL = 1e-9
UNIFORMIZATION_TOL = 1e-10
DIFFUSION_TOL = 1e-6
CONSISTENCY_TOL = 1e-8
MC_REL_TOL = 0.05


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser():
    parser = _Parser(prog="kemeny", description="Kemeny functions of Markov models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in [
        ("dtmc", "discrete-time chain"),
        ("ctmc", "continuous-time chain"),
        ("diffusion", "one-dimensional diffusion"),
        ("verify", "full identity suite for the input's kind"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, help="model file (JSON)")
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--csv", help="also write the K profile as CSV")
        p.add_argument("--compact", action="store_true", help="single-line JSON")
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp")
        p.add_argument("--mc", type=_positive_int, metavar="N", help="Monte Carlo samples")
        p.add_argument("--seed", type=_seed, metavar="S")
        p.add_argument("--streams", type=_positive_int, default=1, metavar="J")
        if name in ("diffusion", "verify"):
            p.add_argument("--grid", type=_positive_int, default=21, metavar="N")
            p.add_argument("--truncate", type=_positive_float, metavar="R")
            p.add_argument("--step", type=_positive_float, metavar="h")
            p.add_argument("--band", type=_positive_float, metavar="eps")
            p.add_argument("--mc-start", type=float, metavar="X")
            p.add_argument("--mc-target", type=float, metavar="Z")
    return parser


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("KEMENY_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return _seed(env)
    except (ValueError, argparse.ArgumentTypeError):
        raise UsageError(f"KEMENY_SEED must be an unsigned 64-bit integer, got {env!r}") from None


def _mc_entry(label, est, **extra):
    return {"label": label, **extra, **est.as_dict()}


# chains -----------------------------------------------------------------


def _chain_mc(kind, model, args, seed):
    n = model.n
    starts = range(min(n, MC_MAX_STARTS))
    estimate = sim.estimate_kemeny_dtmc if kind == "dtmc" else sim.estimate_kemeny_ctmc
    entries, zs = [], []
    for x in starts:
        est = estimate(model, x, args.mc, sim.RngStream(seed, x * STREAM_SPACING), args.streams)
        entries.append(_mc_entry("kemeny", est, start=x))
        zs.append(abs(est.z_score))
    return entries, verdict(max(zs), sim.FLAKE_Z)


def _occupation_mc(model, args, seed):
    base = MC_MAX_STARTS * STREAM_SPACING
    check = sim.verify_occupation_lemma_dtmc(
        model, args.mc, sim.RngStream(seed, base), streams=args.streams
    )
    entries = [
        {"label": "occupation", "state": y, "mean": m, "std_error": s,
         "n_samples": args.mc, "target_exact": e, "z_score": z}
        for y, (m, s, e, z) in enumerate(zip(check.means, check.std_errors,
                                             check.exact, check.z_scores))
    ]
    return entries, verdict(check.max_abs_z, sim.FLAKE_Z)


def _dtmc(model, args, seed, full):
    rep = chain.kemeny_function(model)
    scale = max(1.0, rep.kappa)
    res = rep.residuals
    results = {
        "n_states": model.n,
        "pi": chain.stationary_distribution(model).pi,
        "k_values": rep.k_values,
        "kappa": rep.kappa,
        "spread": rep.spread,
        "hunter_bound": (model.n - 1) / 2,
        "residuals": res,
    }
    verdicts = {
        "constancy": verdict(rep.spread, CHAIN_TOL * scale),
        "dual_identity": verdict(res["dual_identity"], CHAIN_TOL * scale),
        "trace_identity": verdict(res["trace_identity"], 10 * CHAIN_TOL * scale),
        "occupation_duality": verdict(res["occupation_duality"], CHAIN_TOL * scale),
        "return_time_identity": verdict(res["return_time_identity"], CHAIN_TOL * scale),
        "hunter_margin": verdict(res["hunter_margin"], 0.0, ">="),
        "khasminskii_margin": verdict(res["khasminskii_margin"], 0.0, ">="),
    }
    mc = []
    if args.mc:
        mc, verdicts["mc_kemeny"] = _chain_mc("dtmc", model, args, seed)
        if full:
            occ, verdicts["mc_occupation"] = _occupation_mc(model, args, seed)
            mc += occ
    return results, mc, verdicts, ("state", np.arange(model.n), rep.k_values)


def _ctmc(model, args, seed, full):
    rep = ctmc.kemeny_function_ct(model)
    scale = max(1.0, rep.kappa)
    res = dict(rep.residuals)
    verdicts = {
        "constancy": verdict(rep.spread, CHAIN_TOL * scale),
        "dual_identity": verdict(res["dual_identity"], CHAIN_TOL * scale),
        "dual_kappa": verdict(res["dual_kappa"], CHAIN_TOL * scale),
        "uniformization": verdict(res["uniformization"], UNIFORMIZATION_TOL * scale),
    }
    if full:
        rate = 2 * ctmc.DEFAULT_RATE_MARGIN * model.max_exit_rate
        res["uniformization_double_rate"] = ctmc.uniformization_crosscheck(model, rate)
        doubled = ctmc.kemeny_function_ct(2 * model.q, with_checks=False)
        res["time_scaling"] = float(np.abs(doubled.k_values - rep.k_values / 2).max())
        verdicts["uniformization_double_rate"] = verdict(
            res["uniformization_double_rate"], UNIFORMIZATION_TOL * scale)
        verdicts["time_scaling"] = verdict(res["time_scaling"], 0.0)
    results = {
        "n_states": model.n,
        "pi": ctmc.stationary_ct(model).pi,
        "k_values": rep.k_values,
        "kappa": rep.kappa,
        "spread": rep.spread,
        "residuals": res,
    }
    mc = []
    if args.mc:
        mc, verdicts["mc_kemeny"] = _chain_mc("ctmc", model, args, seed)
    return results, mc, verdicts, ("state", np.arange(model.n), rep.k_values)


# diffusions -------------------------------------------------------------


def _profile_results(a, prof):
    return {
        "window": [a.lower, a.upper],
        "speed_mass": a.mass,
        "grid": prof.grid,
        "k_values": prof.k_values,
        "kappa": prof.kappa,
        "gamma": prof.gamma,
        "spread": prof.spread,
        "kappa_gamma_residual": prof.residual_gamma,
    }


def _diffusion(spec, args, seed, full):
    results, verdicts, flags = {}, {}, []
    if args.truncate is not None and not spec.bounded:
        radii = [args.truncate * k / 4 for k in range(1, 5)]
        values, increasing = diffusion.gamma_truncation_study(spec, radii)
        steps = [b - a for a, b in zip(values, values[1:])]
        ratio = values[-1] / values[1]
        status = "divergent" if increasing else "bounded"
        flags.append(f"gamma: {status} (truncation study)")
        results["gamma_truncation_study"] = {
            "radii": radii, "values": values, "increasing": increasing, "growth_ratio": ratio,
        }
        verdicts["gamma_increasing"] = verdict(min(steps), 0.0, ">")
        verdicts["gamma_growth_ratio"] = verdict(ratio, 10.0, ">")
        spec = diffusion.truncate(spec, args.truncate)
        flags.append(f"profile: process reflected at +-{args.truncate!r}")
    elif args.truncate is not None:
        flags.append("truncate ignored: interval is bounded")
    a = diffusion.build_analysis(spec)
    prof = diffusion.kemeny_profile(a, diffusion.default_grid(a, args.grid))
    results.update(_profile_results(a, prof))
    if prof.divergent:
        flags.append("gamma: divergent (expansion)")
    else:
        scale = max(1.0, prof.kappa)
        verdicts["constancy"] = verdict(prof.spread, DIFFUSION_TOL * scale)
        verdicts["kappa_gamma"] = verdict(prof.residual_gamma, DIFFUSION_TOL * scale)
    if full and not prof.divergent:
        _diffusion_consistency(spec, a, prof, results, verdicts)
    mc = []
    if args.mc and not prof.divergent:
        mc = _diffusion_mc(a, args, seed, verdicts)
    results["flags"] = flags
    return results, mc, verdicts, ("x", prof.grid, prof.k_values)


def _diffusion_consistency(spec, a, prof, results, verdicts):
    # closed-form hitting times against the literal Green-function integral
    grid = prof.grid
    pairs = [(grid[-1], grid[len(grid) // 2]), (grid[0], grid[-1]), (grid[len(grid) // 2], grid[0])]
    worst = 0.0
    for x, z in pairs:
        literal = diffusion.expected_hitting(a, x, z)
        closed = float(diffusion.hitting_times_from(a, x, [z])[0])
        worst = max(worst, abs(literal - closed) / max(1.0, abs(closed)))
    # the profile must not depend on where scale and speed are normalized
    shifted = 0.5 * (spec.anchor + grid[-1])
    if shifted == spec.anchor:
        shifted = 0.5 * (spec.anchor + grid[0])
    moved = diffusion.build_analysis(diffusion.make_spec(
        spec.drift_src, spec.sigma_src, spec.left, spec.right,
        spec.left_boundary, spec.right_boundary, shifted))
    k_moved = np.array([diffusion.kemeny_value(moved, x) for x in grid])
    anchor_gap = float(np.abs(k_moved - prof.k_values).max())
    results["hitting_consistency"] = worst
    results["anchor_invariance"] = {"anchor": shifted, "max_difference": anchor_gap}
    verdicts["hitting_consistency"] = verdict(worst, CONSISTENCY_TOL)
    verdicts["anchor_invariance"] = verdict(anchor_gap, CONSISTENCY_TOL * max(1.0, prof.kappa))


def _diffusion_mc(a, args, seed, verdicts):
    x = args.mc_start
    z = args.mc_target
    if x is None or z is None:
        qx, qz = sim.sample_stationary(a, draws=[0.9, 0.5])
        x = float(qx) if x is None else x
        z = float(qz) if z is None else z
    est = sim.estimate_hitting_diffusion(
        a, x, z, step=args.step, band=args.band, n_samples=args.mc,
        rng=sim.RngStream(seed, 0), streams=args.streams,
    )
    verdicts["mc_hitting_relative_error"] = verdict(abs(est.relative_error), MC_REL_TOL)
    h = sim.default_step(a) if args.step is None else args.step
    band = 20 * math.sqrt(h) if args.band is None else args.band
    return [_mc_entry("hitting_time", est, start=x, target=z, step=h, band=band,
                      relative_error=est.relative_error)]


# entry point ------------------------------------------------------------


def run_command(argv):
    """Run one command; returns ``(exit_code, report or None)``."""
    try:
        args = build_parser().parse_args(argv)
        seed = _resolve_seed(args)
    except UsageError as exc:
        print(f"kemeny: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    try:
        loaded = load_model(args.input)
        if args.command != "verify" and args.command != loaded.kind:
            raise UsageError(f"input is a {loaded.kind} model, not {args.command}")
        if loaded.kind != "diffusion" and getattr(args, "truncate", None) is not None:
            raise UsageError("--truncate applies to diffusions only")
        full = args.command == "verify"
        run = {"dtmc": _dtmc, "ctmc": _ctmc, "diffusion": _diffusion}[loaded.kind]
        results, mc, verdicts, profile = run(loaded.model, args, seed, full)
    except UsageError as exc:
        print(f"kemeny: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except (KemenyError, OSError) as exc:
        print(f"kemeny: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    if loaded.labels is not None:
        results["labels"] = loaded.labels
    parameters = {
        "command": args.command,
        "input": args.input,
        "seed": seed,
        "mc": args.mc,
        "streams": args.streams,
    }
    for key in ("grid", "truncate", "step", "band", "mc_start", "mc_target"):
        if hasattr(args, key):
            parameters[key] = getattr(args, key)
    report = RunReport(
        loaded.kind, loaded.digest, parameters, results, mc, verdicts,
        None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    text = report.to_json(compact=args.compact)
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text if text.endswith("\n") else text + "\n")
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        if args.csv:
            write_profile_csv(args.csv, profile[1], profile[2], profile[0])
    except OSError as exc:
        print(f"kemeny: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, report
    return (EXIT_OK if report.passed else EXIT_FAILED), report


def main(argv=None):
    code, _ = run_command(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
