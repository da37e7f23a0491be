"""Command-line entry point.

Subcommands: bounds, simulate, fixed-point, oracle-check, ergodic. Every run
writes a fully resolved copy of its configuration (seed included) next to its
artifacts, and re-running that emitted file reproduces the artifacts
byte-for-byte regardless of --workers.

Config files are JSON with "schema_version": 1. Flags override file values;
the seed resolves as flag > RUINLAB_SEED env var > config > 0.

Exit codes: 0 success, 1 validation failure, 2 usage or parameter error,
3 I/O error while writing artifacts.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .analytics import (TailFit, bounds_report, effective_exponent, fit_tail,
                        upper_constant)
from .chain import SimConfig, curve_to_csv, ruin_curve
from .ergodic import (ArSpec, F_LIBRARY, ar_path, cesaro_average, cesaro_se,
                      check_contraction, critical_certain_ruin_demo,
                      first_ladder_epoch_tail, sample_x_infinity)
from .errors import ConfigError, InsufficientDataError, MomentDivergenceError, \
    ParameterError, RuinLabError
from .fixed_point import PerpetuityConfig, check_goldie_hypotheses, \
    estimate_C1, sample_R_batch
from .model import ClaimDistribution, ModelParams, PremiumSchedule, derive_params
from .oracle import OracleConfig, compare_with_chain

SCHEMA_VERSION = 1

_CLAIM_FIELDS = {
    "exponential": ("mean",),
    "pareto": ("shape", "scale"),
    "lognormal": ("meanlog", "sdlog"),
    "constant": ("value",),
}

_PREMIUM_FIELDS = {
    "zero": (),
    "constant": ("c_star",),
    "exponential": ("c_star", "gamma"),
    "capped_state": ("c_star", "scale"),
}


# ---------------------------------------------------------------- config I/O

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path!r} must hold a JSON object")
    version = cfg.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}"
                          f" (this build reads {SCHEMA_VERSION})")
    return cfg


def _build_params(cfg: dict) -> ModelParams:
    sect = cfg.get("params")
    if not isinstance(sect, dict):
        raise ConfigError('config needs a "params" object with a, sigma'
                          " (or sigma_sq) and alpha")
    if "a" not in sect or "alpha" not in sect:
        raise ConfigError('"params" needs both "a" and "alpha"')
    a = float(sect["a"])
    alpha = float(sect["alpha"])
    if "sigma" in sect:
        return derive_params(a, float(sect["sigma"]), alpha)
    if "sigma_sq" in sect:
        return ModelParams.from_variance(a, float(sect["sigma_sq"]), alpha)
    raise ConfigError('"params" needs "sigma" or "sigma_sq"')


def _build_claims(cfg: dict) -> ClaimDistribution:
    sect = cfg.get("claims")
    if not isinstance(sect, dict) or "kind" not in sect:
        raise ConfigError('config needs a "claims" object with a "kind"')
    kind = sect["kind"]
    if kind not in _CLAIM_FIELDS:
        raise ConfigError(f"unknown claim kind {kind!r};"
                          f" expected one of {sorted(_CLAIM_FIELDS)}")
    try:
        vals = [float(sect[f]) for f in _CLAIM_FIELDS[kind]]
    except KeyError as exc:
        raise ConfigError(f"claim kind {kind!r} needs field {exc.args[0]!r}") from exc
    return getattr(ClaimDistribution, kind)(*vals)


def _build_premium(cfg: dict) -> PremiumSchedule:
    sect = cfg.get("premium", {"kind": "zero"})
    if not isinstance(sect, dict) or "kind" not in sect:
        raise ConfigError('"premium" must be an object with a "kind"')
    kind = sect["kind"]
    if kind not in _PREMIUM_FIELDS:
        raise ConfigError(f"unknown premium kind {kind!r};"
                          f" expected one of {sorted(_PREMIUM_FIELDS)}")
    try:
        vals = [float(sect[f]) for f in _PREMIUM_FIELDS[kind]]
    except KeyError as exc:
        raise ConfigError(f"premium kind {kind!r} needs field {exc.args[0]!r}") from exc
    return getattr(PremiumSchedule, kind)(*vals)


def _claims_dict(claims: ClaimDistribution) -> dict:
    return {"kind": claims.kind,
            **dict(zip(_CLAIM_FIELDS[claims.kind], claims.args))}


def _premium_dict(prem: PremiumSchedule) -> dict:
    out = {"kind": prem.kind}
    for f in _PREMIUM_FIELDS[prem.kind]:
        out[f] = getattr(prem, f)
    return out


def _resolve_seed(flag_seed: int | None, section: dict) -> int:
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get("RUINLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"RUINLAB_SEED must be an integer, got {env!r}") from exc
    return int(section.get("seed", 0))


def _parse_u_grid(flag_value: str | None, section: dict) -> list[float]:
    if flag_value is not None:
        parts = [p for p in flag_value.split(",") if p.strip()]
        try:
            grid = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"--u-grid must be comma-separated numbers,"
                              f" got {flag_value!r}") from exc
    else:
        grid = [float(v) for v in section.get("u_grid", [])]
    if not grid:
        raise ConfigError("no u grid given (use --u-grid or the config)")
    return grid


def _out_dir(args) -> str:
    path = args.out or "."
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _emit_resolved(out_dir: str, command: str, params: ModelParams,
                   claims: ClaimDistribution, prem: PremiumSchedule,
                   sections: dict, workers: int) -> None:
    resolved = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": {"a": params.a, "sigma": params.sigma, "alpha": params.alpha},
        "claims": _claims_dict(claims),
        "premium": _premium_dict(prem),
        "workers": workers,
        **sections,
    }
    _write_json(os.path.join(out_dir, "resolved_config.json"), resolved)


# ---------------------------------------------------------------- subcommands

def _cmd_bounds(args) -> int:
    cfg = _load_config(args.config)
    params = _build_params(cfg)
    claims = _build_claims(cfg)
    prem = _build_premium(cfg)
    out_dir = _out_dir(args)
    beta = params.beta

    if params.regime == "certain-ruin":
        payload = {"beta": beta, "regime": "certain-ruin",
                   "notice": "decay exponent is not positive: ruin is certain"
                             " (probability 1) for every initial capital"}
        if args.format == "json":
            print(json.dumps(payload, indent=2, sort_keys=True))
        else:
            print(f"beta = {beta:.6g}  [certain-ruin]")
            print(payload["notice"])
        _write_json(os.path.join(out_dir, "bounds.json"), payload)
        _emit_resolved(out_dir, "bounds", params, claims, prem, {}, args.workers)
        return 0

    report = bounds_report(params, claims)
    payload = report.to_dict()
    payload["regime"] = params.regime
    if prem.kind == "exponential" and prem.gamma < 0.0:
        payload["effective_exponent"] = effective_exponent(params, prem.gamma)
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif args.format == "csv":
        print("key,value")
        for k in sorted(payload):
            print(f"{k},{payload[k]}")
    else:
        print(f"beta             = {payload['beta']:.10g}")
        print(f"regime           = {payload['regime']}")
        if payload["varrho"] is not None:
            print(f"varrho           = {payload['varrho']:.10g}")
        print(f"j_factor         = {payload['j_factor']:.10g}")
        print(f"upper_constant   = {payload['upper_constant']:.10g}")
        print(f"mu               = {payload['mu']:.10g}")
        print(f"claim_beta_moment= {payload['claim_beta_moment']:.10g}")
        if "effective_exponent" in payload:
            print(f"effective_exponent = {payload['effective_exponent']:.10g}")
    _write_json(os.path.join(out_dir, "bounds.json"), payload)
    _emit_resolved(out_dir, "bounds", params, claims, prem, {}, args.workers)
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    params = _build_params(cfg)
    claims = _build_claims(cfg)
    prem = _build_premium(cfg)
    sim = cfg.get("sim", {})
    seed = _resolve_seed(args.seed, sim)
    u_grid = _parse_u_grid(args.u_grid, sim)
    n_paths = args.paths if args.paths is not None else int(sim.get("n_paths", 10_000))
    max_jumps = args.max_jumps if args.max_jumps is not None \
        else int(sim.get("max_jumps", 10_000))
    bridge_points = int(sim.get("bridge_points", 64))
    sim_cfg = SimConfig(params=params, claims=claims, premium=prem,
                        n_paths=n_paths, max_jumps=max_jumps, seed=seed,
                        bridge_points=bridge_points)
    out_dir = _out_dir(args)

    estimates = ruin_curve(u_grid, sim_cfg, workers=args.workers)
    csv_text = curve_to_csv(estimates)
    _write_text(os.path.join(out_dir, "curve.csv"), csv_text)

    fit: TailFit | None = None
    fit_payload: dict
    try:
        fit = fit_tail(estimates)
        fit_payload = {"slope": fit.slope, "stderr": fit.stderr,
                       "n_used": fit.n_used, "intercept": fit.intercept}
    except InsufficientDataError as exc:
        fit_payload = {"error": str(exc)}
        print(f"tail fit skipped: {exc}", file=sys.stderr)
    _write_json(os.path.join(out_dir, "tail_fit.json"), fit_payload)

    _emit_resolved(out_dir, "simulate", params, claims, prem,
                   {"sim": {"n_paths": n_paths, "max_jumps": max_jumps,
                            "seed": seed, "bridge_points": bridge_points,
                            "u_grid": u_grid}}, args.workers)

    if args.format == "csv":
        sys.stdout.write(csv_text)
    elif args.format == "json":
        print(json.dumps(fit_payload, indent=2, sort_keys=True))
    if fit is not None:
        print(f"tail fit: slope = {fit.slope:.4f} +/- {fit.stderr:.4f}"
              f" over {fit.n_used} points")

    beta = params.beta
    if beta > 0.0:
        try:
            c_star = upper_constant(params, claims)
        except MomentDivergenceError:
            print("sandwich check skipped: claim size has no finite"
                  f" moment of order beta = {beta:.4g}")
        else:
            print(f"sandwich check against upper constant {c_star:.6g}:")
            for est in estimates:
                lhs = est.u ** beta * est.psi_hat
                verdict = "ok" if lhs <= c_star * 1.05 else "EXCEEDED"
                print(f"  u = {est.u:g}: u^beta * psi_hat = {lhs:.6g}  {verdict}")
    else:
        print("sandwich check skipped: certain-ruin regime")
    return 0


def _cmd_fixed_point(args) -> int:
    cfg = _load_config(args.config)
    params = _build_params(cfg)
    claims = _build_claims(cfg)
    prem = _build_premium(cfg)
    fp = cfg.get("fixed_point", {})
    seed = _resolve_seed(args.seed, fp)
    n_samples = args.paths if args.paths is not None \
        else int(fp.get("n_samples", 100_000))
    k_max = int(fp.get("k_max", 100_000))
    bridge_points = int(fp.get("bridge_points", 16))
    pcfg = PerpetuityConfig(params=params, claims=claims, c_star=prem.c_star,
                            n_samples=n_samples, k_max=k_max, seed=seed,
                            bridge_points=bridge_points)
    out_dir = _out_dir(args)

    c_upper = upper_constant(params, claims)   # diverging moment -> exit 2
    goldie = check_goldie_hypotheses(params, claims)
    if not goldie.ok:
        print("warning: contraction-moment hypotheses not verified for this"
              " configuration; the tail-constant estimate may be unreliable",
              file=sys.stderr)
    est = estimate_C1(pcfg)

    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([seed, 99_991, 0])))
    r_samples, _ = sample_R_batch(rng, pcfg, n_samples)
    r_sorted = np.sort(r_samples)[::-1]
    k = min(1000, n_samples)
    lines = ["r,survival"]
    lines += [f"{float(r_sorted[i])!r},{(i + 1) / n_samples!r}" for i in range(k)]
    _write_text(os.path.join(out_dir, "r_tail.csv"), "\n".join(lines) + "\n")

    payload = {"c1_hat": est.c1_hat, "se": est.se, "n_samples": est.n_samples,
               "n_truncated": est.n_truncated, "upper_constant": c_upper,
               "goldie_ok": goldie.ok}
    _write_json(os.path.join(out_dir, "c1.json"), payload)
    _emit_resolved(out_dir, "fixed-point", params, claims, prem,
                   {"fixed_point": {"n_samples": n_samples, "k_max": k_max,
                                    "seed": seed,
                                    "bridge_points": bridge_points}},
                   args.workers)

    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    print(f"C1 estimate: {est.c1_hat:.6g} +/- {est.se:.3g}"
          f" (upper constant {c_upper:.6g})")
    return 0


def _cmd_oracle_check(args) -> int:
    cfg = _load_config(args.config)
    if args.config is None:
        raise ConfigError("oracle-check needs --config")
    params = _build_params(cfg)
    claims = _build_claims(cfg)
    prem = _build_premium(cfg)
    sim = cfg.get("sim", {})
    osect = cfg.get("oracle", {})
    seed = _resolve_seed(args.seed, osect)
    n_paths = args.paths if args.paths is not None \
        else int(osect.get("n_paths", 10_000))
    u_grid = _parse_u_grid(args.u_grid, osect)
    t_max = float(osect.get("t_max", 50.0))
    dt = osect.get("dt")
    max_jumps = args.max_jumps if args.max_jumps is not None \
        else int(sim.get("max_jumps", 10_000))
    bridge_points = int(sim.get("bridge_points", 64))

    oracle_params = params
    matched = True
    if args.perturb_sigma is not None:
        oracle_params = derive_params(params.a,
                                      params.sigma * args.perturb_sigma,
                                      params.alpha)
        matched = False
    ocfg = OracleConfig(params=oracle_params, claims=claims, premium=prem,
                        n_paths=n_paths, t_max=t_max,
                        dt=None if dt is None else float(dt), seed=seed)
    ccfg = SimConfig(params=params, claims=claims, premium=prem,
                     n_paths=n_paths, max_jumps=max_jumps, seed=seed,
                     bridge_points=bridge_points)
    out_dir = _out_dir(args)

    rows = []
    worst = 0.0
    for u in u_grid:
        rep = compare_with_chain(u, ocfg, ccfg, workers=args.workers,
                                 require_matched=matched)
        rows.append({"u": rep.u, "psi_chain": rep.psi_chain,
                     "psi_oracle": rep.psi_oracle, "z": rep.z})
        worst = max(worst, abs(rep.z))
        print(f"u = {u:g}: chain {rep.psi_chain:.6g}"
              f" vs oracle {rep.psi_oracle:.6g}  (z = {rep.z:+.3f})")

    payload = {"comparisons": rows, "max_abs_z": worst,
               "perturb_sigma": args.perturb_sigma}
    _write_json(os.path.join(out_dir, "comparison.json"), payload)
    _emit_resolved(out_dir, "oracle-check", params, claims, prem,
                   {"oracle": {"n_paths": n_paths, "t_max": t_max, "dt": dt,
                               "seed": seed, "u_grid": u_grid},
                    "sim": {"max_jumps": max_jumps,
                            "bridge_points": bridge_points}},
                   args.workers)
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    if worst > 4.0:
        print(f"validation failure: |z| = {worst:.3f} > 4", file=sys.stderr)
        return 1
    return 0


def _halving_sampler(rng: np.random.Generator, n: int):
    return np.full(n, 0.5), rng.standard_normal(n)


def _cmd_ergodic(args) -> int:
    cfg = _load_config(args.config)
    erg = cfg.get("ergodic", {})
    mode = args.mode or erg.get("mode", "average")
    seed = _resolve_seed(args.seed, erg)
    out_dir = _out_dir(args)

    if mode == "average":
        n = int(erg.get("n", 100_000))
        spec = ArSpec(sampler=_halving_sampler, x0=0.0, delta=1.0, rho=0.5)
        rng_path = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([seed, 777, 0])))
        rng_inf = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([seed, 777, 1])))
        path = ar_path(spec, n, rng_path)
        x_inf = sample_x_infinity(spec, rng_inf, size=n)
        rho_hat, rho_se = check_contraction(
            spec, np.random.Generator(np.random.Philox(
                np.random.SeedSequence([seed, 777, 2]))))
        funcs = {}
        for name, f in F_LIBRARY.items():
            ces = cesaro_average(f, path)
            ces_se = cesaro_se(f, path)
            vals = f(x_inf)
            funcs[name] = {"cesaro": ces, "cesaro_se": ces_se,
                           "x_inf_mean": float(np.mean(vals)),
                           "x_inf_se": float(np.std(vals, ddof=1) / math.sqrt(n))}
            print(f"{name}: path average {ces:.5f} (se {ces_se:.5f})"
                  f" vs stationary {funcs[name]['x_inf_mean']:.5f}"
                  f" (se {funcs[name]['x_inf_se']:.5f})")
        payload = {"mode": mode, "n": n, "rho_hat": rho_hat,
                   "rho_se": rho_se, "functions": funcs}
        sections = {"ergodic": {"mode": mode, "n": n, "seed": seed}}
    elif mode == "ladder-tail":
        n_reps = int(erg.get("n_reps", 100_000))
        n_grid = [int(v) for v in erg.get("n_grid", [100, 1_000, 10_000])]
        if not n_grid or any(v < 1 for v in n_grid):
            raise ConfigError(f"n_grid must hold positive integers, got {n_grid}")
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([seed, 778, 0])))
        t1 = first_ladder_epoch_tail(rng, n_reps, max(n_grid))
        rows = []
        for nv in sorted(n_grid):
            surv = float(np.mean((t1 < 0) | (t1 > nv)))
            rows.append({"n": nv, "tail_prob": surv,
                         "scaled": math.sqrt(nv) * surv})
            print(f"n = {nv}: P(t1 > n) = {surv:.6g},"
                  f" sqrt(n) * P = {rows[-1]['scaled']:.4f}")
        payload = {"mode": mode, "n_reps": n_reps, "rows": rows}
        sections = {"ergodic": {"mode": mode, "n_reps": n_reps,
                                "n_grid": sorted(n_grid), "seed": seed}}
    elif mode == "certain-ruin":
        params = _build_params(cfg)
        claims = _build_claims(cfg)
        prem = _build_premium(cfg)
        u = float(erg.get("u", 10.0))
        budgets = [int(v) for v in erg.get("budgets", [2_500, 5_000, 10_000])]
        n_paths = args.paths if args.paths is not None \
            else int(erg.get("n_paths", 2_000))
        rows = critical_certain_ruin_demo(u, params, claims, prem.c_star,
                                          budgets, n_paths=n_paths, seed=seed)
        for row in rows:
            print(f"budget {row['budget']}: ruined fraction"
                  f" {row['ruined_fraction']:.4f}")
        payload = {"mode": mode, "u": u, "rows": rows}
        sections = {"ergodic": {"mode": mode, "u": u, "budgets": budgets,
                                "n_paths": n_paths, "seed": seed}}
        _write_json(os.path.join(out_dir, "ergodic.json"), payload)
        _emit_resolved(out_dir, "ergodic", params, claims, prem, sections,
                       args.workers)
        if args.format == "json":
            print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    else:
        raise ConfigError(f"unknown ergodic mode {mode!r}")

    _write_json(os.path.join(out_dir, "ergodic.json"), payload)
    resolved = {"schema_version": SCHEMA_VERSION, "command": "ergodic",
                "workers": args.workers, **sections}
    _write_json(os.path.join(out_dir, "resolved_config.json"), resolved)
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# -------------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config file (schema_version 1)")
    common.add_argument("--seed", type=int, metavar="N",
                        help="RNG seed (overrides RUINLAB_SEED and config)")
    common.add_argument("--paths", type=int, metavar="N",
                        help="paths / samples per estimate")
    common.add_argument("--max-jumps", type=int, dest="max_jumps", metavar="N",
                        help="per-path jump budget for the chain")
    common.add_argument("--workers", type=int, default=1, metavar="N",
                        help="process cap; results do not depend on it")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="artifact directory (default: current)")
    common.add_argument("--u-grid", dest="u_grid", metavar="A,B,C",
                        help="comma-separated initial capital grid")
    common.add_argument("--format", choices=["csv", "json", "text"],
                        default="text", help="stdout report format")

    parser = argparse.ArgumentParser(
        prog="ruinlab",
        description="Ruin probabilities for capital invested in a"
                    " geometric Brownian asset: simulation, closed-form"
                    " tail constants and cross-checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bounds", parents=[common],
                        help="closed-form decay exponent and tail constants")
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("simulate", parents=[common],
                        help="ruin curve over a capital grid + tail fit")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("fixed-point", parents=[common],
                        help="perpetuity tail constant and R-tail export")
    sp.set_defaults(func=_cmd_fixed_point)

    sp = sub.add_parser("oracle-check", parents=[common],
                        help="cross-validate the jump chain against a"
                             " discretized path simulator")
    sp.add_argument("--perturb-sigma", type=float, metavar="FACTOR",
                    help="multiply the oracle volatility by FACTOR"
                         " (negative control; mismatch is expected)")
    sp.set_defaults(func=_cmd_oracle_check)

    sp = sub.add_parser("ergodic", parents=[common],
                        help="AR(1) averaging, ladder-epoch tails and the"
                             " critical-regime certain-ruin demonstration")
    sp.add_argument("--mode", choices=["average", "ladder-tail", "certain-ruin"],
                    help="which report to produce (default: average)")
    sp.set_defaults(func=_cmd_ergodic)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RuinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
