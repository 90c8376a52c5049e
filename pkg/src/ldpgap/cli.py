"""Command-line interface.

Subcommands cover the full pipeline: ``gen`` synthesizes populations,
``perturb`` applies a mechanism to a record CSV, ``estimate`` computes
the gap from perturbed records, ``budget``/``mse-sweep``/``ratio-sweep``/
``alloc-grid`` emit the closed-form analysis tables, ``simulate`` runs a
seeded end-to-end experiment, and ``audit`` checks the privacy claims.

Conventions: data goes to stdout (or ``--out``), logs to stderr; every
file output gets a sibling ``<name>.manifest.json`` describing the
resolved configuration; record CSVs use the header ``group,value``;
machine-readable numbers carry 17 significant digits. Exit codes:
0 ok, 2 malformed input, 3 invalid parameters.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from ldpgap import __version__, analytics, simulation
from ldpgap.errors import DomainError
from ldpgap.mechanisms import (
    Budget,
    MechanismSpec,
    audit_l_grid,
    audit_r_exact,
    epsilon_of_l,
    perturb_arrays,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PARAMS = 3


class InputError(Exception):
    """Malformed input data or configuration (exit code 2)."""


def _fmt(x):
    """17-significant-digit decimal form (round-trips exactly)."""
    return format(float(x), ".17g")


def _env_seed():
    raw = os.environ.get("LDPGAP_SEED", "").strip()
    return int(raw) if raw else 0


def mechanism_to_json(mech: MechanismSpec):
    return {
        "kind": mech.kind,
        "d": mech.d,
        "budget": {
            "eps1": mech.budget.eps1,
            "eps2": mech.budget.eps2,
            "k": mech.budget.k,
        },
    }


def write_manifest(out_path, command, config, seed, outputs):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "outputs": [str(p) for p in outputs],
    }
    path = str(out_path) + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit_json(payload, out, command, config, seed):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        write_manifest(out, command, config, seed, [out])
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, out, command, config, seed):
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)

    if out:
        with open(out, "w", newline="") as fh:
            write(fh)
        write_manifest(out, command, config, seed, [out])
    else:
        write(sys.stdout)


# ---------------------------------------------------------------- budgets


def _add_mech_args(p, default_mech=None):
    g = p.add_argument_group("mechanism")
    g.add_argument("--mech", choices=("r", "l"), default=default_mech,
                   required=default_mech is None, help="mechanism kind")
    g.add_argument("--d", type=int, default=2, help="number of group categories")
    g.add_argument("--eps1", type=float, help="group budget")
    g.add_argument("--eps2", type=float, help="value budget")
    g.add_argument("--k", type=float, help="flipped-client noise scale parameter")
    g.add_argument("--eps", type=float, help="total budget (use with --alloc)")
    g.add_argument("--alloc", choices=analytics.ALLOC_KINDS,
                   help="budget allocation for --eps")


def _resolve_mechanism(args):
    if args.eps is not None:
        if args.alloc is None:
            raise DomainError("--eps requires --alloc")
        if args.eps1 is not None or args.eps2 is not None or args.k is not None:
            raise DomainError("--eps/--alloc conflicts with explicit budgets")
        expected = "r" if args.alloc == "r" else "l"
        if args.mech != expected:
            raise DomainError(
                f"allocation {args.alloc!r} belongs to mechanism {expected!r}"
            )
        budget = analytics.allocate(args.alloc, args.eps)
    else:
        if args.eps1 is None or args.eps2 is None:
            raise DomainError("need --eps1 and --eps2 (or --eps with --alloc)")
        budget = Budget(
            eps1=args.eps1, eps2=args.eps2, k=args.k if args.k is not None else 2.0
        )
    return MechanismSpec(kind=args.mech, budget=budget, d=args.d)


# ------------------------------------------------------------------- csv


def read_records(path, rescale=False):
    """Record CSV -> (groups, values) arrays; raises InputError with the
    offending row number."""
    lo, hi = (0.0, 1.0) if rescale else (-1.0, 1.0)
    groups, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return np.empty(0, np.int64), np.empty(0, np.float64)
        if header != ["group", "value"]:
            raise InputError(f"{path}: expected header group,value, got {header}")
        for i, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise InputError(f"{path}: row {i}: expected 2 fields, got {len(row)}")
            try:
                g = int(row[0])
                v = float(row[1])
            except ValueError as exc:
                raise InputError(f"{path}: row {i}: {exc}") from None
            if g < 0:
                raise InputError(f"{path}: row {i}: negative group {g}")
            if math.isnan(v) or not lo <= v <= hi:
                raise InputError(
                    f"{path}: row {i}: value {v} outside [{lo}, {hi}]"
                )
            groups.append(g)
            values.append(v)
    groups = np.asarray(groups, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if rescale:
        values = 2.0 * values - 1.0
    return groups, values


def _record_rows(groups, values):
    return [(int(g), _fmt(v)) for g, v in zip(groups, values)]


def _parse_float_list(text, name):
    try:
        items = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise InputError(f"invalid {name} list {text!r}: {exc}") from None
    if not items:
        raise InputError(f"empty {name} list")
    return items


def _parse_range(text, name):
    """start:stop:count linspace, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"{name} range must be start:stop:count, got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise InputError(f"invalid {name} range {text!r}: {exc}") from None
        if count < 2:
            raise InputError(f"{name} range needs at least 2 points")
        return list(np.linspace(start, stop, count))
    return _parse_float_list(text, name)


# -------------------------------------------------------------- commands


def cmd_perturb(args):
    mech = _resolve_mechanism(args)
    groups, values = read_records(args.in_csv, rescale=args.rescale)
    out_g, out_v = perturb_arrays(
        groups, values, mech, args.seed, threads=args.threads
    )
    config = {
        "mechanism": mechanism_to_json(mech),
        "input": args.in_csv,
        "rescale": args.rescale,
    }
    _emit_csv(
        ["group", "value"],
        _record_rows(out_g, out_v),
        args.out,
        "perturb",
        config,
        args.seed,
    )
    return EXIT_OK


def cmd_estimate(args):
    from ldpgap.estimation import GroupTally, estimate_gap

    mech = _resolve_mechanism(args)
    sizes = [int(x) for x in args.sizes.split(",")]
    if len(sizes) != 2 or any(n <= 0 for n in sizes):
        raise InputError(f"--sizes must be two positive integers, got {args.sizes}")
    groups, values = read_records(args.in_csv)
    tallies = {}
    for g in (0, 1):
        t = GroupTally(group=g)
        for v in values[groups == g]:
            t.add(float(v))
        tallies[g] = t
    est = estimate_gap(tallies, sizes, mech)
    payload = {
        "command": "estimate",
        "gap": est.gap,
        "signed_diff": est.signed_diff,
        "mean_a": est.mean_a,
        "mean_b": est.mean_b,
        "sizes": sizes,
        "observed_counts": [tallies[0].count, tallies[1].count],
        "mechanism": mechanism_to_json(mech),
    }
    if args.rescale:
        payload["rescaled"] = {
            "mean_a": (est.mean_a + 1.0) / 2.0,
            "mean_b": (est.mean_b + 1.0) / 2.0,
            "gap": est.gap / 2.0,
        }
    if args.nu2 is not None or args.nu2_worst:
        if args.nu2 is not None:
            nu2s = _parse_float_list(args.nu2, "--nu2")
            if len(nu2s) != 2:
                raise InputError("--nu2 needs two values")
        else:
            w = analytics.worst_nu2(mech.kind)
            nu2s = [w, w]
        pop = analytics.PopulationProfile(
            analytics.GroupProfile(n=sizes[0], nu2=nu2s[0]),
            analytics.GroupProfile(n=sizes[1], nu2=nu2s[1]),
        )
        report = analytics.mse_gap(pop, mech)
        payload["theoretical_mse"] = {
            "point": report.point,
            "lower": report.lower,
            "upper": report.upper,
        }
        payload["alpha"] = analytics.chebyshev_alpha(report.upper, args.prob)
        payload["prob"] = args.prob
    _emit_json(payload, args.out, "estimate", payload.get("mechanism"), None)
    return EXIT_OK


def cmd_budget(args):
    clients = [int(float(x)) for x in args.clients.split(",")]
    alphas = _parse_float_list(args.alpha, "--alpha")
    kinds = ("r", "l-opt") if args.mech == "both" else (args.mech,)
    rows = []
    for row in analytics.budget_table(clients, alphas, args.prob, kinds):
        sol = row["solution"]
        rows.append(
            (
                row["clients"],
                _fmt(row["alpha"]),
                row["kind"],
                f"{sol.eps:.2f}" if sol.feasible else "-",
            )
        )
    config = {
        "clients": clients,
        "alpha": alphas,
        "prob": args.prob,
        "mech": args.mech,
    }
    _emit_csv(["clients", "alpha", "mech", "eps"], rows, args.out,
              "budget", config, None)
    return EXIT_OK


def cmd_mse_sweep(args):
    eps_list = _parse_range(args.eps, "--eps")
    kinds = [k.strip() for k in args.mech.split(",")]
    for kind in kinds:
        if kind not in analytics.ALLOC_KINDS:
            raise InputError(f"unknown mechanism kind {kind!r}")
    rows = []
    for kind in kinds:
        nu2 = analytics.worst_nu2("l" if kind.startswith("l") else "r")
        pop = analytics.PopulationProfile(
            analytics.GroupProfile(n=args.n0, nu2=nu2),
            analytics.GroupProfile(n=args.n1, nu2=nu2),
        )
        for eps in eps_list:
            mech = analytics.mechanism_for(kind, eps)
            report = analytics.mse_gap(pop, mech)
            rows.append((_fmt(eps), kind, _fmt(report.lower), _fmt(report.upper)))
    config = {"n0": args.n0, "n1": args.n1, "eps": eps_list, "mech": kinds}
    _emit_csv(["eps", "mech", "lower", "upper"], rows, args.out,
              "mse-sweep", config, None)
    return EXIT_OK


def cmd_ratio_sweep(args):
    ratios = _parse_float_list(args.ratios, "--ratios")
    eps_list = _parse_range(args.eps, "--eps")
    if args.mech not in analytics.ALLOC_KINDS:
        raise InputError(f"unknown mechanism kind {args.mech!r}")
    rows = [
        (
            _fmt(r["ratio"]),
            _fmt(r["eps"]),
            r["n_a"],
            r["n_b"],
            _fmt(r["mse_upper"]),
        )
        for r in analytics.ratio_sweep(args.clients, ratios, eps_list, args.mech)
    ]
    config = {
        "clients": args.clients,
        "ratios": ratios,
        "eps": eps_list,
        "mech": args.mech,
    }
    _emit_csv(["ratio", "eps", "n_a", "n_b", "mse_upper"], rows, args.out,
              "ratio-sweep", config, None)
    return EXIT_OK


def cmd_alloc_grid(args):
    eps1_list = _parse_range(args.eps1_grid, "--eps1-grid")
    eps2_list = _parse_range(args.eps2_grid, "--eps2-grid")
    pop = analytics.PopulationProfile(
        analytics.GroupProfile(n=args.n0, nu2=1.0),
        analytics.GroupProfile(n=args.n1, nu2=1.0),
    )
    rows = []
    for eps1 in eps1_list:
        for eps2 in eps2_list:
            budget = Budget(eps1=eps1, eps2=eps2, k=args.k)
            mse = analytics.var_group_l(pop.group_a, pop.total, budget)
            mse += analytics.var_group_l(pop.group_b, pop.total, budget)
            level = epsilon_of_l(budget)
            feasible = int(level <= eps2 + 1e-12)
            rows.append(
                (_fmt(eps1), _fmt(eps2), _fmt(args.k), _fmt(mse), feasible)
            )
    config = {
        "eps1": eps1_list,
        "eps2": eps2_list,
        "k": args.k,
        "n0": args.n0,
        "n1": args.n1,
    }
    _emit_csv(
        ["eps1", "eps2", "k", "mse_upper", "ldp_feasible"],
        rows, args.out, "alloc-grid", config, None,
    )
    return EXIT_OK


def _generator_from_json(node):
    if not isinstance(node, dict):
        raise InputError("generator must be an object")
    known = {
        "mode", "sizes", "means", "nu2s", "values",
        "seed_values", "seed_file", "rescale",
    }
    unknown = set(node) - known
    if unknown:
        raise InputError(f"unknown generator fields: {sorted(unknown)}")
    kwargs = {k: node[k] for k in known if k in node}
    for key in ("sizes", "means", "nu2s", "values", "seed_values"):
        if kwargs.get(key) is not None:
            kwargs[key] = tuple(
                tuple(x) if isinstance(x, list) else x for x in kwargs[key]
            )
    try:
        return simulation.GeneratorSpec(**kwargs)
    except (TypeError, DomainError) as exc:
        raise InputError(f"invalid generator: {exc}") from None


def _mechanism_from_json(node):
    if not isinstance(node, dict):
        raise InputError("mechanism must be an object")
    kind = node.get("kind")
    d = node.get("d", 2)
    budget_node = node.get("budget")
    if not isinstance(budget_node, dict):
        raise InputError("mechanism.budget must be an object")
    try:
        if "eps" in budget_node:
            budget = analytics.allocate(
                budget_node.get("alloc", "r" if kind == "r" else "l-opt"),
                budget_node["eps"],
            )
        else:
            budget = Budget(
                eps1=budget_node["eps1"],
                eps2=budget_node["eps2"],
                k=budget_node.get("k", 2.0),
            )
        return MechanismSpec(kind=kind, budget=budget, d=d)
    except (KeyError, TypeError, DomainError) as exc:
        raise InputError(f"invalid mechanism: {exc}") from None


def load_experiment_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InputError(f"{path}: config must be a JSON object")
    for key in ("generator", "mechanism", "runs", "seed"):
        if key not in raw:
            raise InputError(f"{path}: missing config key {key!r}")
    try:
        return simulation.ExperimentConfig(
            generator=_generator_from_json(raw["generator"]),
            mechanism=_mechanism_from_json(raw["mechanism"]),
            runs=int(raw["runs"]),
            seed=int(raw["seed"]),
            keep_estimates=bool(raw.get("keep_estimates", False)),
        )
    except DomainError as exc:
        raise InputError(f"{path}: {exc}") from None


def result_to_json(result: simulation.ExperimentResult, cfg):
    payload = {
        "command": "simulate",
        "true_gap": result.true_gap,
        "true_diff": result.true_diff,
        "empirical_mse": result.empirical_mse,
        "empirical_bias": result.empirical_bias,
        "empirical_group_cov": result.empirical_group_cov,
        "empirical_group_vars": list(result.empirical_group_vars),
        "theoretical_mse": result.theoretical_mse,
        "mean_abs_error": result.mean_abs_error,
        "abs_error_sd": result.abs_error_sd,
        "runs": result.runs,
        "sizes": list(result.sizes),
        "means": list(result.means),
        "nu2s": list(result.nu2s),
        "mechanism": mechanism_to_json(cfg.mechanism),
        "seed": cfg.seed,
    }
    if cfg.generator.rescale:
        payload["rescaled"] = {
            "true_gap": result.true_gap / 2.0,
            "means": [(m + 1.0) / 2.0 for m in result.means],
        }
    return payload


def cmd_simulate(args):
    cfg = load_experiment_config(args.config)
    try:
        result = simulation.run_experiment(cfg, threads=args.threads)
    except DomainError as exc:
        # everything feeding an experiment comes from the config file
        raise InputError(f"{args.config}: {exc}") from None
    payload = result_to_json(result, cfg)
    config = {"config_file": args.config, "runs": cfg.runs}
    _emit_json(payload, args.out, "simulate", config, cfg.seed)
    if args.estimates_out:
        if result.estimates is None:
            raise InputError(
                "--estimates-out needs \"keep_estimates\": true in the config"
            )
        rows = [
            (i, _fmt(d), _fmt(g[0]), _fmt(g[1]))
            for i, (d, g) in enumerate(
                zip(result.estimates, result.group_estimates)
            )
        ]
        _emit_csv(
            ["run", "signed_diff", "mean_a", "mean_b"],
            rows, args.estimates_out, "simulate", config, cfg.seed,
        )
    return EXIT_OK


def cmd_audit(args):
    mech = _resolve_mechanism(args)
    if mech.kind == "r":
        report = audit_r_exact(mech.budget, d=mech.d)
    else:
        report = audit_l_grid(
            mech.budget, out_range=args.out_range, grid_step=args.grid_step,
            d=mech.d,
        )
    (g0, v0), (g1, v1), (g2, vp) = report.witness
    payload = {
        "command": "audit",
        "mechanism": mechanism_to_json(mech),
        "tight_eps": report.tight_eps,
        "claimed_eps": report.claimed_eps,
        "witness": {
            "input_a": {"group": g0, "value": v0},
            "input_b": {"group": g1, "value": v1},
            "output": {"group": g2, "value": vp},
        },
        "boundary_attained": report.boundary_attained,
    }
    if mech.kind == "l":
        payload["out_range"] = args.out_range
        payload["grid_step"] = args.grid_step
    _emit_json(payload, args.out, "audit", mechanism_to_json(mech), None)
    return EXIT_OK


def cmd_gen(args):
    spec_kwargs = {
        "mode": args.mode,
        "sizes": (args.n0, args.n1),
        "rescale": args.rescale,
    }
    if args.mode == "two_point":
        if args.means is None or args.nu2s is None:
            raise InputError("two_point needs --means and --nu2s")
        spec_kwargs["means"] = tuple(_parse_float_list(args.means, "--means"))
        spec_kwargs["nu2s"] = tuple(_parse_float_list(args.nu2s, "--nu2s"))
    elif args.mode == "constant":
        if args.values is None:
            raise InputError("constant needs --values")
        spec_kwargs["values"] = tuple(_parse_float_list(args.values, "--values"))
    else:
        if not args.seed_file:
            raise InputError("resample needs --seed-file")
        spec_kwargs["seed_file"] = args.seed_file
    try:
        spec = simulation.GeneratorSpec(**spec_kwargs)
        pop = simulation.generate(spec, args.seed)
    except DomainError as exc:
        raise InputError(str(exc)) from None
    config = {k: v for k, v in spec_kwargs.items()}
    config["sizes"] = [args.n0, args.n1]
    _emit_csv(
        ["group", "value"],
        _record_rows(pop.groups, pop.values),
        args.out, "gen", config, args.seed,
    )
    return EXIT_OK


# --------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ldpgap",
        description="Locally differentially private group performance gap "
        "measurement: mechanisms, estimators, error analytics, simulation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perturb", help="apply a mechanism to a record CSV")
    _add_mech_args(p)
    p.add_argument("--in", dest="in_csv", required=True, metavar="CSV")
    p.add_argument("--out", default=None, metavar="CSV")
    p.add_argument("--seed", type=int, default=_env_seed())
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--rescale", action="store_true",
                   help="input values live in [0, 1]; map to [-1, 1] first")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("estimate", help="estimate the gap from perturbed records")
    _add_mech_args(p)
    p.add_argument("--in", dest="in_csv", required=True, metavar="CSV")
    p.add_argument("--sizes", required=True, metavar="N0,N1",
                   help="claimed true group sizes")
    p.add_argument("--nu2", default=None, metavar="Q0,Q1",
                   help="per-group second moments for the MSE report")
    p.add_argument("--nu2-worst", action="store_true",
                   help="use the mechanism's worst-case second moments")
    p.add_argument("--prob", type=float, default=0.99)
    p.add_argument("--rescale", action="store_true",
                   help="also report means mapped back to [0, 1]")
    p.add_argument("--out", default=None, metavar="JSON")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("budget", help="minimum budgets meeting error targets")
    p.add_argument("--clients", required=True, metavar="K1,K2,...")
    p.add_argument("--alpha", required=True, metavar="A1,A2,...")
    p.add_argument("--prob", type=float, default=0.99)
    p.add_argument("--mech", choices=("r", "l-opt", "both"), default="both")
    p.add_argument("--out", default=None, metavar="CSV")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("mse-sweep", help="MSE bound curves over total budget")
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--eps", required=True,
                   metavar="LIST|START:STOP:COUNT")
    p.add_argument("--mech", default="r,l-k2,l-opt",
                   metavar="KIND[,KIND...]")
    p.add_argument("--out", default=None, metavar="CSV")
    p.set_defaults(func=cmd_mse_sweep)

    p = sub.add_parser("ratio-sweep", help="MSE bounds across group size ratios")
    p.add_argument("--clients", type=int, required=True)
    p.add_argument("--ratios", required=True, metavar="R1,R2,...")
    p.add_argument("--eps", required=True, metavar="LIST|START:STOP:COUNT")
    p.add_argument("--mech", default="r", metavar="KIND")
    p.add_argument("--out", default=None, metavar="CSV")
    p.set_defaults(func=cmd_ratio_sweep)

    p = sub.add_parser("alloc-grid",
                       help="MSE and LDP feasibility over an (eps1, eps2) grid")
    p.add_argument("--eps1-grid", required=True, metavar="LIST|START:STOP:COUNT")
    p.add_argument("--eps2-grid", required=True, metavar="LIST|START:STOP:COUNT")
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--out", default=None, metavar="CSV")
    p.set_defaults(func=cmd_alloc_grid)

    p = sub.add_parser("simulate", help="run a seeded end-to-end experiment")
    p.add_argument("--config", required=True, metavar="JSON")
    p.add_argument("--out", default=None, metavar="JSON")
    p.add_argument("--estimates-out", default=None, metavar="CSV")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="search for the tightest privacy loss")
    _add_mech_args(p)
    p.add_argument("--out-range", type=float, default=3.0)
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--out", default=None, metavar="JSON")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gen", help="synthesize a population CSV")
    p.add_argument("--mode", choices=simulation.GENERATOR_MODES, required=True)
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--means", default=None, metavar="M0,M1")
    p.add_argument("--nu2s", default=None, metavar="Q0,Q1")
    p.add_argument("--values", default=None, metavar="V0,V1")
    p.add_argument("--seed-file", default=None, metavar="CSV")
    p.add_argument("--rescale", action="store_true")
    p.add_argument("--seed", type=int, default=_env_seed())
    p.add_argument("--out", default=None, metavar="CSV")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"ldpgap {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"ldpgap {args.command}: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except FileNotFoundError as exc:
        print(f"ldpgap {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
