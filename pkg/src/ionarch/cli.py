"""Command-line front end.

Subcommands: ``estimate-adder``, ``estimate-shor``, ``threshold``,
``mc-cluster``, ``netsim``, ``hypercell``.  Exit codes: 0 success, 2
validation error, 3 infeasible result.  Machine output goes to stdout as JSON
with ``--json``; table-like results are CSV (stdout or ``--out``).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import cluster, config, estimator, hypercell, netsim
from .arch import layout_from_name
from .device import LinkModel, LinkType
from .errors import InsufficientConcatenation, ValidationError


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--json", action="store_true",
                        help="emit JSON on stdout")
    parser.add_argument("--out", help="write CSV output to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionarch",
        description="resource estimation and simulation for modular "
                    "trapped-ion architectures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-adder", help="n-bit adder time and resources")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--arch", choices=["musiqc", "qla", "nn"], required=True)
    p.add_argument("--level", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("estimate-shor", help="factoring roll-up")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--arch", choices=["musiqc", "qla"], default="musiqc")
    p.add_argument("--eps-phys", type=float, default=1e-7)
    p.add_argument("--eps-threshold", type=float, default=1e-4)
    _add_common(p)

    p = sub.add_parser("threshold", help="cluster-state threshold margin")
    p.add_argument("--eps", type=str, default=None,
                   help="gate error (accepts fractions like 29/10000)")
    p.add_argument("--ratio", type=str, default=None,
                   help="memory error per step, T/tau_D")
    p.add_argument("--scan", action="store_true")
    p.add_argument("--eps-grid", default="0,1e-4,3e-4,1e-3")
    p.add_argument("--ratio-grid", default="0,1e-4,3e-4,1e-3")
    _add_common(p)

    p = sub.add_parser("mc-cluster", help="Monte Carlo cell-check expectation")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--ratio", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("netsim", help="photonic link simulation")
    p.add_argument("--pairs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--m-p", type=int, default=2)
    p.add_argument("--m-t", type=int, default=10)
    p.add_argument("--link", choices=["type1", "type2"], default="type1")
    p.add_argument("--p-excite", type=float, default=None)
    p.add_argument("--repetition-rate-hz", type=float, default=None)
    p.add_argument("--log", help="write the event log to this path")
    _add_common(p)

    p = sub.add_parser("hypercell", help="tree-cluster analytics and scans")
    p.add_argument("--scan", action="store_true")
    p.add_argument("--eps-grid", default="1e-6,1e-5,1e-4,1e-3")
    p.add_argument("--ratio-grid", default="0.1,1,10,100")
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--eps", type=float, default=2.9e-4)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--layers", type=int, default=4)
    _add_common(p)

    return parser


def _parse_number(text: str) -> Fraction | float:
    if "/" in text:
        return Fraction(text)
    return float(text)


def _grid(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(args, payload: dict | None = None, csv_text: str | None = None) -> None:
    if csv_text is not None and args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    if payload is not None and (args.json or csv_text is None):
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    elif csv_text is not None and not args.out:
        sys.stdout.write(csv_text)


def _cmd_estimate_adder(args, cfg) -> int:
    params = config.device_from_config(cfg)
    layout = layout_from_name(args.arch)
    row = estimator.adder_row(args.n, layout, params, level=args.level)
    _emit(args, payload=row, csv_text=estimator.rows_to_csv([row]))
    return 0


def _cmd_estimate_shor(args, cfg) -> int:
    params = config.device_from_config(cfg)
    layout = layout_from_name(args.arch)
    result = estimator.shor_estimate(args.n, layout, params,
                                     eps_phys=args.eps_phys,
                                     eps_threshold=args.eps_threshold)
    payload = {
        "n": args.n, "layout": layout.kind, "level": result["level"],
        "time_s": result["time_s"], "time_days": result["time_s"] / 86400.0,
        "qubits": result["qubits"],
        "k_ops": result["k_ops"], "q_logical": result["q_logical"],
    }
    _emit(args, payload=payload)
    return 0


def _cmd_threshold(args, cfg) -> int:
    if args.scan:
        rows = []
        for eps in _grid(args.eps_grid):
            for ratio in _grid(args.ratio_grid):
                budget = cluster.ErrorBudget(eps=eps, r=ratio)
                margin = float(cluster.threshold_margin(budget))
                analytic = cluster.stabilizer_expectation_analytic(budget)
                rows.append({"eps": eps, "r": ratio, "margin": margin,
                             "below_threshold": margin > 0,
                             "expectation_first_order": analytic["first_order"]})
        lines = ["eps,r,margin,below_threshold,expectation_first_order"]
        for row in rows:
            lines.append(f"{row['eps']:.9g},{row['r']:.9g},{row['margin']:.9g},"
                         f"{int(row['below_threshold'])},"
                         f"{row['expectation_first_order']:.9g}")
        _emit(args, payload={"rows": rows} if args.json else None,
              csv_text="\n".join(lines) + "\n")
        return 0
    eps = _parse_number(args.eps) if args.eps is not None else 0.0
    ratio = _parse_number(args.ratio) if args.ratio is not None else 0.0
    budget = cluster.ErrorBudget(eps=eps, r=ratio)
    margin = cluster.threshold_margin(budget)
    analytic = cluster.stabilizer_expectation_analytic(budget)
    payload = {
        "eps": float(eps), "r": float(ratio), "margin": float(margin),
        "below_threshold": float(margin) > 0,
        "expectation_first_order": float(analytic["first_order"]),
        "expectation_product": float(analytic["product"]),
    }
    _emit(args, payload=payload)
    return 0


CLUSTER_CSV_HEADER = ("eps,r,analytic_first_order,analytic_product,"
                      "mc_estimate,mc_stderr,samples,seed")


def _cmd_mc_cluster(args, cfg) -> int:
    samples = config.resolve(args.samples, cfg, "run.samples", 100000)
    seed = config.resolve(args.seed, cfg, "run.seed", 1)
    budget = cluster.ErrorBudget(eps=args.eps, r=args.ratio)
    analytic = cluster.stabilizer_expectation_analytic(budget)
    mc = cluster.mc_stabilizer_expectation(budget, samples, seed)
    row = (f"{args.eps:.9g},{args.ratio:.9g},{analytic['first_order']:.9g},"
           f"{analytic['product']:.9g},{mc['estimate']:.9g},"
           f"{mc['stderr']:.9g},{samples},{seed}")
    payload = {"eps": args.eps, "r": args.ratio,
               "analytic_first_order": analytic["first_order"],
               "analytic_product": analytic["product"],
               "mc_estimate": mc["estimate"], "mc_stderr": mc["stderr"],
               "samples": samples, "seed": seed}
    _emit(args, payload=payload if args.json else None,
          csv_text=CLUSTER_CSV_HEADER + "\n" + row + "\n")
    return 0


def _cmd_netsim(args, cfg) -> int:
    pairs = config.resolve(args.pairs, cfg, "run.pairs", 10)
    seed = config.resolve(args.seed, cfg, "run.seed", 1)
    params = config.device_from_config(
        cfg, p_excite=args.p_excite,
        repetition_rate=args.repetition_rate_hz)
    kind = LinkType.TYPE_I if args.link == "type1" else LinkType.TYPE_II
    link = LinkModel(kind=kind, params=params)
    elu_a = netsim.EluState(elu_id=0, ports=args.m_p, m_t=args.m_t)
    elu_b = netsim.EluState(elu_id=1, ports=args.m_p, m_t=args.m_t)
    result = netsim.run_link_sim(link, elu_a, elu_b, pairs, seed,
                                 collect_log=args.log is not None)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("\n".join(result["event_log"]) + "\n")
    sys.stdout.write(netsim.summary_json(result) + "\n")
    return 0


def _cmd_hypercell(args, cfg) -> int:
    seed = config.resolve(args.seed, cfg, "run.seed", 1)
    if args.scan:
        rows = hypercell.boundary_scan(_grid(args.eps_grid),
                                       _grid(args.ratio_grid),
                                       trials=args.trials, seed=seed)
        _emit(args, payload={"rows": rows} if args.json else None,
              csv_text=hypercell.boundary_rows_to_csv(rows))
        return 0
    tau_d = 1.0
    tau_e = args.ratio * tau_d
    cfg_tree = hypercell.TreeConfig(layers=args.layers)
    t = args.t if args.t is not None else min(tau_e, cfg_tree.c * tau_e / 2.0) / 100.0
    budget = hypercell.HypercellBudget(t=t, tau_e=tau_e, tau_d=tau_d,
                                       eps=args.eps)
    payload = {
        "p": budget.p,
        "ports": cfg_tree.ports,
        "path_length": hypercell.path_length(cfg_tree.ports),
        "memory_error": hypercell.memory_error(budget),
        "total_error": hypercell.total_error(budget),
        "ft_bounds": hypercell.ft_bounds(budget),
        "cost": hypercell.hypercell_cost(budget.p, cfg_tree.c)["log_cost"],
    }
    if args.trials:
        payload["mc"] = hypercell.mc_tree_build(cfg_tree, budget, args.trials,
                                                seed)
    _emit(args, payload=payload)
    return 0


_COMMANDS = {
    "estimate-adder": _cmd_estimate_adder,
    "estimate-shor": _cmd_estimate_shor,
    "threshold": _cmd_threshold,
    "mc-cluster": _cmd_mc_cluster,
    "netsim": _cmd_netsim,
    "hypercell": _cmd_hypercell,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config.load_config(getattr(args, "config", None))
        return _COMMANDS[args.command](args, cfg)
    except InsufficientConcatenation as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
