"""Command-line interface.

Subcommands: ingest, analyze, generate, simulate-rc, simulate-rt, sweep,
experiment, report. Every command validates inputs before writing anything,
emits byte-stable files, and exposes a --seed wherever randomness exists.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiment as exp
from . import netio, svgplot
from .attack import AttackPlan
from .communities import louvain, modularity
from .graph import largest_connected_component
from .ingest import ingest_files
from .rc import RcConfig, rc_run, recovery_sweep
from .rt import RtConfig, rt_run
from .synth import CapitalSpec, assign_capital, barabasi_albert, erdos_renyi, to_ingest_csv
from .topology import correlation_rows, metric_table, path_stats


class CliError(RuntimeError):
    pass


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise CliError(f"file not found: {p}")
    return p.read_text(encoding="utf-8")


def _load_net(path: str, lcc: bool):
    net = netio.network_from_json(_read(path))
    return largest_connected_component(net) if lcc else net


def _attack_plan(args) -> AttackPlan:
    return AttackPlan(
        strategy=args.strategy,
        seed_fraction=args.fraction,
        seed_count=args.count,
        rng_seed=args.seed,
    )


def _add_attack_flags(p: argparse.ArgumentParser):
    p.add_argument("--strategy", choices=["HDA", "HCA", "HIA", "RANDOM"],
                   default="HDA", help="seed selection strategy")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--fraction", type=float, help="seed fraction p in (0,1]")
    group.add_argument("--count", type=int, help="absolute seed count")
    p.add_argument("--seed", type=int, default=0, help="rng seed")


def _cmd_ingest(args) -> int:
    triplet_text = _read(args.triplets)
    attr_text = _read(args.attrs) if args.attrs else None
    net, report = ingest_files(
        triplet_text,
        attr_text,
        threshold=args.threshold,
        blocking=args.blocking,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(netio.network_to_json(net), encoding="utf-8")
    report_path = Path(args.report) if args.report else out.with_suffix(out.suffix + ".report.json")
    report_path.write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {out} ({net.n_nodes} firms, {net.n_edges} edges) and {report_path}")
    return 0


def _cmd_analyze(args) -> int:
    net = _load_net(args.net, args.lcc)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = metric_table(net)
    (out_dir / "metrics.csv").write_text(table.to_csv(), encoding="utf-8")
    apl, diameter = path_stats(net)
    part = louvain(net, rng_seed=args.seed)
    stats = {
        "nodes": net.n_nodes,
        "edges": net.n_edges,
        "avg_path_length": apl,
        "diameter": diameter,
        "modularity": modularity(net, part),
        "communities": part.n_communities,
    }
    (out_dir / "stats.json").write_text(
        json.dumps(stats, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    (out_dir / "correlations.json").write_text(
        json.dumps(correlation_rows(table), sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    print(f"wrote metrics.csv, stats.json, correlations.json to {out_dir}")
    return 0


def _cmd_generate(args) -> int:
    if args.ba:
        n, m = args.ba
        net = barabasi_albert(n, m, seed=args.seed)
    else:
        n, p = args.er
        net = erdos_renyi(int(n), p, seed=args.seed)
    net = assign_capital(net, CapitalSpec.parse(args.capital), seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    triplets, attrs = to_ingest_csv(net)
    (out_dir / "triplets.csv").write_text(triplets, encoding="utf-8")
    (out_dir / "attrs.csv").write_text(attrs, encoding="utf-8")
    (out_dir / "network.json").write_text(netio.network_to_json(net), encoding="utf-8")
    print(f"wrote triplets.csv, attrs.csv, network.json to {out_dir} "
          f"({net.n_nodes} firms, {net.n_edges} edges)")
    return 0


def _cmd_simulate_rc(args) -> int:
    net = _load_net(args.net, args.lcc)
    cfg = RcConfig(
        lam=args.lam,
        mu=args.mu,
        delta=args.delta,
        tau=args.tau,
        beta_mode=args.beta_mode,
        beta_value=args.beta_value,
        recovery_mode=args.recovery_mode,
        threshold=args.threshold,
        max_steps=args.max_steps,
        convergence_eps=args.eps,
    )
    trace = rc_run(net, cfg, _attack_plan(args))
    Path(args.out).write_text(trace.to_csv(), encoding="utf-8")
    print(f"wrote {args.out}: {len(trace.steps)} steps, "
          f"terminal affected {trace.terminal_affected:.4f} ({trace.reason})")
    return 0


def _cmd_simulate_rt(args) -> int:
    net = _load_net(args.net, args.lcc)
    cfg = RtConfig(
        policy=args.policy,
        delta_c=args.delta_c,
        c_floor=args.c_floor,
        p_absorb=args.p_absorb,
        beta_mode=args.beta_mode,
        beta_value=args.beta_value,
        tau=args.tau,
        max_steps=args.max_steps,
        rng_seed=args.seed,
    )
    trace = rt_run(net, cfg, _attack_plan(args))
    Path(args.out).write_text(trace.to_csv(), encoding="utf-8")
    print(f"wrote {args.out}: {len(trace.steps)} steps, "
          f"terminal affected {trace.terminal_affected:.4f} ({trace.reason})")
    return 0


def _parse_ratios(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        ratios = []
        r = lo
        while r <= hi + step * 1e-9:
            ratios.append(round(r, 10))
            r += step
        return ratios
    return [float(v) for v in text.split(",")]


def _cmd_sweep(args) -> int:
    net = _load_net(args.net, args.lcc)
    cfg = RcConfig(
        lam=args.lam,
        delta=args.delta,
        tau=args.tau,
        beta_mode=args.beta_mode,
        beta_value=args.beta_value,
        recovery_mode=args.recovery_mode,
        threshold=args.threshold,
        max_steps=args.max_steps,
        convergence_eps=args.eps,
    )
    result = recovery_sweep(net, cfg, _attack_plan(args), _parse_ratios(args.ratios))
    Path(args.out).write_text(result.to_csv(), encoding="utf-8")
    crit = "none" if result.critical_ratio is None else f"{result.critical_ratio:g}"
    print(f"wrote {args.out}; first die-out ratio: {crit}")
    return 0


def _cmd_experiment(args) -> int:
    net = _load_net(args.net, args.lcc)
    body = json.loads(_read(args.spec))
    model = body["model"]
    cfg_body = dict(body["base_config"])
    if model == "rc":
        if "lambda" in cfg_body:
            cfg_body["lam"] = cfg_body.pop("lambda")
        base = RcConfig(**cfg_body)
    else:
        base = RtConfig(**cfg_body)
    plans = [
        AttackPlan(
            strategy=p["strategy"],
            seed_fraction=p.get("p"),
            seed_count=p.get("n"),
            rng_seed=p.get("rng_seed", 0),
        )
        for p in body["plans"]
    ]
    spec = exp.ExperimentSpec(
        model=model,
        base_config=base,
        grid=body["grid"],
        plans=plans,
        replicates=body["replicates"],
        master_seed=body.get("master_seed", 0),
    )
    results = exp.run_experiment(net, spec)
    exp.write_results(Path(args.out), spec, results)
    failures = sum(1 for r in results if r.error)
    print(f"wrote {len(results)} runs to {args.out} ({failures} failed)")
    return 0


def _cmd_report(args) -> int:
    text = _read(args.input)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CliError(f"empty input file: {args.input}")
    header = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    if not rows:
        raise CliError(f"no data rows in {args.input}")
    xs = [r[0] for r in rows]
    series = [
        (header[col], xs, [r[col] for r in rows])
        for col in range(1, len(header))
    ]
    svg = svgplot.render_line_chart(
        series,
        title=args.title or Path(args.input).name,
        x_label=header[0],
        y_label=", ".join(h for h in header[1:]),
    )
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soc-cascade",
        description="Supply-chain cooperation network toolkit: ingestion, "
                    "topology metrics, and cascade-disruption simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse triplet/attribute CSVs into a network")
    p.add_argument("--triplets", required=True, help="triplet CSV (head,relation,tail,source)")
    p.add_argument("--attrs", help="attribute CSV (name,registered_capital)")
    p.add_argument("--threshold", type=float, default=0.6,
                   help="similarity above which names merge (default 0.6)")
    p.add_argument("--blocking", action="store_true",
                   help="restrict comparisons to shared first-char/2-gram blocks")
    p.add_argument("--out", required=True, help="output network JSON")
    p.add_argument("--report", help="ingest report path (default <out>.report.json)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("analyze", help="metric table, summary stats, correlations")
    p.add_argument("--net", required=True, help="network JSON")
    p.add_argument("--lcc", action="store_true", help="restrict to the largest component")
    p.add_argument("--seed", type=int, default=0, help="community detection seed")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("generate", help="emit a synthetic fixture as ingest CSVs")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ba", nargs=2, type=int, metavar=("N", "M"),
                       help="preferential-attachment graph")
    group.add_argument("--er", nargs=2, type=float, metavar=("N", "P"),
                       help="Erdos-Renyi graph")
    p.add_argument("--capital", default="pareto:2:50",
                   help="capital law, e.g. pareto:2:50, lognormal:3:1, constant:100")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("simulate-rc", help="recovery-capacity cascade run")
    p.add_argument("--net", required=True)
    p.add_argument("--lcc", action="store_true")
    _add_attack_flags(p)
    p.add_argument("--lam", type=float, default=0.5, help="neighbor influence coefficient")
    p.add_argument("--mu", type=float, default=0.1, help="recovery coefficient")
    p.add_argument("--delta", type=float, default=1.0, help="time gap per step")
    p.add_argument("--tau", type=int, default=1, help="state delay")
    p.add_argument("--beta-mode", choices=["uniform", "degree", "capital"], default="degree")
    p.add_argument("--beta-value", type=float, default=1.0)
    p.add_argument("--recovery-mode", choices=["state", "capital"], default="state")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--eps", type=float, default=1e-6, help="convergence epsilon")
    p.add_argument("--out", required=True, help="trace CSV path")
    p.set_defaults(func=_cmd_simulate_rc)

    p = sub.add_parser("simulate-rt", help="risk-transfer cascade run")
    p.add_argument("--net", required=True)
    p.add_argument("--lcc", action="store_true")
    _add_attack_flags(p)
    p.add_argument("--policy", choices=["absorb", "transfer", "random"], required=True)
    p.add_argument("--delta-c", type=float, default=1.0, help="capacity hit per failure")
    p.add_argument("--c-floor", type=float, default=0.0, help="minimum capacity")
    p.add_argument("--p-absorb", type=float, default=0.5,
                   help="absorb probability under the random policy")
    p.add_argument("--beta-mode", choices=["uniform", "degree", "capital"], default="degree")
    p.add_argument("--beta-value", type=float, default=1.0)
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--out", required=True, help="trace CSV path")
    p.set_defaults(func=_cmd_simulate_rt)

    p = sub.add_parser("sweep", help="terminal affected ratio across recovery ratios")
    p.add_argument("--net", required=True)
    p.add_argument("--lcc", action="store_true")
    _add_attack_flags(p)
    p.add_argument("--ratios", default="0.05:1.0:0.05",
                   help="lo:hi:step range or comma list of mu/lambda ratios")
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--beta-mode", choices=["uniform", "degree", "capital"], default="degree")
    p.add_argument("--beta-value", type=float, default=1.0)
    p.add_argument("--recovery-mode", choices=["state", "capital"], default="state")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("experiment", help="replicated parameter-swept campaign")
    p.add_argument("--net", required=True)
    p.add_argument("--lcc", action="store_true")
    p.add_argument("--spec", required=True, help="experiment spec JSON")
    p.add_argument("--out", required=True, help="results directory")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("report", help="render a trace/sweep CSV to an SVG chart")
    p.add_argument("--input", required=True, help="trace or sweep CSV")
    p.add_argument("--title", help="chart title (default: input file name)")
    p.add_argument("--out", required=True, help="SVG path")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
