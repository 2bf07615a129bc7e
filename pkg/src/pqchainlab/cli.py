"""Command-line surface: provision PKI, run campaigns, analyze, report.

Exit codes: 0 success, 1 usage error, 2 crypto failure, 3 transport or
benchmark failure, 4 input schema mismatch.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import __version__, analytics, bench, pki, svgplot
from .analytics import SchemaError
from .bench import ScenarioFailed
from .config import AnalysisConfig, load_config
from .crypto.backend import CryptoError
from .scenario import (
    Scenario,
    enumerate_matrix,
    find_scenario,
    read_scenarios,
    write_scenarios,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CRYPTO = 2
EXIT_TRANSPORT = 3
EXIT_SCHEMA = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_seed(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        return text.encode()


def _parse_runs(text: str) -> tuple[int, Optional[int]]:
    """--runs N applies everywhere; --runs FAST/HEAVY splits by leaf family."""
    if "/" in text:
        fast, heavy = text.split("/", 1)
        return int(fast), int(heavy)
    return int(text), None


def write_manifest(path: Path, seed: bytes, scenarios: list[Scenario], policy: str, now: int) -> None:
    manifest = {
        "tool": "pqchainlab",
        "version": __version__,
        "seed_hex": seed.hex(),
        "issuance_epoch": now,
        "policy": policy,
        "scenario_ids": [s.display_id for s in scenarios],
        "created_unix": int(time.time()),
        "host": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "cpus": os.cpu_count(),
        },
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _load_matrix(path: Optional[str]) -> list[Scenario]:
    if path:
        return read_scenarios(path)
    return enumerate_matrix()


def _select(scenarios: list[Scenario], ids: list[str], campaign: Optional[str]) -> list[Scenario]:
    out = scenarios
    if campaign:
        out = [s for s in out if s.campaign == campaign]
    if ids:
        out = [find_scenario(scenarios, sid) for sid in ids]
    if not out:
        raise SystemExit(EXIT_USAGE)
    return out


# --- commands ------------------------------------------------------------


def cmd_gen_scenarios(args) -> int:
    scenarios = enumerate_matrix()
    if args.campaign:
        scenarios = [s for s in scenarios if s.campaign == args.campaign]
    write_scenarios(scenarios, args.out)
    print(f"wrote {len(scenarios)} scenarios to {args.out}")
    return EXIT_OK


def _provision_one(payload: tuple[dict, str, bytes, int]) -> str:
    scenario_dict, out_dir, seed, now = payload
    from .scenario import scenario_from_dict

    scenario = scenario_from_dict(scenario_dict)
    h = pki.build_hierarchy(scenario, seed, now=now)
    pki.write_hierarchy(h, Path(out_dir) / scenario.display_id)
    return scenario.display_id


def cmd_provision(args) -> int:
    from .scenario import scenario_to_dict

    scenarios = _select(_load_matrix(args.scenarios), args.select, args.campaign)
    seed = _parse_seed(args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payloads = [(scenario_to_dict(s), str(out_dir), seed, args.now) for s in scenarios]
    jobs = args.jobs or min(len(payloads), os.cpu_count() or 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for sid in pool.map(_provision_one, payloads):
                print(f"provisioned {sid}")
    else:
        for payload in payloads:
            print(f"provisioned {_provision_one(payload)}")
    write_manifest(out_dir / "manifest.json", seed, scenarios, policy="n/a", now=args.now)
    return EXIT_OK


def cmd_bench(args) -> int:
    scenarios = _select(_load_matrix(args.scenarios), args.select, args.campaign)
    policy = pki.ServedChainPolicy.from_label(args.policy)
    runs = runs_heavy = None
    if args.runs:
        runs, runs_heavy = _parse_runs(args.runs)
    cfg = bench.BenchConfig(
        runs=runs, runs_heavy=runs_heavy, warmup=args.warmup, policy=policy, now=args.now
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    aggregates = []
    for scenario in scenarios:
        t0 = time.perf_counter()
        samples = bench.run_scenario(scenario, args.pki, cfg)
        agg = bench.aggregate(scenario, samples)
        aggregates.append(agg)
        bench.write_samples(samples, out_dir / f"{scenario.display_id}.jsonl")
        print(
            f"{scenario.display_id}: {agg.n_runs} runs, mean {agg.mean_ms:.3f} ms, "
            f"srv/cli {agg.srv_cli_ratio:.3f} ({time.perf_counter() - t0:.1f}s)"
        )
    bench.write_master_summary(aggregates, out_dir / "master_summary.csv")
    write_manifest(
        out_dir / "manifest.json",
        _parse_seed(args.seed),
        scenarios,
        policy=args.policy,
        now=args.now,
    )
    print(f"wrote {out_dir / 'master_summary.csv'}")
    return EXIT_OK


def fixture_path() -> Path:
    return Path(str(importlib.resources.files("pqchainlab") / "fixtures" / "paper_fixture.csv"))


def _emit_plots(rows, results, out_dir: Path) -> None:
    rows = sorted(rows, key=lambda r: r.scenario_id)
    leaf_slh = [
        analytics.parse_scenario_id(r.scenario_id)[1].leaf.token == "slh" for r in rows
    ]
    svgplot.log_bar_chart(
        [r.scenario_id for r in rows],
        [r.mean_ms for r in rows],
        out_dir / "latency_by_scenario.svg",
        title="Mean handshake latency by scenario",
        y_label="mean latency (ms, log scale)",
        highlight=leaf_slh,
    )
    svgplot.loglog_scatter(
        [max(r.client_task_ms, 1e-4) for r in rows],
        [max(r.server_task_ms, 1e-4) for r in rows],
        [r.scenario_id.replace("x25519mlkem768__", "h__").replace("mlkem768__", "p__").replace("x25519__", "c__") for r in rows],
        out_dir / "client_vs_server_taskclock.svg",
        title="Client vs server task clock per handshake",
        x_label="client task clock (ms)",
        y_label="server task clock (ms)",
    )
    capacity = results["capacity"]
    svgplot.log_bar_chart(
        [c.scenario_id for c in capacity],
        [c.infrastructure_multiplier_needed for c in capacity],
        out_dir / "infrastructure_multiplier.svg",
        title="Infrastructure multiplier needed to preserve baseline throughput",
        y_label="multiplier (log scale)",
        highlight=[c.conceptual_perf_group == "leaf_slh" for c in capacity],
    )


def _analysis_input(args) -> Path:
    if getattr(args, "fixture", None):
        if args.fixture != "paper":
            raise SystemExit(EXIT_USAGE)
        return fixture_path()
    if not args.input:
        print("error: provide --input CSV or --fixture paper", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    return Path(args.input)


def cmd_analyze(args) -> int:
    rows = analytics.load_summary(_analysis_input(args))
    cfg = load_config(args.config)
    if args.baseline:
        cfg = AnalysisConfig(**{**cfg.__dict__, "baseline_id": args.baseline})
    if analytics._Rows(rows).get(cfg.baseline_id) is None:
        print(
            f"error: baseline scenario {cfg.baseline_id!r} not in input; "
            "pass --baseline with a scenario present in the results",
            file=sys.stderr,
        )
        return EXIT_USAGE
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = analytics.run_all(rows, out_dir, cfg, warn=lambda m: print(f"warning: {m}"))
    _emit_plots(rows, results, out_dir)
    print(f"wrote {len(results)} report tables and 3 plots to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = analytics.load_summary(_analysis_input(args))
    cfg = load_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = analytics.run_all(rows, out_dir, cfg, warn=lambda m: print(f"warning: {m}"))
    _emit_plots(rows, results, out_dir)
    lines = ["handshake latency and placement report", "=" * 40, ""]
    for row in sorted(rows, key=lambda r: r.mean_ms):
        lines.append(
            f"{row.scenario_id:55s} {row.mean_ms:12.4f} ms  srv/cli {row.srv_cli_ratio:10.4f}"
        )
    lines.append("")
    for p in results["plausibility"]:
        lines.append(
            f"rank {p.plausibility_rank}  {p.scenario_id:55s} {p.operational_plausibility}"
        )
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote report to {out_dir}")
    return EXIT_OK


def _check(name: str, passed: bool, detail: str) -> bool:
    print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return passed


def live_property_checks(rows) -> bool:
    """Property gates for live data (absolute reference values do not
    transfer across hardware; directions and separations must)."""
    from .scenario import SigFamily, parse_scenario_id

    by_id = {r.scenario_id: r for r in rows}
    ok = True

    pairs = analytics.campaign_a_pairs(rows)
    for pair in pairs:
        ok &= _check(
            f"regime separation ({pair.tls_group})",
            pair.latency_ratio >= 100,
            f"SLH/ML latency ratio {pair.latency_ratio:.1f} (gate >= 100)",
        )

    for row in rows:
        placement = parse_scenario_id(row.scenario_id)[1]
        if placement.leaf is SigFamily.SLH_DSA_SHAKE_192S:
            ok &= _check(
                f"server-bound ({row.scenario_id})",
                row.server_over_elapsed >= 0.9 and row.srv_cli_ratio >= 10,
                f"srv/elapsed {row.server_over_elapsed:.3f}, srv/cli {row.srv_cli_ratio:.1f}",
            )
        elif all(f is SigFamily.ML_DSA_65 for f in placement.families()):
            ok &= _check(
                f"balanced ({row.scenario_id})",
                0.5 <= row.srv_cli_ratio <= 2.0,
                f"srv/cli {row.srv_cli_ratio:.3f} (gate [0.5, 2.0])",
            )

    base = by_id.get("x25519mlkem768__ml_root__ml_int__ml_leaf")
    upper = by_id.get("x25519mlkem768__slh_root__ml_int__ml_leaf")
    if base and upper:
        ratio = upper.mean_ms / base.mean_ms
        ok &= _check("upper-layer bound", ratio <= 20, f"latency ratio {ratio:.2f} (gate <= 20)")

    d2 = by_id.get("x25519mlkem768__slh_root__ml_leaf")
    d3 = by_id.get("x25519mlkem768__slh_root__ml_int__ml_leaf")
    if d2 and d3:
        ok &= _check(
            "effective exposure direction",
            d3.bytes_read < d2.bytes_read and d3.mean_ms < d2.mean_ms,
            f"bytes {d3.bytes_read:.0f} < {d2.bytes_read:.0f}, "
            f"latency {d3.mean_ms:.2f} < {d2.mean_ms:.2f} ms",
        )
    ok &= _check(
        "mirrored chain exposure",
        all(r.chain_len_unique == 2 for r in rows),
        "chain_len_unique == 2 for all scenarios",
    )

    ces = analytics.counterexamples(rows, "bytes_read", top_k=1, min_latency_ratio=50.0)
    ok &= _check(
        "transport/crypto dissociation",
        bool(ces),
        f"best pair ratio {ces[0].latency_ratio_higher_over_lower:.1f} (gate >= 50)"
        if ces
        else "no counterexample pair with ratio >= 50",
    )
    return bool(ok)


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = load_config(None)

    print("== analytics against the shipped reference table ==")
    fixture_rows = analytics.load_summary(fixture_path())
    results = analytics.run_all(fixture_rows, out_dir / "fixture_analysis", cfg)
    pairs = {p.tls_group: p for p in results["campaignA_pairs"]}
    gates = [
        ("campaign A classical ratio", pairs["x25519"].latency_ratio, 2127.865),
        ("campaign A hybrid ratio", pairs["x25519mlkem768"].latency_ratio, 1682.137),
    ]
    ok = True
    for name, got, want in gates:
        ok &= _check(name, abs(got - want) / want <= 0.005, f"{got:.3f} vs published {want}")
    if args.fixture_only:
        return EXIT_OK if ok else EXIT_TRANSPORT

    print("== live desk-scale pipeline ==")
    scenarios = enumerate_matrix()
    seed = _parse_seed(args.seed)
    write_scenarios(scenarios, out_dir / "scenarios.json")
    pki_dir = out_dir / "pki"

    ns = argparse.Namespace(
        scenarios=str(out_dir / "scenarios.json"),
        select=[],
        campaign=None,
        seed=args.seed,
        out=str(pki_dir),
        jobs=None,
        now=args.now,
    )
    cmd_provision(ns)

    runs, runs_heavy = _parse_runs(args.runs)
    bench_cfg = bench.BenchConfig(
        runs=runs, runs_heavy=runs_heavy if runs_heavy is not None else 3, warmup=args.warmup
    )
    aggregates = []
    for scenario in scenarios:
        samples = bench.run_scenario(scenario, pki_dir, bench_cfg)
        aggregates.append(bench.aggregate(scenario, samples))
        print(f"  measured {scenario.display_id}: {aggregates[-1].mean_ms:.3f} ms mean")
    results_dir = out_dir / "results"
    results_dir.mkdir(exist_ok=True)
    bench.write_master_summary(aggregates, results_dir / "master_summary.csv")

    print("== property gates over live data ==")
    ok &= live_property_checks(aggregates)

    print("== determinism spot-check ==")
    probe = find_scenario(scenarios, "x25519mlkem768__ml_root__ml_int__ml_leaf")
    h1 = pki.build_hierarchy(probe, seed, now=args.now)
    h2 = pki.build_hierarchy(probe, seed, now=args.now)
    ok &= _check(
        "re-provision byte identity",
        all(a.encoded == b.encoded for a, b in zip(h1.certificates(), h2.certificates())),
        "certificate bytes identical for identical seed",
    )

    analytics.run_all(
        analytics.load_summary(results_dir / "master_summary.csv"), out_dir / "analysis", cfg
    )
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_TRANSPORT


def build_parser() -> _Parser:
    parser = _Parser(prog="pqchainlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pqchainlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenarios", help="write the experiment inventory")
    p.add_argument("--out", default="scenarios.json")
    p.add_argument("--campaign", choices=["A", "B", "C", "D"])
    p.set_defaults(func=cmd_gen_scenarios)

    p = sub.add_parser("provision", help="generate keys and certificates")
    p.add_argument("--scenarios", help="scenarios.json (defaults to the built-in inventory)")
    p.add_argument("--select", nargs="*", default=[], help="scenario ids to provision")
    p.add_argument("--campaign", choices=["A", "B", "C", "D"])
    p.add_argument("--seed", default="706b692d6c6162", help="hex (or raw) provisioning seed")
    p.add_argument("--out", default="pki")
    p.add_argument("--jobs", type=int, help="parallel workers (default: cpu count)")
    p.add_argument("--now", type=int, default=pki.DEFAULT_NOW, help="issuance epoch seconds")
    p.set_defaults(func=cmd_provision)

    p = sub.add_parser("bench", help="run measurement campaigns")
    p.add_argument("--scenarios")
    p.add_argument("--select", nargs="*", default=[])
    p.add_argument("--campaign", choices=["A", "B", "C", "D"])
    p.add_argument("--pki", default="pki")
    p.add_argument("--out", default="results")
    p.add_argument("--runs", help="override run counts: N or FAST/HEAVY (e.g. 50/20)")
    p.add_argument("--warmup", type=int, help="warmup connections to discard")
    p.add_argument("--policy", choices=["mirror", "full", "leaf"], default="mirror")
    p.add_argument("--seed", default="706b692d6c6162")
    p.add_argument("--now", type=int, default=pki.DEFAULT_NOW)
    p.set_defaults(func=cmd_bench)

    for name, func in (("analyze", cmd_analyze), ("report", cmd_report)):
        p = sub.add_parser(name, help=f"{name} results or the shipped reference table")
        p.add_argument("--input", help="master_summary.csv from a bench run")
        p.add_argument("--fixture", choices=["paper"], help="use the shipped reference table")
        p.add_argument("--out", default="analysis" if name == "analyze" else "report")
        p.add_argument("--config", help="key=value analysis config file")
        p.add_argument("--baseline", help="baseline scenario id override")
        p.set_defaults(func=func)

    p = sub.add_parser("reproduce", help="end-to-end desk-scale pipeline with PASS/FAIL gates")
    p.add_argument("--out", default="reproduce")
    p.add_argument("--fixture-only", action="store_true", help="skip the live bench stage")
    p.add_argument("--runs", default="40/3", help="desk-scale run counts FAST/HEAVY")
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--seed", default="706b692d6c6162")
    p.add_argument("--now", type=int, default=pki.DEFAULT_NOW)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    workdir = os.environ.get("PQCHAINLAB_DIR")
    if workdir:
        Path(workdir).mkdir(parents=True, exist_ok=True)
        os.chdir(workdir)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except CryptoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except (ScenarioFailed, ConnectionError, TimeoutError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
