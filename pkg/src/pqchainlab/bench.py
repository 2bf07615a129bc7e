"""Measurement campaigns: fresh-connection runs, CPU capture, aggregation.

The runner forks one server process per scenario so that client and
server CPU attribution never share an interpreter.  Each run opens a
fresh TCP connection; the client clock starts before ``connect`` and
stops after ClientFinished is written.  The server reports per-connection
thread CPU time over a line-delimited JSON control channel.  Exactly one
handshake is in flight at any moment.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing
import os
import socket
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from . import handshake as hs
from . import pki
from .scenario import Scenario, SigFamily

CSV_COLUMNS = [
    "scenario_id",
    "kex_mode",
    "depth",
    "campaign",
    "n_runs",
    "mean_ms",
    "p95_ms",
    "bytes_read",
    "bytes_written",
    "chain_len_unique",
    "chain_bytes_unique",
    "served_chain_der_bytes",
    "client_task_ms",
    "server_task_ms",
    "client_over_elapsed",
    "server_over_elapsed",
    "srv_cli_ratio",
]

_FLOAT_COLUMNS = {
    "mean_ms",
    "p95_ms",
    "bytes_read",
    "bytes_written",
    "client_task_ms",
    "server_task_ms",
    "client_over_elapsed",
    "server_over_elapsed",
    "srv_cli_ratio",
}


class ScenarioFailed(Exception):
    """A handshake failed mid-campaign; the scenario's data is discarded."""


_tick_cache: Optional[float] = None


def thread_clock_tick_ms() -> float:
    """Measured granularity of the thread CPU clock.

    Some kernels account thread CPU time in scheduler ticks (10ms here),
    so a sub-tick handshake reads 0 or one full tick.  Per-run CPU values
    are therefore quantized; means over a campaign remain unbiased.  The
    sample sanity check ``cpu <= elapsed * 1.05 + tick`` uses this value.
    """
    global _tick_cache
    if _tick_cache is None:
        increments = set()
        prev = time.thread_time_ns()
        deadline = time.perf_counter_ns() + 30_000_000
        while time.perf_counter_ns() < deadline and len(increments) < 4:
            cur = time.thread_time_ns()
            if cur != prev:
                increments.add(cur - prev)
                prev = cur
        finest = min(increments) if increments else 0
        _tick_cache = finest / 1e6 if finest >= 1_000_000 else 0.0
    return _tick_cache


def check_sample_sanity(sample: "HandshakeSample") -> None:
    """Sequential design: client CPU cannot exceed wall time (plus clock tick)."""
    allowance = sample.elapsed_ms * 1.05 + thread_clock_tick_ms()
    if sample.client_cpu_ms > allowance:
        raise ScenarioFailed(
            f"client CPU {sample.client_cpu_ms:.3f}ms exceeds elapsed "
            f"{sample.elapsed_ms:.3f}ms beyond clock tolerance"
        )


@dataclass(frozen=True)
class HandshakeSample:
    run_index: int
    elapsed_ms: float
    bytes_read: int
    bytes_written: int
    chain_len_unique: int
    chain_bytes_unique: int
    served_chain_der_bytes: int
    client_cpu_ms: float
    server_cpu_ms: float


@dataclass(frozen=True)
class RunAggregate:
    scenario_id: str
    kex_mode: str
    depth: int
    campaign: str
    n_runs: int
    mean_ms: float
    p95_ms: float
    bytes_read: float
    bytes_written: float
    chain_len_unique: int
    chain_bytes_unique: int
    served_chain_der_bytes: int
    client_task_ms: float
    server_task_ms: float
    client_over_elapsed: float
    server_over_elapsed: float
    srv_cli_ratio: float


@dataclass
class BenchConfig:
    runs: Optional[int] = None  # None: use the scenario's inventory count
    runs_heavy: Optional[int] = None  # separate override for SLH-leaf scenarios
    warmup: Optional[int] = None
    policy: pki.ServedChainPolicy = pki.ServedChainPolicy.MIRROR
    host: str = "127.0.0.1"
    now: int = pki.DEFAULT_NOW
    connect_timeout: float = 30.0


def _runs_for(scenario: Scenario, cfg: BenchConfig) -> tuple[int, int]:
    heavy = scenario.placement.leaf is SigFamily.SLH_DSA_SHAKE_192S
    runs = cfg.runs if cfg.runs is not None else scenario.runs
    if heavy and cfg.runs_heavy is not None:
        runs = cfg.runs_heavy
    warmup = cfg.warmup if cfg.warmup is not None else scenario.warmup_runs
    return runs, warmup


def percentile_nearest_rank(values: list[float], q: float) -> float:
    """Nearest-rank percentile: sorted ascending, index ceil(q*n) - 1."""
    if not values:
        raise ValueError("no samples")
    ordered = sorted(values)
    rank = max(1, -(-len(ordered) * q // 1))  # ceil
    return ordered[int(rank) - 1]


def aggregate(scenario: Scenario, samples: list[HandshakeSample]) -> RunAggregate:
    """Collapse per-run samples into one master-summary row."""
    if not samples:
        raise ValueError("cannot aggregate zero samples")
    n = len(samples)
    elapsed = [s.elapsed_ms for s in samples]
    mean_ms = sum(elapsed) / n
    client_ms = sum(s.client_cpu_ms for s in samples) / n
    server_ms = sum(s.server_cpu_ms for s in samples) / n
    if client_ms > 0:
        ratio = server_ms / client_ms
    else:
        # client stayed below the CPU clock's tick floor for the whole
        # campaign; the decomposition is then server-everything
        ratio = float("inf") if server_ms > 0 else 0.0
    chain_lens = {s.chain_len_unique for s in samples}
    chain_bytes = {s.chain_bytes_unique for s in samples}
    der_bytes = {s.served_chain_der_bytes for s in samples}
    if len(chain_lens) != 1 or len(chain_bytes) != 1 or len(der_bytes) != 1:
        raise ScenarioFailed(f"{scenario.display_id}: chain observations varied across runs")
    return RunAggregate(
        scenario_id=scenario.display_id,
        kex_mode=scenario.kex.name.lower(),
        depth=scenario.depth,
        campaign=scenario.campaign,
        n_runs=n,
        mean_ms=mean_ms,
        p95_ms=percentile_nearest_rank(elapsed, 0.95),
        bytes_read=sum(s.bytes_read for s in samples) / n,
        bytes_written=sum(s.bytes_written for s in samples) / n,
        chain_len_unique=chain_lens.pop(),
        chain_bytes_unique=chain_bytes.pop(),
        served_chain_der_bytes=der_bytes.pop(),
        client_task_ms=client_ms,
        server_task_ms=server_ms,
        client_over_elapsed=client_ms / mean_ms if mean_ms else 0.0,
        server_over_elapsed=server_ms / mean_ms if mean_ms else 0.0,
        srv_cli_ratio=ratio,
    )


def _listen(host: str) -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, 0))
    sock.listen(8)
    return sock


def run_scenario(
    scenario: Scenario, pki_dir: Path | str, cfg: Optional[BenchConfig] = None
) -> list[HandshakeSample]:
    """Execute one scenario's campaign and return post-warmup samples."""
    cfg = cfg or BenchConfig()
    runs, warmup = _runs_for(scenario, cfg)
    total = runs + warmup
    scenario_dir = Path(pki_dir) / scenario.display_id
    if not (scenario_dir / "leaf.cert").exists():
        raise ScenarioFailed(f"{scenario.display_id}: not provisioned under {pki_dir}")
    hierarchy = pki.load_hierarchy(scenario_dir)
    trust = pki.client_trust_store(hierarchy, cfg.policy)

    listener = _listen(cfg.host)
    control_listener = _listen(cfg.host)
    data_port = listener.getsockname()[1]
    ctrl_port = control_listener.getsockname()[1]

    ctx = multiprocessing.get_context("fork")
    server = ctx.Process(
        target=hs.serve_scenario_process,
        args=(
            listener,
            control_listener,
            str(scenario_dir),
            scenario.kex.tls_group_label,
            cfg.policy.value,
            total,
        ),
        daemon=True,
    )
    server.start()
    listener.close()
    control_listener.close()

    samples: list[HandshakeSample] = []
    control = socket.create_connection((cfg.host, ctrl_port), timeout=cfg.connect_timeout)
    ctrl_file = control.makefile("r")
    try:
        for i in range(total):
            t0 = time.perf_counter_ns()
            cpu0 = time.thread_time_ns()
            try:
                sock = socket.create_connection(
                    (cfg.host, data_port), timeout=cfg.connect_timeout
                )
                with sock:
                    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                    result = hs.client_handshake(sock, scenario.kex, trust, now=cfg.now)
                    client_cpu_ms = (time.thread_time_ns() - cpu0) / 1e6
                    elapsed_ms = (time.perf_counter_ns() - t0) / 1e6
            except (hs.HandshakeError, OSError) as exc:
                raise ScenarioFailed(
                    f"{scenario.display_id}: run {i} failed: {exc}"
                ) from exc
            line = ctrl_file.readline()
            if not line:
                raise ScenarioFailed(f"{scenario.display_id}: control channel closed early")
            record = json.loads(line)
            if "error" in record:
                raise ScenarioFailed(
                    f"{scenario.display_id}: server-side failure: {record['error']}"
                )
            if record["connection_index"] != i:
                raise ScenarioFailed(
                    f"{scenario.display_id}: connection ordering violated "
                    f"({record['connection_index']} != {i})"
                )
            if i < warmup:
                continue
            sample = HandshakeSample(
                run_index=i - warmup,
                elapsed_ms=elapsed_ms,
                bytes_read=result.bytes_read,
                bytes_written=result.bytes_written,
                chain_len_unique=result.observation.chain_len_unique,
                chain_bytes_unique=result.observation.chain_bytes_unique,
                served_chain_der_bytes=result.observation.served_chain_der_bytes,
                client_cpu_ms=client_cpu_ms,
                server_cpu_ms=record["server_cpu_ms"],
            )
            check_sample_sanity(sample)
            samples.append(sample)
    finally:
        ctrl_file.close()
        control.close()
        server.terminate()
        server.join(timeout=10)
    return samples


# --- result files --------------------------------------------------------


def write_samples(samples: list[HandshakeSample], path: Path | str) -> None:
    with open(path, "w") as f:
        for s in samples:
            f.write(json.dumps(asdict(s)) + "\n")


def read_samples(path: Path | str) -> list[HandshakeSample]:
    out = []
    with open(path) as f:
        for line in f:
            out.append(HandshakeSample(**json.loads(line)))
    return out


def format_value(column: str, value) -> str:
    if column in _FLOAT_COLUMNS:
        return f"{value:.4f}"
    return str(value)


def write_master_summary(aggregates: list[RunAggregate], path: Path | str) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for agg in aggregates:
        row = asdict(agg)
        writer.writerow([format_value(col, row[col]) for col in CSV_COLUMNS])
    Path(path).write_text(buf.getvalue())


def read_master_summary(path: Path | str) -> list[RunAggregate]:
    rows = []
    with open(path, newline="") as f:
        for record in csv.DictReader(f):
            kwargs = {}
            for field in fields(RunAggregate):
                raw = record[field.name]
                if field.type == "int":
                    kwargs[field.name] = int(float(raw))
                elif field.type == "float":
                    kwargs[field.name] = float(raw)
                else:
                    kwargs[field.name] = raw
            rows.append(RunAggregate(**kwargs))
    return rows
