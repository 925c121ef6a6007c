"""Experiment harness: sweep matrices, per-cell seeding, CSV emission.

A matrix is the cross product of algorithms, bottleneck buffer sizes,
packet error rates and repetitions. Every cell derives its own seed from
the base seed and the cell key, so adding repetitions or reordering cells
never perturbs the random stream of any other cell, and rerunning a
single cell reproduces it exactly.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .baselines import cubic_window, CubicParams
from .metrics import SummaryStats, report_from_trace, summarize
from .netsim import FlowSchedule, Link, RunTrace, ScenarioConfig, run_scenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ExperimentMatrix",
    "ResultRow",
    "CellSummary",
    "MatrixResult",
    "load_config",
    "build_cell_config",
    "cell_seed",
    "run_matrix",
    "emit",
    "epoch_rounds",
]

SCENARIO_KINDS = ("single", "sequential", "synchronous")

# How floats are rendered in every CSV: 12 significant digits round-trip
# cleanly for the magnitudes produced here.
FLOAT_FMT = "{:.12g}"


def _fmt(x) -> str:
    if isinstance(x, float):
        return FLOAT_FMT.format(x)
    return str(x)


@dataclass
class ExperimentMatrix:
    """Sweep definition: cells = cca_set x buffer_sizes x pers x reps.

    ``base`` supplies links, duration, packet size and trace settings;
    its flows and bottleneck buffer/per are replaced per cell. ``scale``
    divides the bottleneck rate and every buffer size together, which
    preserves buffer-to-BDP ratios while shrinking runtimes. Access links
    are left unscaled so the bottleneck stays the only constriction. A
    cca_set entry may name two algorithms joined by '+', which splits the
    flows between them for inter-protocol fairness cells.
    """

    base: ScenarioConfig
    cca_set: list
    buffer_sizes: list
    pers: list
    repetitions: int
    seed_base: int = 1
    scenario: str = "single"
    flow_count: int = 1
    stagger: float = 5.0
    scale: float = 1.0

    def validate(self) -> None:
        if self.scenario not in SCENARIO_KINDS:
            raise ValueError(
                f"scenario must be one of {SCENARIO_KINDS}, got {self.scenario!r}"
            )
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.flow_count < 1:
            raise ValueError("flow_count must be >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not self.cca_set or not self.buffer_sizes or not self.pers:
            raise ValueError("cca_set, buffer_sizes and pers must be non-empty")
        for b in self.buffer_sizes:
            if b < 1:
                raise ValueError(f"buffer size must be >= 1 packet, got {b}")
        for p in self.pers:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"per must be in [0, 1], got {p}")
        if self.stagger < 0:
            raise ValueError("stagger must be >= 0")


def cell_seed(seed_base: int, cca: str, buffer_pkts: int, per: float, rep: int) -> int:
    """Deterministic per-cell seed: base xor a stable hash of the key."""
    key = f"{cca}|{buffer_pkts}|{per!r}|{rep}".encode()
    digest = hashlib.sha256(key).digest()
    return seed_base ^ int.from_bytes(digest[:8], "big")


def _cell_flows(matrix: ExperimentMatrix, cca: str) -> list:
    """Build the flow schedules for one cell."""
    names = cca.split("+")
    n = 1 if matrix.scenario == "single" else matrix.flow_count
    duration = matrix.base.duration
    flows = []
    for i in range(n):
        name = names[i * len(names) // n] if len(names) > 1 else names[0]
        if matrix.scenario == "sequential":
            start = i * matrix.stagger
            stop = duration - (n - 1 - i) * matrix.stagger
            if stop <= start:
                raise ValueError(
                    "sequential stagger leaves no active window for flow "
                    f"{i}: start={start} stop={stop}"
                )
        else:
            start, stop = 0.0, duration
        flows.append(FlowSchedule(flow_id=i, cca=name, start=start, stop=stop))
    return flows


def build_cell_config(
    matrix: ExperimentMatrix, cca: str, buffer_pkts: int, per: float, rep: int
) -> ScenarioConfig:
    """Materialize the scenario for one (cca, buffer, per, rep) cell."""
    scaled_buffer = max(1, round(buffer_pkts / matrix.scale))
    bottleneck = replace(
        matrix.base.bottleneck,
        rate=matrix.base.bottleneck.rate / matrix.scale,
        queue_capacity=scaled_buffer,
        per=per,
    )
    return replace(
        matrix.base,
        bottleneck=bottleneck,
        flows=_cell_flows(matrix, cca),
        seed=cell_seed(matrix.seed_base, cca, buffer_pkts, per, rep),
    )


@dataclass
class ResultRow:
    """One repetition of one cell."""

    cca: str
    scenario: str
    buffer_pkts: int
    per: float
    rep: int
    seed: int
    throughput_bps: float
    loss_ratio: float
    jfi_intra: float
    jfi_rtt: float
    sent: int
    recv: int
    qdrop: int
    edrop: int
    timeouts: int
    trace: RunTrace = field(default=None, repr=False, compare=False)

    CSV_FIELDS = (
        "cca",
        "scenario",
        "buffer_pkts",
        "per",
        "rep",
        "seed",
        "throughput_bps",
        "loss_ratio",
        "jfi_intra",
        "jfi_rtt",
        "sent",
        "recv",
        "qdrop",
        "edrop",
        "timeouts",
    )


@dataclass
class CellSummary:
    """Across-repetition statistics for one cell."""

    cca: str
    scenario: str
    buffer_pkts: int
    per: float
    n: int
    throughput: SummaryStats
    loss_ratio: SummaryStats
    jfi_intra: SummaryStats
    jfi_rtt: SummaryStats


@dataclass
class MatrixResult:
    rows: list
    summaries: list
    failures: list


def _run_cell(args):
    matrix, cca, buffer_pkts, per, rep, keep_trace = args
    cfg = build_cell_config(matrix, cca, buffer_pkts, per, rep)
    trace = run_scenario(cfg)
    trace.conservation_check()
    report = report_from_trace(trace)
    counters = trace.flows.values()
    return ResultRow(
        cca=cca,
        scenario=matrix.scenario,
        buffer_pkts=buffer_pkts,
        per=per,
        rep=rep,
        seed=cfg.seed,
        throughput_bps=report.system_throughput_bps,
        loss_ratio=report.loss_ratio,
        jfi_intra=report.jfi_intra,
        jfi_rtt=report.jfi_rtt,
        sent=sum(c.sent for c in counters),
        recv=sum(c.recv for c in counters),
        qdrop=sum(c.qdrop for c in counters),
        edrop=sum(c.edrop for c in counters),
        timeouts=sum(c.timeouts for c in counters),
        trace=trace if keep_trace else None,
    )


def _single_stat(values) -> SummaryStats:
    if len(values) >= 2:
        return summarize(values)
    v = float(values[0])
    nan = float("nan")
    return SummaryStats(n=1, mean=v, sd=nan, se=nan, ci_lo=nan, ci_hi=nan)


def run_matrix(
    matrix: ExperimentMatrix, workers: int = 1, keep_traces: bool = True
) -> MatrixResult:
    """Run every cell; failures are recorded per cell, not raised.

    Cells are independent, so ``workers > 1`` fans them out over
    processes; results come back in canonical (cca, buffer, per, rep)
    order either way.
    """
    matrix.validate()
    matrix.base.validate()
    cells = [
        (matrix, cca, b, per, rep, keep_traces)
        for cca in matrix.cca_set
        for b in matrix.buffer_sizes
        for per in matrix.pers
        for rep in range(matrix.repetitions)
    ]
    rows = []
    failures = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = pool.map(_run_cell_safe, cells)
            for cell, outcome in zip(cells, outcomes):
                _collect(cell, outcome, rows, failures)
    else:
        for cell in cells:
            _collect(cell, _run_cell_safe(cell), rows, failures)
    rows.sort(key=lambda r: (r.cca, r.buffer_pkts, r.per, r.rep))
    summaries = _summarize_cells(matrix, rows)
    return MatrixResult(rows=rows, summaries=summaries, failures=failures)


def _run_cell_safe(cell):
    try:
        return _run_cell(cell)
    except Exception as exc:  # deliberate: isolate cell failures
        return exc


def _collect(cell, outcome, rows, failures) -> None:
    _, cca, b, per, rep, _ = cell
    if isinstance(outcome, Exception):
        failures.append(
            {"cca": cca, "buffer_pkts": b, "per": per, "rep": rep,
             "error": f"{type(outcome).__name__}: {outcome}"}
        )
    else:
        rows.append(outcome)


def _summarize_cells(matrix: ExperimentMatrix, rows) -> list:
    cells = {}
    for r in rows:
        cells.setdefault((r.cca, r.buffer_pkts, r.per), []).append(r)
    summaries = []
    for (cca, b, per), cell_rows in sorted(cells.items()):
        summaries.append(
            CellSummary(
                cca=cca,
                scenario=matrix.scenario,
                buffer_pkts=b,
                per=per,
                n=len(cell_rows),
                throughput=_single_stat([r.throughput_bps for r in cell_rows]),
                loss_ratio=_single_stat([r.loss_ratio for r in cell_rows]),
                jfi_intra=_single_stat([r.jfi_intra for r in cell_rows]),
                jfi_rtt=_single_stat([r.jfi_rtt for r in cell_rows]),
            )
        )
    return summaries


# ------------------------------------------------------------ emission

def _cell_label(cca: str, buffer_pkts: int, per: float) -> str:
    per_part = FLOAT_FMT.format(per).replace("-", "m").replace("+", "")
    return f"{cca}_b{buffer_pkts}_p{per_part}"


def emit(result: MatrixResult, out_dir: str, matrix: ExperimentMatrix = None) -> None:
    """Write runs.csv, summary.csv, per-run traces and a manifest."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "runs.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ResultRow.CSV_FIELDS)
        for r in result.rows:
            w.writerow([_fmt(getattr(r, f)) for f in ResultRow.CSV_FIELDS])
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["cca", "scenario", "buffer_pkts", "per", "n"]
        for metric in ("throughput", "loss_ratio", "jfi_intra", "jfi_rtt"):
            header += [
                f"{metric}_{part}" for part in ("mean", "sd", "se", "ci_lo", "ci_hi")
            ]
        w.writerow(header)
        for s in result.summaries:
            row = [s.cca, s.scenario, s.buffer_pkts, _fmt(s.per), s.n]
            for metric in (s.throughput, s.loss_ratio, s.jfi_intra, s.jfi_rtt):
                row += [
                    _fmt(metric.mean),
                    _fmt(metric.sd),
                    _fmt(metric.se),
                    _fmt(metric.ci_lo),
                    _fmt(metric.ci_hi),
                ]
            w.writerow(row)
    for r in result.rows:
        if r.trace is not None:
            name = f"trace_{_cell_label(r.cca, r.buffer_pkts, r.per)}_{r.rep}.csv"
            r.trace.to_csv(os.path.join(out_dir, name))
    manifest = {
        "format": 1,
        "rows": len(result.rows),
        "failures": result.failures,
        "cells": [
            {
                "cca": r.cca,
                "buffer_pkts": r.buffer_pkts,
                "per": r.per,
                "rep": r.rep,
                "seed": r.seed,
            }
            for r in result.rows
        ],
    }
    if matrix is not None:
        manifest["matrix"] = {
            "cca_set": list(matrix.cca_set),
            "buffer_sizes": list(matrix.buffer_sizes),
            "pers": list(matrix.pers),
            "repetitions": matrix.repetitions,
            "seed_base": matrix.seed_base,
            "scenario": matrix.scenario,
            "flow_count": matrix.flow_count,
            "stagger": matrix.stagger,
            "scale": matrix.scale,
            "duration": matrix.base.duration,
            "packet_size": matrix.base.packet_size,
            "bottleneck_rate_bps": matrix.base.bottleneck.rate,
            "bottleneck_delay_s": matrix.base.bottleneck.prop_delay,
            "access_rate_bps": matrix.base.access.rate,
            "access_delay_s": matrix.base.access.prop_delay,
        }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------- config files

_SCENARIO_KEYS = {
    "kind", "flow_count", "cca", "duration_s", "packet_size_bytes",
    "seed", "scale", "stagger_s", "max_cwnd_pkts", "trace_interval_s",
}
_LINK_KEYS = {
    "access_rate_bps", "access_delay_s",
    "bottleneck_rate_bps", "bottleneck_delay_s",
}
_MATRIX_KEYS = {"ccas", "buffer_pkts", "per", "repetitions", "seed_base"}


def load_config(path: str) -> ExperimentMatrix:
    """Parse a TOML experiment description into an ExperimentMatrix.

    Unknown keys are rejected by name so typos fail loudly instead of
    silently running defaults.
    """
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    for section in raw:
        if section not in ("scenario", "links", "matrix"):
            raise ValueError(f"unknown config section [{section}] in {path}")
    scenario = raw.get("scenario", {})
    links = raw.get("links", {})
    matrix = raw.get("matrix", {})
    for name, table, allowed in (
        ("scenario", scenario, _SCENARIO_KEYS),
        ("links", links, _LINK_KEYS),
        ("matrix", matrix, _MATRIX_KEYS),
    ):
        for key in table:
            if key not in allowed:
                raise ValueError(
                    f"unknown key {key!r} in [{name}] of {path}; "
                    f"allowed: {sorted(allowed)}"
                )
    access = Link(
        rate=float(links.get("access_rate_bps", 1e9)),
        prop_delay=float(links.get("access_delay_s", 0.0005)),
    )
    bottleneck = Link(
        rate=float(links.get("bottleneck_rate_bps", 1e9)),
        prop_delay=float(links.get("bottleneck_delay_s", 0.05)),
        queue_capacity=1,  # per-cell values override this placeholder
    )
    base = ScenarioConfig(
        bottleneck=bottleneck,
        access=access,
        flows=[FlowSchedule(flow_id=0, cca="elastic")],
        duration=float(scenario.get("duration_s", 100.0)),
        packet_size=int(scenario.get("packet_size_bytes", 1000)),
        max_cwnd=scenario.get("max_cwnd_pkts"),
        trace_interval=float(scenario.get("trace_interval_s", 0.1)),
    )
    ccas = matrix.get("ccas", ["elastic", "newreno", "cubic", "ctcp", "agile"])
    if isinstance(ccas, str):
        ccas = [ccas]
    cca_override = scenario.get("cca")
    if cca_override:
        ccas = [cca_override] if isinstance(cca_override, str) else list(cca_override)
    m = ExperimentMatrix(
        base=base,
        cca_set=[str(c) for c in ccas],
        buffer_sizes=[int(b) for b in matrix.get("buffer_pkts", [50])],
        pers=[float(p) for p in matrix.get("per", [0.0])],
        repetitions=int(matrix.get("repetitions", 1)),
        seed_base=int(matrix.get("seed_base", scenario.get("seed", 1))),
        scenario=str(scenario.get("kind", "single")),
        flow_count=int(scenario.get("flow_count", 1)),
        stagger=float(scenario.get("stagger_s", 5.0)),
        scale=float(scenario.get("scale", 1.0)),
    )
    m.validate()
    return m


# ------------------------------------------------------- epoch oracles

def epoch_rounds(
    cca: str,
    wmax: float,
    beta: float = 0.5,
    rtt: float = 0.1,
    alpha: float = 1.0,
    c_const: float = 0.4,
    lambda_max: float = 3.0,
    gain_alpha: float = 0.125,
    gain_exp: float = 0.8,
) -> int:
    """Brute-force rounds for one recovery epoch, beta*wmax -> wmax.

    Each algorithm's per-RTT growth rule is iterated directly: NewReno
    adds alpha, Elastic adds sqrt(w) (its floor, with rtt_current equal
    to rtt_max), Agile-SD adds its lambda, C-TCP adds the loss component
    plus the binomial delay gain, and Cubic advances its time curve one
    RTT per round.
    """
    if wmax <= 2 or not 0.0 < beta < 1.0:
        raise ValueError(f"need wmax > 2 and beta in (0, 1), got {wmax}, {beta}")
    w = beta * wmax
    rounds = 0
    guard = 100_000_000
    if cca == "cubic":
        params = CubicParams(
            c_const=c_const, cubic_beta=1.0 - beta, w_max=wmax, t_last_loss=0.0
        )
        while cubic_window(params, rounds * rtt) < wmax:
            rounds += 1
            if rounds > guard:
                raise RuntimeError("epoch iteration did not converge")
        return rounds
    while w < wmax:
        if cca in ("newreno", "reno"):
            w += alpha
        elif cca == "elastic":
            w += math.sqrt(w)
        elif cca == "agile":
            span = wmax - beta * wmax
            progress = min(max((w - beta * wmax) / span, 0.0), 1.0)
            lam = min(max(lambda_max * (1.0 - progress), 1.0), lambda_max)
            w += lam
        elif cca == "ctcp":
            w += 1.0 + max(0.0, gain_alpha * w ** gain_exp - 1.0)
        else:
            raise ValueError(f"no epoch oracle for cca {cca!r}")
        rounds += 1
        if rounds > guard:
            raise RuntimeError("epoch iteration did not converge")
    return rounds
