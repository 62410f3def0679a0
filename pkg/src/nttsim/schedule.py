"""Two-phase access scheduling for the banked butterfly pipeline.

A transform runs log2(N) stages over an n x n memory (n = sqrt(N)). The
first half of the stages pairs coefficients across rows; reading one
logical column per cycle touches every bank exactly once because of the
shifted placement, and each round is exactly one radix-2 block.
Past stage log2(N)/2 the pairs fall inside single rows, so the stages
read row by row. The inverse transform replays the same stages in
reverse order. Every butterfly writes its outputs back to the cells it
read.

At full rate (Npe = n/2) one cycle consumes n coefficients from n
distinct banks. With fewer butterfly units each full-rate cycle splits
into n/(2*Npe) issue cycles; any contiguous slice of the pair order
still hits distinct banks, so the port guarantees survive the split.

check_raw_bound evaluates the read-after-write safety margin: the
tightest producer-consumer distance in this schedule is
(n/2) * (n/(2*Npe)) issue cycles, so the pipeline is stall-free exactly
when its total depth is strictly below that.
"""

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, List, NamedTuple, Optional, Tuple

from nttsim.layout import LayoutMap, make_layout

OP_KINDS = ("ntt", "intt", "mult")

Cell = Tuple[int, int]  # (bank, address)


@dataclass(frozen=True)
class PipelineConfig:
    """Stage depths of the memory path and the butterfly datapath.

    The inverse-mode butterfly is one cycle deeper than the forward one
    (the halving step), so only the forward depth is stored.
    """

    delay_read: int
    delay_write: int
    delay_pe_ntt: int
    delay_pe_mult: int

    def __post_init__(self):
        for name in ("delay_read", "delay_write", "delay_pe_ntt", "delay_pe_mult"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def delay_pe(self, op_kind: str) -> int:
        if op_kind == "ntt":
            return self.delay_pe_ntt
        if op_kind == "intt":
            return self.delay_pe_ntt + 1
        if op_kind == "mult":
            return self.delay_pe_mult
        raise ValueError(f"unknown op kind {op_kind!r}")

    def total_delay(self, op_kind: str) -> int:
        return self.delay_read + self.delay_write + self.delay_pe(op_kind)


PROFILES = {
    # 32-bit path: totals 19/20/18 over the ideal issue count
    "q32": PipelineConfig(delay_read=2, delay_write=2, delay_pe_ntt=15, delay_pe_mult=14),
    # 14-bit path: shallower multiplier, total 15 for the forward transform
    "q14": PipelineConfig(delay_read=2, delay_write=2, delay_pe_ntt=11, delay_pe_mult=10),
    "ideal": PipelineConfig(delay_read=0, delay_write=0, delay_pe_ntt=0, delay_pe_mult=0),
}


class Record(NamedTuple):
    """One butterfly (or one modular multiply) issued in one cycle."""

    pe: int
    stage: int
    rnd: int
    r0: Cell
    r1: Cell
    w0: Cell
    w1: Optional[Cell]
    tw: int


@dataclass(frozen=True)
class ScheduleTrace:
    """Per-issue-cycle access lists for one operation."""

    op_kind: str
    N: int
    n: int
    npe: int
    layout_kind: str
    cycles: List[List[Record]]

    @property
    def issue_cycles(self) -> int:
        return len(self.cycles)


def validate_geometry(n_total: int, npe: int) -> int:
    bits = n_total.bit_length() - 1
    if n_total < 16 or n_total & (n_total - 1) or bits % 2:
        raise ValueError(
            f"N={n_total} unsupported: the schedule needs a power of two "
            "with even log2 and N >= 16"
        )
    n = 1 << (bits // 2)
    if npe < 1 or npe & (npe - 1) or npe > n // 2:
        raise ValueError(f"Npe={npe} must be a power of two in [1, n/2={n // 2}]")
    return n


def _stage_fullrate_pairs(n_total: int, n: int, s: int):
    """Yield one full-rate cycle at a time: [(i0, i1, round), ...].

    Pairs are ordered segment-major (phase 0) or block-major (phase 1);
    any contiguous slice of Npe pairs reads 2*Npe distinct banks.
    """
    k = n_total.bit_length() - 1
    gap = n_total >> (s + 1)
    if s < k // 2:
        # phase 0: each round r covers indices [r*N/2^s, (r+1)*N/2^s);
        # one cycle reads 2^s column segments offset by n/2^s rows
        rows_per_round = n >> s
        half = rows_per_round // 2
        segments = 1 << s
        for r in range(segments):
            for t in range(rows_per_round):
                pairs = []
                for j in range(segments):
                    col = t + j * rows_per_round
                    for a in range(half):
                        i0 = (r * rows_per_round + a) * n + col
                        pairs.append((i0, i0 + gap, r))
                yield pairs
    else:
        # phase 1: pairs sit inside single rows; read row by row
        block = 2 * gap
        blocks_per_row = n // block
        for row in range(n):
            pairs = []
            for beta in range(blocks_per_row):
                rnd = row * blocks_per_row + beta
                base = row * n + beta * block
                for o in range(gap):
                    pairs.append((base + o, base + o + gap, rnd))
            yield pairs


def _cell(layout: LayoutMap, i: int) -> Cell:
    addr, bank = layout.place(i)
    return (bank, addr)


def build_schedule(
    n_total: int, npe: int, op_kind: str, layout_kind: str = "shifted"
) -> ScheduleTrace:
    """Materialize the per-cycle (bank, address) access trace."""
    if op_kind not in OP_KINDS:
        raise ValueError(f"unknown op kind {op_kind!r}; expected one of {OP_KINDS}")
    n = validate_geometry(n_total, npe)
    layout = make_layout(n_total, layout_kind)
    cycles: List[List[Record]] = []
    if op_kind == "mult":
        for base in range(0, n_total, npe):
            recs = []
            for pe in range(npe):
                i = base + pe
                cell = _cell(layout, i)
                recs.append(Record(pe, 0, i // n, cell, cell, cell, None, -1))
            cycles.append(recs)
        return ScheduleTrace(op_kind, n_total, n, npe, layout_kind, cycles)

    k = n_total.bit_length() - 1
    stage_order = range(k) if op_kind == "ntt" else range(k - 1, -1, -1)
    for s in stage_order:
        tw_base = 1 << s
        for pairs in _stage_fullrate_pairs(n_total, n, s):
            for start in range(0, len(pairs), npe):
                recs = []
                for pe, (i0, i1, rnd) in enumerate(pairs[start:start + npe]):
                    c0, c1 = _cell(layout, i0), _cell(layout, i1)
                    recs.append(Record(pe, s, rnd, c0, c1, c0, c1, tw_base + rnd))
                cycles.append(recs)
    return ScheduleTrace(op_kind, n_total, n, npe, layout_kind, cycles)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of the RAW-freedom check for one configuration."""

    N: int
    n: int
    npe: int
    op_kind: str
    bound: int
    total_delay: int
    slack: int
    satisfied: bool


def check_raw_bound(
    n_total: int, npe: int, pipeline: PipelineConfig, op_kind: str = "ntt"
) -> BoundReport:
    """Stall-free iff total pipeline delay < (n/2) * (n / (2*Npe)).

    At full rate the second factor is 1. The bound is strict: a delay
    equal to it hits the tightest cross-stage distance in the schedule.
    """
    n = validate_geometry(n_total, npe)
    bound = (n // 2) * (n // (2 * npe))
    total = pipeline.total_delay(op_kind)
    return BoundReport(
        N=n_total,
        n=n,
        npe=npe,
        op_kind=op_kind,
        bound=bound,
        total_delay=total,
        slack=bound - total,
        satisfied=total < bound,
    )


@dataclass
class ScheduleStats:
    """Aggregate counters audited by the tests."""

    op_kind: str
    issue_cycles: int
    butterflies: int
    utilization: float
    cycles_per_stage: dict = field(default_factory=dict)
    rounds_per_stage: dict = field(default_factory=dict)
    reads_per_bank: List[int] = field(default_factory=list)
    writes_per_bank: List[int] = field(default_factory=list)


def trace_stats(trace: ScheduleTrace) -> ScheduleStats:
    stage_cycles = Counter()
    stage_rounds = {}
    reads = [0] * trace.n
    writes = [0] * trace.n
    total = 0
    for cycle in trace.cycles:
        stage_cycles[cycle[0].stage] += 1
        for rec in cycle:
            total += 1
            stage_rounds.setdefault(rec.stage, set()).add(rec.rnd)
            reads[rec.r0[0]] += 1
            reads[rec.r1[0]] += 1
            writes[rec.w0[0]] += 1
            if rec.w1 is not None:
                writes[rec.w1[0]] += 1
    return ScheduleStats(
        op_kind=trace.op_kind,
        issue_cycles=len(trace.cycles),
        butterflies=total,
        utilization=total / (trace.npe * len(trace.cycles)),
        cycles_per_stage=dict(stage_cycles),
        rounds_per_stage={s: len(r) for s, r in stage_rounds.items()},
        reads_per_bank=reads,
        writes_per_bank=writes,
    )


CSV_COLUMNS = [
    "cycle", "pe", "stage", "round",
    "r0_bank", "r0_addr", "r1_bank", "r1_addr",
    "w0_bank", "w0_addr", "w1_bank", "w1_addr", "tw_idx",
]


def export_csv(trace: ScheduleTrace, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cycle_no, cycle in enumerate(trace.cycles):
        for rec in cycle:
            w1b, w1a = ("", "") if rec.w1 is None else rec.w1
            writer.writerow([
                cycle_no, rec.pe, rec.stage, rec.rnd,
                rec.r0[0], rec.r0[1], rec.r1[0], rec.r1[1],
                rec.w0[0], rec.w0[1], w1b, w1a,
                rec.tw if rec.tw >= 0 else "",
            ])
