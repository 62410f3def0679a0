"""Cycle-accurate replay of access traces against banked memories.

Timing contract (shared by the static analyzer and the dynamic replay):

- Issue groups execute in trace order; the first issues at cycle
  ``setup_cycles``.
- A butterfly issued at cycle c retires its writes at c + D where
  D = delay_read + delay_pe + delay_write; the written cells become
  readable at c + D + 1 (a value cannot be read in the cycle its write
  completes).
- A group whose operand cell is not yet readable stalls issue (in-flight
  work keeps retiring) until it is; each waited cycle counts as a RAW
  stall and the event is recorded at the attempt cycle.
- Each bank serves one read and one write per cycle. Over-subscription
  is recorded as a conflict event and serializes: every extra access
  stretches the group's issue slot by one cycle. The shipped schedules
  never need this; it exists so the sequential-layout counterexample is
  observable.
- Total cycles for an op = setup + consumed issue slots + D, which
  collapses to the closed-form prediction exactly when nothing stalls.

The dynamic replay additionally executes the butterfly numerics with the
same scalar kernels the reference transforms use, and refuses to return
a result that disagrees with the reference transform: such a mismatch is
a simulator bug, never expected to fire.
"""

import json
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from nttsim.layout import LayoutMap, make_layout
from nttsim.modarith import Modulus, barrett_mul_hw, ntt_modulus
from nttsim.ntt import (
    Polynomial,
    cached_twiddles,
    ct_butterfly,
    gs_butterfly,
    intt_gs_array,
    ntt_ct_array,
    pointwise_mul_array,
)
from nttsim.rns import RnsPolynomial
from nttsim.schedule import (
    PROFILES,
    PipelineConfig,
    ScheduleTrace,
    build_schedule,
    check_raw_bound,
    validate_geometry,
)

POLYMUL_SEQUENCE = ("ntt", "ntt", "mult", "intt")


class HazardEvent(NamedTuple):
    """One detected hazard: kind is raw / read_conflict / write_conflict.

    For RAW events (bank, addr) name the offending cell and extra the
    stall length; for port conflicts addr is -1 and extra the number of
    serialized extra accesses on that bank.
    """

    kind: str
    cycle: int
    bank: int
    addr: int
    extra: int


class SimHazardError(Exception):
    """Raised under the fail-fast policy at the first hazard."""

    def __init__(self, event: HazardEvent):
        super().__init__(
            f"{event.kind} hazard at cycle {event.cycle} "
            f"(bank {event.bank}, addr {event.addr})"
        )
        self.event = event
        self.kind = event.kind
        self.cycle = event.cycle
        self.bank = event.bank
        self.addr = event.addr


class SimMismatchError(Exception):
    """Simulated result disagrees with the reference transform."""


@dataclass
class HazardReport:
    """Static timing analysis of one trace."""

    op_kind: str
    events: List[HazardEvent] = field(default_factory=list)
    stall_cycles: int = 0
    raw_count: int = 0
    read_conflicts: int = 0
    write_conflicts: int = 0
    issue_cycles: int = 0
    consumed_cycles: int = 0
    total_cycles: int = 0
    per_stage: dict = field(default_factory=dict)


def _group_ports(trace_kind: str, group):
    """(array, bank) access lists for one issue group."""
    if trace_kind == "mult":
        reads = [("a", rec.r0) for rec in group] + [("b", rec.r1) for rec in group]
        writes = [("a", rec.w0) for rec in group]
    else:
        reads = [("a", rec.r0) for rec in group] + [("a", rec.r1) for rec in group]
        writes = [("a", rec.w0) for rec in group] + [("a", rec.w1) for rec in group]
    return reads, writes


def _port_conflicts(accesses, cycle, kind, events):
    """Count over-subscribed banks; one event per (bank, cycle)."""
    counts = {}
    for array, (bank, _addr) in accesses:
        counts[(array, bank)] = counts.get((array, bank), 0) + 1
    extra = 0
    for (_array, bank), c in sorted(counts.items()):
        if c > 1:
            events.append(HazardEvent(kind, cycle, bank, -1, c - 1))
            extra += c - 1
    return extra


def detect_hazards(
    trace: ScheduleTrace,
    pipeline: PipelineConfig,
    setup_cycles: int = 0,
    policy: str = "stall",
) -> HazardReport:
    """Walk the trace's timing without any numerics.

    Maintains per-cell readiness timestamps and per-cycle port budgets
    under the module's timing contract; findings match the dynamic
    replay's events cycle for cycle.
    """
    delay = pipeline.total_delay(trace.op_kind)
    report = HazardReport(op_kind=trace.op_kind, issue_cycles=trace.issue_cycles)
    land: dict = {}
    cycle = setup_cycles
    for group in trace.cycles:
        reads, writes = _group_ports(trace.op_kind, group)
        ready = cycle
        for key in reads:
            cell_land = land.get(key, -1)
            if cell_land >= cycle:
                report.events.append(
                    HazardEvent("raw", cycle, key[1][0], key[1][1], cell_land + 1 - cycle)
                )
                report.raw_count += 1
                ready = max(ready, cell_land + 1)
        if ready > cycle:
            if policy == "fail-fast":
                report.events = report.events[:1]
                break
            report.stall_cycles += ready - cycle
            cycle = ready
        n_events = len(report.events)
        extra = _port_conflicts(reads, cycle, "read_conflict", report.events)
        report.read_conflicts += len(report.events) - n_events
        n_events = len(report.events)
        extra += _port_conflicts(writes, cycle, "write_conflict", report.events)
        report.write_conflicts += len(report.events) - n_events
        if (report.read_conflicts or report.write_conflicts) and policy == "fail-fast":
            report.events = report.events[:1]
            break
        cost = 1 + extra
        retire = cycle + cost - 1 + delay
        for key in writes:
            land[key] = retire
        stage = group[0].stage
        report.per_stage[stage] = report.per_stage.get(stage, 0) + cost
        cycle += cost
    report.consumed_cycles = cycle - setup_cycles
    report.total_cycles = setup_cycles + report.consumed_cycles + delay
    return report


class CbuModel:
    """A pipelined butterfly unit: results emerge depth cycles after
    issue, in order, with the memory path latencies on either side."""

    def __init__(self, mode: str, pipeline: PipelineConfig):
        self.mode = mode
        self.depth = pipeline.delay_pe(mode)
        self._read = pipeline.delay_read
        self._write = pipeline.delay_write

    def retire_cycle(self, issue_cycle: int) -> int:
        return issue_cycle + self._read + self.depth + self._write


class BankedMemory:
    """n banks of depth n; one read and one write port per bank per
    cycle, with a readiness timestamp per cell."""

    def __init__(self, n: int):
        self.n = n
        self.values = [[0] * n for _ in range(n)]
        self.land = [[-1] * n for _ in range(n)]

    def load(self, coeffs: Sequence[int], layout: LayoutMap) -> None:
        for i, v in enumerate(coeffs):
            addr, bank = layout.place(i)
            self.values[bank][addr] = int(v)
            self.land[bank][addr] = -1

    def reset_timing(self) -> None:
        """Clear readiness state; models the drain between chained ops."""
        self.land = [[-1] * self.n for _ in range(self.n)]

    def extract(self, layout: LayoutMap, n_total: int) -> List[int]:
        out = []
        for i in range(n_total):
            addr, bank = layout.place(i)
            out.append(self.values[bank][addr])
        return out


@dataclass(frozen=True)
class SimConfig:
    """Everything a simulation needs besides the operand polynomials."""

    N: int
    npe: int
    moduli: Tuple[Modulus, ...]
    pipeline: PipelineConfig
    setup_cycles: int = 0
    hazard_policy: str = "stall"
    layout_kind: str = "shifted"
    profile_name: str = "custom"

    def describe(self) -> dict:
        return {
            "N": self.N,
            "npe": self.npe,
            "moduli": [m.q for m in self.moduli],
            "pipeline": {
                "delay_read": self.pipeline.delay_read,
                "delay_write": self.pipeline.delay_write,
                "delay_pe_ntt": self.pipeline.delay_pe_ntt,
                "delay_pe_mult": self.pipeline.delay_pe_mult,
            },
            "setup_cycles": self.setup_cycles,
            "hazard_policy": self.hazard_policy,
            "layout": self.layout_kind,
            "profile": self.profile_name,
        }


def make_sim_config(
    n_total: int,
    npe: int,
    q_bits: Optional[int] = None,
    n_q: int = 1,
    moduli: Optional[Sequence[Modulus]] = None,
    profile: Union[str, PipelineConfig] = "q32",
    setup_cycles: int = 0,
    hazard_policy: str = "stall",
    layout_kind: str = "shifted",
) -> SimConfig:
    validate_geometry(n_total, npe)
    if hazard_policy not in ("stall", "fail-fast"):
        raise ValueError(f"unknown hazard policy {hazard_policy!r}")
    if isinstance(profile, str):
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; expected {list(PROFILES)}")
        pipeline, name = PROFILES[profile], profile
    else:
        pipeline, name = profile, "custom"
    if moduli is None:
        if q_bits is None:
            raise ValueError("either q_bits or explicit moduli are required")
        moduli = [ntt_modulus(q_bits, n_total, i) for i in range(n_q)]
    moduli = tuple(m.with_root() for m in moduli)
    return SimConfig(
        N=n_total,
        npe=npe,
        moduli=moduli,
        pipeline=pipeline,
        setup_cycles=setup_cycles,
        hazard_policy=hazard_policy,
        layout_kind=layout_kind,
        profile_name=name,
    )


def predicted_cycles(
    n_total: int,
    npe: int,
    pipeline: PipelineConfig,
    setup_cycles: int,
    op: str,
) -> int:
    """Closed-form cycle count: issue term plus fixed overhead.

    (N log2 N) / (2 Npe) for the transforms, N / Npe for the pointwise
    pass. Refused when the RAW bound is violated, because stalls make
    the closed form invalid.
    """
    validate_geometry(n_total, npe)
    if op == "polymul":
        return sum(
            predicted_cycles(n_total, npe, pipeline, setup_cycles, kind)
            for kind in POLYMUL_SEQUENCE
        )
    if op in ("ntt", "intt"):
        bound = check_raw_bound(n_total, npe, pipeline, op_kind=op)
        if not bound.satisfied:
            raise ValueError(
                f"RAW bound violated (delay {bound.total_delay} >= "
                f"bound {bound.bound}); the closed form does not apply"
            )
        k = n_total.bit_length() - 1
        issue = n_total * k // (2 * npe)
    elif op == "mult":
        issue = n_total // npe
    else:
        raise ValueError(f"unknown op {op!r}")
    return issue + pipeline.total_delay(op) + setup_cycles


@dataclass
class OpReport:
    """Counters for one replayed operation."""

    op_kind: str
    issue_cycles: int
    consumed_cycles: int
    total_cycles: int
    stall_cycles: int
    raw_count: int
    bank_conflicts: int
    utilization: float
    per_stage: dict
    events: List[HazardEvent]


@dataclass
class SimReport:
    """Counters, hazard findings and numerical results of one run."""

    op: str
    config: SimConfig
    reports: List[OpReport]
    results: List[List[int]]
    total_cycles: int
    stall_cycles: int
    bank_conflict_count: int
    utilization: float
    predicted: Optional[int]
    matches_predicted: Optional[bool]

    def to_json(self) -> str:
        payload = {
            "op": self.op,
            "N": self.config.N,
            "n_pe": self.config.npe,
            "profile": self.config.profile_name,
            "total_cycles": self.total_cycles,
            "per_stage": [
                {
                    "op": rep.op_kind,
                    "cycles": [
                        {"stage": s, "cycles": c}
                        for s, c in sorted(rep.per_stage.items())
                    ],
                    "total_cycles": rep.total_cycles,
                }
                for rep in self.reports
            ],
            "stalls": self.stall_cycles,
            "conflicts": self.bank_conflict_count,
            "utilization": self.utilization,
            "predicted": self.predicted,
            "matches_predicted": self.matches_predicted,
            "config": self.config.describe(),
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def _replay_channel(
    trace: ScheduleTrace,
    mod: Modulus,
    pipeline: PipelineConfig,
    setup_cycles: int,
    policy: str,
    mem_a: BankedMemory,
    mem_b: Optional[BankedMemory],
) -> HazardReport:
    """Dynamic replay: timing walk plus butterfly numerics."""
    kind = trace.op_kind
    cbu = CbuModel(kind, pipeline)
    tw = cached_twiddles(mod, trace.N)
    table = [int(x) for x in (tw.forward if kind == "ntt" else tw.inverse)]
    report = HazardReport(op_kind=kind, issue_cycles=trace.issue_cycles)
    mems = {"a": mem_a, "b": mem_b}
    cycle = setup_cycles
    for group in trace.cycles:
        reads, writes = _group_ports(kind, group)
        ready = cycle
        for array, (bank, addr) in reads:
            cell_land = mems[array].land[bank][addr]
            if cell_land >= cycle:
                event = HazardEvent("raw", cycle, bank, addr, cell_land + 1 - cycle)
                if policy == "fail-fast":
                    raise SimHazardError(event)
                report.events.append(event)
                report.raw_count += 1
                ready = max(ready, cell_land + 1)
        report.stall_cycles += ready - cycle
        cycle = ready
        before = len(report.events)
        extra = _port_conflicts(reads, cycle, "read_conflict", report.events)
        report.read_conflicts += len(report.events) - before
        before = len(report.events)
        extra += _port_conflicts(writes, cycle, "write_conflict", report.events)
        report.write_conflicts += len(report.events) - before
        if policy == "fail-fast" and (report.read_conflicts or report.write_conflicts):
            raise SimHazardError(report.events[-1])
        cost = 1 + extra
        retire = cbu.retire_cycle(cycle + cost - 1)
        av, al = mem_a.values, mem_a.land
        if kind == "mult":
            bv = mem_b.values
            for rec in group:
                b0, a0 = rec.r0
                b1, a1 = rec.r1
                av[b0][a0] = barrett_mul_hw(av[b0][a0], bv[b1][a1], mod)
                al[b0][a0] = retire
        elif kind == "ntt":
            for rec in group:
                b0, a0 = rec.r0
                b1, a1 = rec.r1
                hi, lo = ct_butterfly(av[b0][a0], av[b1][a1], table[rec.tw], mod)
                av[b0][a0] = hi
                av[b1][a1] = lo
                al[b0][a0] = retire
                al[b1][a1] = retire
        else:
            for rec in group:
                b0, a0 = rec.r0
                b1, a1 = rec.r1
                hi, lo = gs_butterfly(av[b0][a0], av[b1][a1], table[rec.tw], mod)
                av[b0][a0] = hi
                av[b1][a1] = lo
                al[b0][a0] = retire
                al[b1][a1] = retire
        stage = group[0].stage
        report.per_stage[stage] = report.per_stage.get(stage, 0) + cost
        cycle += cost
    report.consumed_cycles = cycle - setup_cycles
    report.total_cycles = setup_cycles + report.consumed_cycles + pipeline.total_delay(kind)
    return report


def _reference(op_kind, mod, a_coeffs, b_coeffs):
    tw = cached_twiddles(mod, len(a_coeffs))
    arr = np.array(a_coeffs, dtype=np.uint64)
    if op_kind == "ntt":
        return [int(x) for x in ntt_ct_array(arr, tw)]
    if op_kind == "intt":
        return [int(x) for x in intt_gs_array(arr, tw)]
    brr = np.array(b_coeffs, dtype=np.uint64)
    return [int(x) for x in pointwise_mul_array(arr, brr, tw.mod)]


def _channels(value, moduli, n_total, what):
    if value is None:
        return None
    if isinstance(value, RnsPolynomial):
        polys = list(value.residue_polys)
    elif isinstance(value, Polynomial):
        polys = [value]
    else:
        raise ValueError(f"{what} must be a Polynomial or RnsPolynomial")
    if len(polys) != len(moduli):
        raise ValueError(
            f"{what} has {len(polys)} channels but the config has {len(moduli)} moduli"
        )
    for poly, mod in zip(polys, moduli):
        if poly.mod.q != mod.q:
            raise ValueError(f"{what} channel modulus {poly.mod.q} != config {mod.q}")
        if poly.n != n_total:
            raise ValueError(f"{what} length {poly.n} != configured N {n_total}")
    return [poly.to_ints() for poly in polys]


def run(
    config: SimConfig,
    a: Union[Polynomial, RnsPolynomial],
    b: Union[Polynomial, RnsPolynomial, None] = None,
    op: str = "ntt",
) -> SimReport:
    """Load, replay and verify one operation (or the polymul sequence).

    Per RNS channel the same trace replays against an independent pair
    of banked arrays; counters are identical across channels and are
    asserted to be. Final memory contents must equal the reference
    transform's output, stalls or not.
    """
    if op not in ("ntt", "intt", "mult", "polymul"):
        raise ValueError(f"unknown op {op!r}")
    a_chan = _channels(a, config.moduli, config.N, "a")
    b_chan = _channels(b, config.moduli, config.N, "b")
    if op in ("mult", "polymul") and b_chan is None:
        raise ValueError(f"op {op!r} needs a second operand")

    sequence = POLYMUL_SEQUENCE if op == "polymul" else (op,)
    layout = make_layout(config.N, config.layout_kind)
    mems_a, mems_b = [], []
    for ch in range(len(config.moduli)):
        mems_a.append(BankedMemory(layout.n))
        mems_a[ch].load(a_chan[ch], layout)
        mems_b.append(BankedMemory(layout.n))
        if b_chan is not None:
            mems_b[ch].load(b_chan[ch], layout)

    op_reports: List[OpReport] = []
    state_a = [list(c) for c in a_chan]
    state_b = [list(c) for c in b_chan] if b_chan else None
    for step, kind in enumerate(sequence):
        if step:
            # chained ops start only after the previous one fully retires
            for mem in mems_a + mems_b:
                mem.reset_timing()
        trace = build_schedule(config.N, config.npe, kind, config.layout_kind)
        # in the polymul sequence the second forward transform runs on b
        on_b = op == "polymul" and step == 1
        channel_reports = []
        for ch, mod in enumerate(config.moduli):
            mem_main = mems_b[ch] if on_b else mems_a[ch]
            mem_other = mems_b[ch] if kind == "mult" else None
            rep = _replay_channel(
                trace, mod, config.pipeline, config.setup_cycles,
                config.hazard_policy, mem_main, mem_other,
            )
            channel_reports.append(rep)
            got = mem_main.extract(layout, config.N)
            if on_b:
                expect = _reference(kind, mod, state_b[ch], None)
                state_b[ch] = expect
            else:
                expect = _reference(
                    kind, mod, state_a[ch],
                    state_b[ch] if kind == "mult" else None,
                )
                state_a[ch] = expect
            if got != expect:
                raise SimMismatchError(
                    f"{kind} result mismatch on channel {ch} (q={mod.q})"
                )
        first = channel_reports[0]
        assert all(
            (r.stall_cycles, r.consumed_cycles, r.events)
            == (first.stall_cycles, first.consumed_cycles, first.events)
            for r in channel_reports
        ), "channels must replay with identical timing"
        butterflies = sum(len(g) for g in trace.cycles)
        op_reports.append(
            OpReport(
                op_kind=kind,
                issue_cycles=first.issue_cycles,
                consumed_cycles=first.consumed_cycles,
                total_cycles=first.total_cycles,
                stall_cycles=first.stall_cycles,
                raw_count=first.raw_count,
                bank_conflicts=first.read_conflicts + first.write_conflicts,
                utilization=butterflies / (config.npe * first.consumed_cycles),
                per_stage=first.per_stage,
                events=first.events,
            )
        )

    results = state_a
    try:
        predicted = predicted_cycles(
            config.N, config.npe, config.pipeline, config.setup_cycles, op
        )
    except ValueError:
        predicted = None
    total = sum(r.total_cycles for r in op_reports)
    stalls = sum(r.stall_cycles for r in op_reports)
    conflicts = sum(r.bank_conflicts for r in op_reports)
    consumed = sum(r.consumed_cycles for r in op_reports)
    butterflies_total = sum(
        rep.utilization * config.npe * rep.consumed_cycles for rep in op_reports
    )
    return SimReport(
        op=op,
        config=config,
        reports=op_reports,
        results=results,
        total_cycles=total,
        stall_cycles=stalls,
        bank_conflict_count=conflicts,
        utilization=butterflies_total / (config.npe * consumed),
        predicted=predicted,
        matches_predicted=None if predicted is None else total == predicted,
    )
