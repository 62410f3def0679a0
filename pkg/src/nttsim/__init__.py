"""Negacyclic NTT polynomial multiplication and a cycle-accurate
simulator of a banked-memory butterfly accelerator."""

from nttsim.modarith import (
    Modulus,
    barrett_mul_hw,
    barrett_mul_soft,
    barrett_precompute,
    find_ntt_prime,
    find_primitive_root,
    half_mod,
    is_prime,
    mod_pow,
    ntt_modulus,
    step_multiply,
)
from nttsim.ntt import (
    Polynomial,
    TwiddleTable,
    gen_twiddles,
    intt_gs,
    ntt_ct,
    pointwise_mul,
    polymul_ntt,
    read_polynomial,
    schoolbook_negacyclic,
    write_polynomial,
)
from nttsim.rns import RnsBasis, RnsPolynomial, decompose, gen_basis, reconstruct, rns_polymul
from nttsim.layout import LayoutMap, coefficient_at, make_layout, place, verify_conflict_free
from nttsim.schedule import (
    PROFILES,
    PipelineConfig,
    ScheduleTrace,
    build_schedule,
    check_raw_bound,
    export_csv,
    trace_stats,
)
from nttsim.sim import (
    SimConfig,
    SimHazardError,
    SimMismatchError,
    SimReport,
    detect_hazards,
    make_sim_config,
    predicted_cycles,
    run,
)

__all__ = [
    "Modulus",
    "barrett_mul_hw",
    "barrett_mul_soft",
    "barrett_precompute",
    "find_ntt_prime",
    "find_primitive_root",
    "half_mod",
    "is_prime",
    "mod_pow",
    "ntt_modulus",
    "step_multiply",
    "Polynomial",
    "TwiddleTable",
    "gen_twiddles",
    "intt_gs",
    "ntt_ct",
    "pointwise_mul",
    "polymul_ntt",
    "read_polynomial",
    "schoolbook_negacyclic",
    "write_polynomial",
    "RnsBasis",
    "RnsPolynomial",
    "decompose",
    "gen_basis",
    "reconstruct",
    "rns_polymul",
    "LayoutMap",
    "coefficient_at",
    "make_layout",
    "place",
    "verify_conflict_free",
    "PROFILES",
    "PipelineConfig",
    "ScheduleTrace",
    "build_schedule",
    "check_raw_bound",
    "export_csv",
    "trace_stats",
    "SimConfig",
    "SimHazardError",
    "SimMismatchError",
    "SimReport",
    "detect_hazards",
    "make_sim_config",
    "predicted_cycles",
    "run",
]

__version__ = "0.1.0"
