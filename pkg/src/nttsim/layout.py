"""Bank placement for the accelerator's n x n coefficient memory.

N coefficients live in n = sqrt(N) banks of depth n. Row r of the logical
matrix is rotated right by r banks:

    (address, bank) = (i // n, (i mod n + i // n) mod n)

so a coefficient never shares a bank with any partner at power-of-two
distance, which is exactly the set of butterfly pairings. The plain
row-major placement ("sequential") is kept around as the counterexample
the detectors must flag.
"""

import json
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

KINDS = ("shifted", "sequential")


def _sqrt_banks(n_total: int) -> int:
    bits = n_total.bit_length() - 1
    if n_total < 2 or n_total & (n_total - 1):
        raise ValueError(f"N={n_total} is not a power of two")
    if bits % 2:
        raise ValueError(f"N={n_total} has odd log2; the layout needs a square")
    if n_total <= 4:
        raise ValueError("the layout requires N > 4 (more than two banks)")
    return 1 << (bits // 2)


def place(i: int, n: int) -> Tuple[int, int]:
    """Shifted placement of coefficient i into (address, bank)."""
    if not 0 <= i < n * n:
        raise ValueError(f"coefficient index {i} outside [0, {n * n})")
    addr = i // n
    return addr, (i % n + addr) % n


def coefficient_at(addr: int, bank: int, n: int) -> int:
    """Inverse of place: which coefficient sits in (address, bank)."""
    if not (0 <= addr < n and 0 <= bank < n):
        raise ValueError(f"cell ({addr}, {bank}) outside the {n}x{n} memory")
    return addr * n + (bank - addr) % n


@dataclass(frozen=True)
class LayoutMap:
    """Bijection between coefficient indices and (address, bank) cells."""

    N: int
    n: int
    kind: str = "shifted"

    def place(self, i: int) -> Tuple[int, int]:
        if self.kind == "sequential":
            if not 0 <= i < self.N:
                raise ValueError(f"coefficient index {i} outside [0, {self.N})")
            return i // self.n, i % self.n
        return place(i, self.n)

    def coefficient_at(self, addr: int, bank: int) -> int:
        if self.kind == "sequential":
            if not (0 <= addr < self.n and 0 <= bank < self.n):
                raise ValueError(f"cell ({addr}, {bank}) out of range")
            return addr * self.n + bank
        return coefficient_at(addr, bank, self.n)

    def banks_of(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized bank numbers for an index array."""
        indices = np.asarray(indices)
        if self.kind == "sequential":
            return indices % self.n
        return (indices % self.n + indices // self.n) % self.n

    def addresses_of(self, indices: np.ndarray) -> np.ndarray:
        return np.asarray(indices) // self.n


def make_layout(n_total: int, kind: str = "shifted") -> LayoutMap:
    if kind not in KINDS:
        raise ValueError(f"unknown layout kind {kind!r}; expected {KINDS}")
    return LayoutMap(N=n_total, n=_sqrt_banks(n_total), kind=kind)


@dataclass
class ConflictReport:
    """Outcome of the exhaustive power-of-two-distance bank check."""

    N: int
    kind: str
    pairs_checked: int
    violations: List[Dict[str, int]] = field(default_factory=list)

    def to_json_lines(self) -> str:
        lines = [json.dumps(v, sort_keys=True) for v in self.violations]
        lines.append(
            json.dumps(
                {
                    "N": self.N,
                    "layout": self.kind,
                    "pairs_checked": self.pairs_checked,
                    "violations": len(self.violations),
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


def verify_conflict_free(n_total: int, kind: str = "shifted") -> ConflictReport:
    """Check bank(i) != bank(i +/- 2^t) for every i and every t.

    Violations are report content, not errors; the shifted layout is
    expected to produce none for any supported N.
    """
    layout = make_layout(n_total, kind)
    idx = np.arange(n_total, dtype=np.int64)
    banks = layout.banks_of(idx)
    report = ConflictReport(N=n_total, kind=kind, pairs_checked=0)
    t = 0
    dist = 1
    while dist <= n_total // 2:
        partner = idx + dist
        ok = partner < n_total
        same = banks[idx[ok]] == banks[partner[ok]]
        report.pairs_checked += int(ok.sum())
        for i in idx[ok][same]:
            report.violations.append(
                {"i": int(i), "j": int(i + dist), "bank": int(banks[i]), "t": t}
            )
        t += 1
        dist *= 2
    return report
