"""Residue number system over chains of word-sized NTT-friendly primes.

Coefficients mod Q = q_1 * ... * q_Nq are held as one residue polynomial
per prime, so a large-modulus polynomial product runs as Nq independent
word-sized products. Reconstruction uses the Gauss CRT formula with
precomputed weights; the accelerator itself never reconstructs, but the
mod-Q oracle tests need it.

Inputs are canonical representatives in [0, Q); centered forms are out of
scope.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from nttsim.modarith import Modulus, barrett_precompute, ntt_modulus
from nttsim.ntt import Polynomial, polymul_ntt


@dataclass(frozen=True)
class RnsBasis:
    """Ordered prime moduli with CRT reconstruction constants.

    crt_weights[i] = (Q // q_i, (Q // q_i)^-1 mod q_i).
    """

    moduli: Tuple[Modulus, ...]
    big_q: int
    crt_weights: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_moduli(cls, moduli: Sequence[Modulus]) -> "RnsBasis":
        qs = [m.q for m in moduli]
        if len(set(qs)) != len(qs):
            raise ValueError("basis primes must be distinct")
        big_q = 1
        for q in qs:
            big_q *= q
        weights = []
        for q in qs:
            w = big_q // q
            weights.append((w, pow(w % q, -1, q)))
        return cls(tuple(moduli), big_q, tuple(weights))

    @classmethod
    def from_primes(cls, primes: Sequence[int], two_n: int = None) -> "RnsBasis":
        return cls.from_moduli([barrett_precompute(q, two_n) for q in primes])

    @property
    def n_q(self) -> int:
        return len(self.moduli)


@dataclass(frozen=True)
class RnsPolynomial:
    """One residue polynomial per basis modulus, all of equal length."""

    residue_polys: Tuple[Polynomial, ...]
    basis: RnsBasis

    @property
    def n(self) -> int:
        return self.residue_polys[0].n


def gen_basis(word_bits: int, n_q: int, n: int) -> RnsBasis:
    """Deterministic chain of n_q primes below 2^word_bits, each
    congruent to 1 mod 2N."""
    if n_q < 1:
        raise ValueError("n_q must be at least 1")
    try:
        moduli = [ntt_modulus(word_bits, n, i) for i in range(n_q)]
    except ValueError as exc:
        raise ValueError(
            f"cannot build {n_q} primes below 2^{word_bits} for N={n}: {exc}"
        ) from exc
    return RnsBasis.from_moduli(moduli)


def decompose(coeffs: Sequence[int], basis: RnsBasis) -> RnsPolynomial:
    """Split coefficients in [0, Q) into per-modulus residue polynomials."""
    values = [int(c) for c in coeffs]
    for c in values:
        if not 0 <= c < basis.big_q:
            raise ValueError(f"coefficient {c} outside [0, Q={basis.big_q})")
    polys = tuple(
        Polynomial.from_ints([c % mod.q for c in values], mod)
        for mod in basis.moduli
    )
    return RnsPolynomial(polys, basis)


def reconstruct(rns_poly: RnsPolynomial, basis: RnsBasis) -> List[int]:
    """Gauss CRT: sum_i x_i * (Q/q_i) * inv_i mod Q, per coefficient."""
    n = rns_poly.n
    out = [0] * n
    for poly, (w, inv) in zip(rns_poly.residue_polys, basis.crt_weights):
        scale = w * inv
        for j, x in enumerate(poly.to_ints()):
            out[j] += x * scale
    return [v % basis.big_q for v in out]


def rns_polymul(
    a: RnsPolynomial, b: RnsPolynomial, basis: RnsBasis
) -> RnsPolynomial:
    """Component-wise negacyclic product across independent channels."""
    if a.basis is not basis and a.basis.big_q != basis.big_q:
        raise ValueError("operand bases do not match")
    if b.basis is not basis and b.basis.big_q != basis.big_q:
        raise ValueError("operand bases do not match")
    if a.n != b.n:
        raise ValueError("polynomial lengths differ")
    products = tuple(
        polymul_ntt(pa, pb, mod)
        for pa, pb, mod in zip(a.residue_polys, b.residue_polys, basis.moduli)
    )
    return RnsPolynomial(products, basis)
