"""Exact modular arithmetic kernels.

Two Barrett multiplication variants are provided: a plain one that reduces
the full double-width product in a single step, and a hardware-shaped one
that right-shifts the product before multiplying by the precomputed
reciprocal so that every multiply fits a split-operand step multiplier.
Both return the exact residue; the hardware variant is the one the
simulator's butterfly units execute.

Scalar functions operate on Python ints and are exact for moduli up to
62 bits. The ``*_batch`` variants are numpy fast paths for moduli up to
32 bits, used by the bulk transform code and the exhaustive test sweeps.
"""

import math
import random
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

DEFAULT_STEP_WIDTH = 32

_MASK16 = 0xFFFF
_MASK32 = 0xFFFF_FFFF

# Deterministic Miller-Rabin witness set for all inputs below 2^64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(x: int) -> bool:
    """Deterministic primality test, valid for all x < 2^64."""
    if x < 2:
        return False
    for p in _SMALL_PRIMES:
        if x % p == 0:
            return x == p
    d = x - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for w in _MR_WITNESSES:
        y = pow(w, d, x)
        if y == 1 or y == x - 1:
            continue
        for _ in range(r - 1):
            y = (y * y) % x
            if y == x - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Modulus:
    """A prime modulus with its precomputed Barrett constants.

    k is the bit count ceil(log2 q), m = floor(2^(2k) / q) and always has
    exactly k+1 bits. g is a primitive root and two_n the 2N value the
    prime was generated for; both stay None until needed.
    """

    q: int
    k: int
    m: int
    g: Optional[int] = None
    two_n: Optional[int] = None

    def with_root(self) -> "Modulus":
        if self.g is not None:
            return self
        return replace(self, g=find_primitive_root(self.q))


class WordProduct(NamedTuple):
    """A 2W-bit product held as two W-bit halves."""

    lo: int
    hi: int
    width: int

    @property
    def value(self) -> int:
        return (self.hi << self.width) | self.lo


class BarrettTrace(NamedTuple):
    """Intermediates of one Barrett multiplication, for the t2/t4 checks."""

    t1: int
    t2: int
    t3: int
    t4: int
    z: int


def _constants(q: int) -> Modulus:
    """Barrett constants without the primality check (internal)."""
    k = q.bit_length()
    return Modulus(q=q, k=k, m=(1 << (2 * k)) // q)


def barrett_precompute(q: int, two_n: Optional[int] = None) -> Modulus:
    """Validate a prime and derive its Barrett constants."""
    if not 3 <= q < 2**63:
        raise ValueError(f"modulus {q} outside supported range [3, 2^63)")
    if not is_prime(q):
        raise ValueError(f"modulus {q} is not prime")
    if two_n is not None and q % two_n != 1:
        raise ValueError(f"{q} is not congruent to 1 mod {two_n}")
    mod = _constants(q)
    return replace(mod, two_n=two_n)


def _check_operands(a: int, b: int, q: int) -> None:
    if not (0 <= a < q and 0 <= b < q):
        raise ValueError(f"operands ({a}, {b}) not reduced mod {q}")


def barrett_mul_soft_trace(a: int, b: int, mod: Modulus) -> BarrettTrace:
    _check_operands(a, b, mod.q)
    t1 = a * b
    t2 = (t1 * mod.m) >> (2 * mod.k)
    t3 = t2 * mod.q
    t4 = t1 - t3
    z = t4 - mod.q if t4 >= mod.q else t4
    return BarrettTrace(t1, t2, t3, t4, z)


def barrett_mul_soft(a: int, b: int, mod: Modulus) -> int:
    """(a * b) mod q with one reduction of the full product.

    Reference variant: single conditional subtraction at the end.
    """
    _check_operands(a, b, mod.q)
    t1 = a * b
    t4 = t1 - ((t1 * mod.m) >> (2 * mod.k)) * mod.q
    return t4 - mod.q if t4 >= mod.q else t4


def split_width(k: int, width: Optional[int] = None) -> int:
    """Step-multiplier width able to hold the (k+1)-bit intermediates.

    The configured width is used as-is when k <= width - 2; otherwise it
    widens to the smallest even width >= k + 2, matching the inclusive
    MSB segment of the hardware splitter.
    """
    if width is None:
        width = DEFAULT_STEP_WIDTH
    if width % 2:
        raise ValueError("split width must be even")
    if k <= width - 2:
        return width
    return (k + 3) & ~1


def step_multiply(a: int, b: int, width: int = DEFAULT_STEP_WIDTH) -> WordProduct:
    """Full product of two W-bit words from four half-width partials."""
    if width % 2:
        raise ValueError("split width must be even")
    bound = 1 << width
    if not (0 <= a < bound and 0 <= b < bound):
        raise ValueError(f"operands ({a}, {b}) exceed {width} bits")
    half = width // 2
    mask = (1 << half) - 1
    a_lo, a_hi = a & mask, a >> half
    b_lo, b_hi = b & mask, b >> half
    low = a_lo * b_lo
    mid = a_lo * b_hi + a_hi * b_lo
    high = a_hi * b_hi
    value = (high << width) + (mid << half) + low
    return WordProduct(lo=value & (bound - 1), hi=value >> width, width=width)


def _hw_pipeline(a: int, b: int, mod: Modulus, width: Optional[int]) -> BarrettTrace:
    w = split_width(mod.k, width)
    q, k, m = mod.q, mod.k, mod.m
    t1 = step_multiply(a, b, w).value
    t1_high = t1 >> (k - 1)
    t2 = step_multiply(t1_high, m, w).value >> (k + 1)
    t3 = step_multiply(t2, q, w).value
    t4 = t1 - t3
    assert t4 < 3 * q
    if t4 >= 2 * q:
        z = t4 - 2 * q
    elif t4 >= q:
        z = t4 - q
    else:
        z = t4
    return BarrettTrace(t1, t2, t3, t4, z)


def barrett_mul_hw_trace(
    a: int, b: int, mod: Modulus, width: Optional[int] = None
) -> BarrettTrace:
    _check_operands(a, b, mod.q)
    return _hw_pipeline(a, b, mod, width)


def barrett_mul_hw(a: int, b: int, mod: Modulus, width: Optional[int] = None) -> int:
    """(a * b) mod q via the shift-early pipeline and two-step ladder.

    The product is shifted right by k-1 before the reciprocal multiply, so
    every multiplication stays within the step multiplier's operand width.
    The quotient estimate can be one short of the plain variant's, hence
    the subtract-2q-else-q ladder and the t4 < 3q guarantee.
    """
    _check_operands(a, b, mod.q)
    return _hw_pipeline(a, b, mod, width).z


def half_mod(x: int, q: int) -> int:
    """x/2 mod q: shift when even, shift and add (q+1)/2 when odd."""
    if q % 2 == 0:
        raise ValueError("half_mod requires an odd modulus")
    if x & 1:
        return (x >> 1) + ((q + 1) >> 1)
    return x >> 1


def mod_pow(base: int, exp: int, mod: Modulus) -> int:
    """base^exp mod q by square-and-multiply over barrett_mul_soft."""
    result = 1 % mod.q
    acc = base % mod.q
    while exp:
        if exp & 1:
            result = barrett_mul_soft(result, acc, mod)
        acc = barrett_mul_soft(acc, acc, mod)
        exp >>= 1
    return result


def _pollard_rho(x: int) -> int:
    """One nontrivial factor of composite odd x."""
    if x % 2 == 0:
        return 2
    rand = random.Random(x)
    for _ in range(64):
        y = rand.randrange(2, x - 1)
        c = rand.randrange(1, x - 1)
        f = lambda v: (v * v + c) % x  # noqa: E731
        a, b, d = y, f(y), 1
        while d == 1:
            a = f(a)
            b = f(f(b))
            d = math.gcd(abs(a - b), x)
        if d != x:
            return d
    raise ValueError(f"failed to factor {x}")


def _factorize(x: int) -> set:
    """Prime factor set by trial division plus Pollard rho."""
    factors = set()
    for p in _SMALL_PRIMES:
        while x % p == 0:
            factors.add(p)
            x //= p
    stack = [x] if x > 1 else []
    while stack:
        v = stack.pop()
        if v == 1:
            continue
        if is_prime(v):
            factors.add(v)
            continue
        d = _pollard_rho(v)
        stack.append(d)
        stack.append(v // d)
    return factors


def find_primitive_root(q: int) -> int:
    """Smallest generator of Z_q^* (q prime)."""
    if q == 2:
        return 1
    mod = _constants(q)
    cofactors = [(q - 1) // p for p in _factorize(q - 1)]
    for g in range(2, q):
        if all(mod_pow(g, e, mod) != 1 for e in cofactors):
            return g
    raise ValueError(f"no primitive root found for {q}")


def find_ntt_prime(bits: int, n: int, index: int = 0) -> int:
    """index-th largest prime below 2^bits congruent to 1 mod 2N.

    Searches downward from 2^bits - 1 in steps of 2N, so the same
    (bits, N, index) always yields the same prime.
    """
    if bits > 62:
        raise ValueError("bits must be <= 62")
    if n < 2 or n & (n - 1):
        raise ValueError(f"N={n} is not a power of two")
    two_n = 2 * n
    if two_n >= 1 << bits:
        raise ValueError(f"2N={two_n} does not fit below 2^{bits}")
    candidate = ((1 << bits) - 2) // two_n * two_n + 1
    seen = 0
    while candidate > two_n:
        if is_prime(candidate):
            if seen == index:
                return candidate
            seen += 1
        candidate -= two_n
    raise ValueError(
        f"no prime #{index} below 2^{bits} congruent to 1 mod {two_n}"
    )


def ntt_modulus(bits: int, n: int, index: int = 0) -> Modulus:
    """A transform-ready modulus: prime, constants and primitive root."""
    q = find_ntt_prime(bits, n, index)
    return barrett_precompute(q, two_n=2 * n).with_root()


# ---------------------------------------------------------------------------
# numpy batch variants (exact for k <= 32)


def _as_residues(a, q: int) -> np.ndarray:
    arr = np.asarray(a, dtype=np.uint64)
    if arr.size and int(arr.max()) >= q:
        raise ValueError(f"batch operands not reduced mod {q}")
    return arr


def _require_batchable(mod: Modulus) -> None:
    if mod.k > 32:
        raise ValueError("batch kernels support moduli up to 32 bits")


def _t2_soft_batch(t1: np.ndarray, mod: Modulus) -> np.ndarray:
    """(t1 * m) >> 2k without leaving uint64, by limb decomposition."""
    k, m = mod.k, mod.m
    if k <= 15:
        return (t1 * m) >> (2 * k)
    if k <= 31:
        hm = (t1 >> 32) * m
        lm = (t1 & _MASK32) * m
        return (hm + (lm >> 32)) >> (2 * k - 32)
    m_hi, m_lo = m >> 16, m & _MASK16
    h, l = t1 >> 32, t1 & _MASK32
    c1 = l * m_hi + ((l * m_lo) >> 16)
    c2 = h * m_lo + (c1 >> 16)
    c3 = h * m_hi + (c2 >> 16)
    return c3 >> 16


def barrett_mul_soft_batch(a, b, mod: Modulus) -> np.ndarray:
    """Elementwise barrett_mul_soft over uint64 arrays."""
    _require_batchable(mod)
    a = _as_residues(a, mod.q)
    b = _as_residues(b, mod.q)
    t1 = a * b
    t4 = t1 - _t2_soft_batch(t1, mod) * mod.q
    return np.where(t4 >= mod.q, t4 - mod.q, t4)


def barrett_mul_hw_batch(a, b, mod: Modulus) -> np.ndarray:
    """Elementwise barrett_mul_hw over uint64 arrays."""
    _require_batchable(mod)
    a = _as_residues(a, mod.q)
    b = _as_residues(b, mod.q)
    q, k, m = mod.q, mod.k, mod.m
    t1 = a * b
    t1_high = t1 >> (k - 1)
    if k <= 15:
        t2 = (t1_high * m) >> (k + 1)
    else:
        c = t1_high * (m >> 16) + ((t1_high * (m & _MASK16)) >> 16)
        t2 = c >> (k - 15)
    t4 = t1 - t2 * q
    t4 = np.where(t4 >= 2 * q, t4 - 2 * q, t4)
    return np.where(t4 >= q, t4 - q, t4)


def half_mod_batch(x, q: int) -> np.ndarray:
    """Elementwise half_mod over uint64 arrays."""
    if q % 2 == 0:
        raise ValueError("half_mod requires an odd modulus")
    x = np.asarray(x, dtype=np.uint64)
    return (x >> 1) + np.where(x & 1, (q + 1) >> 1, 0).astype(np.uint64)
