"""Large-modulus polynomial products as independent word-sized channels.

A 60-bit (or 180-bit) coefficient space splits across two (or six)
32-bit primes; each channel multiplies on its own, and the Chinese
remainder theorem puts the big coefficients back together.
"""

import math

from nttsim.rns import decompose, gen_basis, reconstruct, rns_polymul

for n_q in (2, 6):
    basis = gen_basis(32, n_q, 4096)
    bits = math.ceil(math.log2(basis.big_q))
    primes = [m.q for m in basis.moduli]
    print(f"n_q={n_q}: primes {primes}")
    print(f"        Q has {bits} bits\n")

# a small worked example
basis = gen_basis(14, 2, 8)
big_q = basis.big_q
print(f"worked example: N=8, primes {[m.q for m in basis.moduli]}, Q={big_q}")

a = [123456, 7890, 0, 1, big_q - 1, 5, 6, 7]
b = [1, 0, 0, 0, 2, 0, 0, 0]
ra, rb = decompose(a, basis), decompose(b, basis)
print(f"a residues ch0 = {ra.residue_polys[0].to_ints()}")
print(f"a residues ch1 = {ra.residue_polys[1].to_ints()}")

product = rns_polymul(ra, rb, basis)
rebuilt = reconstruct(product, basis)
print(f"\nreconstructed a*b mod Q = {rebuilt}")

# cross-check coefficient 0 by hand: (a*b)[0] = a0*b0 - sum of wraps
expect0 = (a[0] * b[0] - sum(a[8 - j] * b[j] for j in range(1, 8) if b[j])) % big_q
print(f"hand-computed coefficient 0 = {expect0} -> match: {expect0 == rebuilt[0]}")

assert reconstruct(decompose(a, basis), basis) == a
print("\ndecompose/reconstruct roundtrip: exact")
