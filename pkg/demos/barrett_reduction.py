"""Walk through both Barrett multiplication variants.

The plain variant reduces the full product against m = floor(2^2k / q)
in one step. The hardware-shaped variant shifts the product right by
k-1 bits first, so the reciprocal multiply fits a split-operand
multiplier; its quotient estimate can be one short, which is why it
ends with a subtract-2q-else-q ladder.
"""

from nttsim.modarith import (
    barrett_mul_hw_trace,
    barrett_mul_soft_trace,
    barrett_precompute,
    step_multiply,
)

q = 7681
mod = barrett_precompute(q)
print(f"modulus q = {mod.q}: k = {mod.k} bits, m = floor(2^{2 * mod.k}/q) = {mod.m}")
print(f"m has {mod.m.bit_length()} bits (always k+1)\n")

a, b = 4321, 6789
soft = barrett_mul_soft_trace(a, b, mod)
hw = barrett_mul_hw_trace(a, b, mod)
print(f"{a} * {b} mod {q}")
print(f"  plain:    t2={soft.t2:6d}  t4={soft.t4:6d}  z={soft.z}")
print(f"  hw-shape: t2={hw.t2:6d}  t4={hw.t4:6d}  z={hw.z}")
print(f"  check: hw t4 - soft t4 = {hw.t4 - soft.t4} (always 0 or q={q})")
print(f"  both equal (a*b) % q = {(a * b) % q}\n")

# the split multiplier behind every product in the hw variant
p = step_multiply(0xFFFF_FFFF, 0xFFFF_FFFF, 32)
print("step multiplier, W=32, worst case (2^32-1)^2:")
print(f"  hi=0x{p.hi:08X} lo=0x{p.lo:08X} -> value=0x{p.value:016X}")
print(f"  exact: {p.value == 0xFFFF_FFFF * 0xFFFF_FFFF}")

# count how often the ladder actually needs the 2q branch
mod_small = barrett_precompute(257)
branches = {0: 0, 1: 0, 2: 0}
for x in range(257):
    for y in range(257):
        t4 = barrett_mul_hw_trace(x, y, mod_small).t4
        branches[t4 // 257] += 1
print(f"\nladder usage over all pairs mod 257: "
      f"no-sub {branches[0]}, -q {branches[1]}, -2q {branches[2]}")
