"""Why row-rotated placement removes every butterfly bank conflict.

Butterflies pair coefficients at power-of-two distances. Under plain
row-major storage, a[0] and a[8] (N=16) land in the same bank and a
dual-port RAM cannot feed one butterfly both operands in one cycle.
Rotating row r right by r banks separates every such pair, for every
power-of-two distance at once.
"""

from nttsim.layout import make_layout, verify_conflict_free

N = 16
for kind in ("sequential", "shifted"):
    layout = make_layout(N, kind)
    print(f"{kind} placement (rows = addresses, columns = banks):")
    grid = [["  "] * layout.n for _ in range(layout.n)]
    for i in range(N):
        addr, bank = layout.place(i)
        grid[addr][bank] = f"{i:2d}"
    for row in grid:
        print("   " + " ".join(row))
    b0 = layout.place(0)[1]
    b8 = layout.place(8)[1]
    verdict = "collide" if b0 == b8 else "are separated"
    print(f"   a[0] -> bank {b0}, a[8] -> bank {b8}: they {verdict}\n")

print("exhaustive audit over all pairs (i, i +/- 2^t):")
for n_total in (16, 256, 4096, 16384):
    for kind in ("shifted", "sequential"):
        report = verify_conflict_free(n_total, kind)
        print(f"  N={n_total:>6} {kind:>10}: {len(report.violations):>6} violations "
              f"in {report.pairs_checked} pairs")
