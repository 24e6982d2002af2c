"""Privacy-loss surface over the two mask variances.

For a fixed plant, the total rate is *not* monotone in the uplink variance
n: adding more uplink noise eventually leaks more, because the command the
cloud sends back (and can remember) carries k*N_t.  The surface has a
valley along the line n = alpha* (m + w), on which the rate is constant and
minimal.
"""

import numpy as np

from privmask import MaskParams, SystemParams, mi_rate, optimal_nnr

SYS = SystemParams(a=1.0, k=-1.0, w=0.05, q=1.0, r=1.0)
M_GRID = np.linspace(0.01, 0.5, 60)
N_GRID = np.linspace(0.01, 0.5, 60)

report = optimal_nnr(SYS.a, SYS.k)
print(f"plant: a={SYS.a}, k={SYS.k}, w={SYS.w}")
print(f"optimal noise-to-noise ratio alpha* = {report.alpha_star:.6f}")
print(f"minimal rate = {report.mi_min:.6f} nats/step\n")

surface = np.array([[mi_rate(SYS, MaskParams(m=float(m), n=float(n))).total
                     for n in N_GRID] for m in M_GRID])

print("for each m, the best n should sit on n = alpha*·(m+w):")
print(f"{'m':>6} {'argmin n':>9} {'alpha*(m+w)':>12} {'rate':>8}")
for i in range(0, len(M_GRID), 10):
    j = int(np.argmin(surface[i]))
    print(f"{M_GRID[i]:6.3f} {N_GRID[j]:9.3f} {report.alpha_star*(M_GRID[i]+SYS.w):12.3f} "
          f"{surface[i, j]:8.4f}")

line_rates = [mi_rate(SYS, MaskParams(m=float(m), n=report.alpha_star * (float(m) + SYS.w))).total
              for m in M_GRID]
print(f"\nrate along the valley line: min={min(line_rates):.12f} max={max(line_rates):.12f}")
print("(constant to machine precision: the rate depends on the masks only "
      "through their ratio)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    pc = ax.pcolormesh(N_GRID, M_GRID, surface, shading="auto", cmap="viridis")
    ax.plot(report.alpha_star * (M_GRID + SYS.w), M_GRID, "r-", lw=2,
            label=r"n = $\alpha^*$ (m+w)")
    ax.set_xlabel("uplink mask variance n")
    ax.set_ylabel("downlink mask variance m")
    ax.set_title("privacy-loss rate (nats/step)")
    ax.legend()
    fig.colorbar(pc, ax=ax)
    fig.tight_layout()
    out = __file__.replace(".py", ".png")
    fig.savefig(out, dpi=120)
    print(f"\nsaved surface plot to {out}")
except ImportError:
    print("\nmatplotlib not available, skipping the plot")
