"""The rate as a function of the noise-to-noise ratio alone.

Sweeping alpha = n/(m+w) exposes the full story in one dimension: the
uplink flow falls with alpha, the downlink flow rises, and their sum has a
single interior minimum at the quartic root alpha*.  The sweep also emits
the alternative uplink-term convention (half the log of the variance ratio
itself, without the +1) to show it is a different curve with a different
minimizer, not a constant offset.
"""

import numpy as np

from privmask import SystemParams, mi_rate_from_nnr, mi_rate_from_nnr_alt, optimal_nnr

SYS = SystemParams(a=1.0, k=-1.0, w=0.05)
ALPHAS = np.geomspace(0.01, 100, 601)

up = np.empty_like(ALPHAS)
down = np.empty_like(ALPHAS)
total = np.empty_like(ALPHAS)
alt = np.empty_like(ALPHAS)
for i, alpha in enumerate(ALPHAS):
    rates = mi_rate_from_nnr(SYS, float(alpha))
    up[i], down[i], total[i] = rates.uplink, rates.downlink, rates.total
    alt[i] = mi_rate_from_nnr_alt(SYS, float(alpha))

report = optimal_nnr(SYS.a, SYS.k)
i_min = int(np.argmin(total))
print(f"plant: a={SYS.a}, k={SYS.k}")
print(f"sweep minimum   : alpha={ALPHAS[i_min]:.4f}, rate={total[i_min]:.6f} nats/step")
print(f"quartic solution: alpha={report.alpha_star:.4f}, rate={report.mi_min:.6f} nats/step")
print(f"alt-convention minimum sits elsewhere: alpha={ALPHAS[int(np.argmin(alt))]:.4f}")
print("\n  alpha    uplink  downlink     total")
for j in range(0, len(ALPHAS), 75):
    print(f"{ALPHAS[j]:8.3f} {up[j]:9.4f} {down[j]:9.4f} {total[j]:9.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(ALPHAS, total, label="total")
    ax.semilogx(ALPHAS, up, "--", label="uplink")
    ax.semilogx(ALPHAS, down, "--", label="downlink")
    ax.semilogx(ALPHAS, alt, ":", label="total (alt uplink convention)")
    ax.axvline(report.alpha_star, color="k", lw=0.8)
    ax.set_xlabel(r"noise-to-noise ratio $\alpha$")
    ax.set_ylabel("nats/step")
    ax.legend()
    fig.tight_layout()
    out = __file__.replace(".py", ".png")
    fig.savefig(out, dpi=120)
    print(f"\nsaved sweep plot to {out}")
except ImportError:
    print("\nmatplotlib not available, skipping the plot")
