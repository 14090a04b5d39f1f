"""Fake Brownian motion from independent non-Gaussian coefficients.

Any mean-zero unit-variance coefficient law yields a process with
Brownian covariance, uncorrelated increments, and unit quadratic
variation.  This script draws one path for each shipped law, plots them
with their quadratic-variation curves, and checks the covariance at a
few points against t ^ s.

Run:  python demos/02_fake_brownian_motion.py
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

import schauderpath as sp

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

DEPTH = 15
LAWS = ["standard-normal", "uniform-sqrt3", "beta22", "betaHalfHalf"]
COLORS = ["black", "crimson", "royalblue", "seagreen"]

fig, (ax_path, ax_qv) = plt.subplots(1, 2, figsize=(11, 4))
seq = sp.build_dyadic(1.0, DEPTH)

for law, color in zip(LAWS, COLORS):
    cfg = sp.PathConfig(seed=5, depth=DEPTH, count=1, marginal=sp.MarginalSpec(law=law))
    ens = sp.fake_bm_paths(cfg)
    ax_path.plot(ens.grid, ens.values[0], lw=0.7, color=color, label=law)
    # quadratic variation along the levels accumulates like t
    curve = sp.pth_variation_curve(ens.values[0], ens.grid, seq, DEPTH, 2.0)
    ax_qv.plot(seq.points(DEPTH), curve, lw=1.0, color=color, label=law)
    print(f"{law:15s} QV(1) at level {DEPTH}: "
          f"{sp.pth_variation(ens.values[0], ens.grid, seq, DEPTH, 2.0, 1.0):.4f}")

ax_qv.plot([0, 1], [0, 1], "k--", lw=0.8, label="t")
ax_path.set_title("one path per coefficient law (same seed)")
ax_qv.set_title("quadratic variation curves")
for ax in (ax_path, ax_qv):
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(out / "fake_bm.png", dpi=120)
print("wrote", out / "fake_bm.png")

# --- second moments match Brownian motion ------------------------------------
# with the endpoint term included, E[Y(t)Y(s)] = t ^ s
cfg = sp.PathConfig(seed=11, depth=12, count=4000,
                    marginal=sp.MarginalSpec.mixed(), include_endpoint=True)
table = sp.empirical_moments(sp.fake_bm_paths(cfg), [(0.25, 0.5), (0.25, 0.75), (0.5, 0.5)])
print("\njoint second moments over 4000 paths (mixed coefficients):")
for tt, v, se, ref in table.rows():
    print(f"  E[Y({tt[0]})Y({tt[1]})] = {v:+.4f} +- {se:.4f}   target {ref:+.4f}")

# masking a deterministic field (keep each coefficient with prob. 1/2)
field = sp.deterministic_example_b(16)
seq16 = sp.build_dyadic(1.0, 16)
masked = sp.apply_bernoulli_mask(field, 0.5, seed=3)
print("\nsqrt(m) field: qv(15) =", round(sp.qv_from_coeffs_dyadic(field, seq16, 15), 4),
      " masked qv(15) =", round(sp.qv_from_coeffs_dyadic(masked, seq16, 15), 4))
