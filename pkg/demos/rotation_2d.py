"""Solid-body rotation of a cone and a Gaussian on Cartesian meshes.

The smooth Gaussian converges at about third order; the cone, which has
kinks, only at about 1.5. Writes an SVG of the rotated cone.

    python demos/rotation_2d.py [out.svg]
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hjdg.cases import simulate
from hjdg.field import sample_points


if __name__ == "__main__":
    for name, ns in (("rotation-smooth", (20, 40, 80)), ("rotation", (20, 40, 80))):
        # the cone at N = 160 takes several minutes on one core
        prev = None
        for n in ns:
            L1 = simulate(name, k=2, n=n).norms[0]
            order = "" if prev is None else f"  order {np.log2(prev / L1):.2f}"
            print(f"{name:16s} N={n:3d}  L1={L1:.3e}{order}")
            prev = L1
    res = simulate("rotation", k=2, n=40, with_norms=False)
    elems, ref, pts = sample_points(res.field.mesh, 3)
    vals, _ = res.field.evaluate_reference(elems, ref)
    fig, ax = plt.subplots(figsize=(5, 4))
    tc = ax.tricontourf(pts[:, 0], pts[:, 1], vals, levels=30)
    fig.colorbar(tc)
    ax.set_aspect("equal")
    ax.set_title("cone after rotation, t = 1")
    fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "rotation.svg")
