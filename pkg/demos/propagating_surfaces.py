"""Propagating surfaces on a graded periodic square and on the unit disk.

Prints probe values at a few times; phi rises monotonically everywhere
because phi_t = sqrt(|grad phi|^2 + 1) >= 1.

    python demos/propagating_surfaces.py
"""
import numpy as np

from hjdg.cases import get_case, simulate
from hjdg.timeloop import integrate


if __name__ == "__main__":
    for name in ("surface", "surface-disk"):
        case = get_case(name)
        res = simulate(case, k=2, t_final=0.0, with_norms=False)
        field, model = res.field, case.model()
        pts = np.array(case.probes)
        print(f"\n{name}: {field.coeffs.shape[0]} triangles, probes {case.probes}")
        for t in (0.0, 0.2, 0.4, 0.6):
            if t > 0:
                field, _ = integrate(field, model, res.params, t)
            vals, _ = field.sample(pts)
            print(f"  t={t:.1f}  " + "  ".join(f"{v:8.4f}" for v in vals))
