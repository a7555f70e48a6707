"""Convergence tables for the smooth 1D problems.

Runs linear transport with P1-P3 and Burgers / nonconvex cos with P2,
printing L1/L2/Linf errors and observed orders.

    python demos/smooth_convergence.py
"""
from hjdg import analysis as an
from hjdg.cases import simulate


def table(name, k, ns, **kw):
    errors, hs = [], []
    for n in ns:
        res = simulate(name, k=k, n=n, **kw)
        errors.append(res.norms)
        hs.append(float(res.field.mesh.widths.max()))
    report = an.convergence_orders(errors, hs, labels=ns, metadata=dict(case=name, k=k))
    print(f"\n{name}  P{k}")
    print(report.to_markdown())


if __name__ == "__main__":
    for k in (1, 2, 3):
        table("linsmth", k, [20, 40, 80, 160])
    table("burgers1d", 2, [20, 40, 80, 160])
    table("burgers1d", 2, [20, 40, 80, 160], perturb=0.4, seed=7)
    table("cos1d", 2, [20, 40, 80, 160])
