"""Nonconvex quartic Hamiltonian with corner data, with and without minmod.

The limited scheme converges at first order to the exact solution for both
even and odd N. Without the limiter the runs settle on a wrong solution,
so the error does not shrink with N.

    python demos/quartic_riemann.py
"""
from hjdg.cases import simulate


if __name__ == "__main__":
    print(" N     L1(minmod)   L1(none)")
    for n in (40, 41, 80, 81, 160, 161):
        limited = simulate("quartic1d", k=2, n=n).norms[0]
        raw = simulate("quartic1d", k=2, n=n, limiter="none").norms[0]
        print(f"{n:4d}  {limited:.3e}    {raw:.3e}")
