"""Regenerate tests/frozen_values.py from the independent oracles.

Run from the repository root:

    python tests/make_frozen_values.py > tests/frozen_values.py

The shooting oracle is scipy-based (DOP853, rtol 1e-12) and the closed
forms are derived with sympy; nothing here touches the package under test.
"""
from __future__ import annotations

import sys

import sympy as sp

from oracle_tools import oracle_ground_state


def closed_forms():
    x, r = sp.symbols("x r", real=True)
    # potential-term integral of the first Dirichlet eigenfunction on (-1, 1)
    ef = sp.cos(sp.pi * x / 2)
    moment_cos = sp.integrate(x**2 * ef**2, (x, -1, 1))
    # radial Laplacian of exp(-r^2) in three dimensions
    u = sp.exp(-(r**2))
    neg_lap = sp.simplify(-(sp.diff(u, r, 2) + 2 / r * sp.diff(u, r)))
    expected = sp.simplify((4 * r**2 - 6) * sp.exp(-(r**2)))
    assert sp.simplify(neg_lap + expected) == 0
    return float(moment_cos), "(6 - 4 r^2) exp(-r^2)"


def main() -> None:
    out = sys.stdout
    out.write('"""Frozen oracle values; regenerate with make_frozen_values.py."""\n\n')
    out.write("GROUND_STATES = {\n")
    for N, b in [(1, 0.5), (2, 0.5), (3, 1.0)]:
        res = oracle_ground_state(N, b)
        assert res["id_residual_grad"] < 1e-10 and res["id_residual_nl"] < 1e-10
        out.write(f"    ({N}, {b}): {{\n")
        for key in ["s_star", "q_at_1e-4", "l2_sq", "grad_sq", "nonlinear_int", "a_star"]:
            out.write(f"        {key!r}: {float(res[key])!r},\n")
        out.write(
            "        'moments': {"
            + ", ".join(f"{p!r}: {float(v)!r}" for p, v in res["moments"].items())
            + "},\n"
        )
        out.write("    },\n")
    out.write("}\n\n")
    mom_cos, lap_form = closed_forms()
    out.write("# integral of x^2 cos^2(pi x / 2) over (-1, 1), from sympy\n")
    out.write(f"MOMENT_COS_SQ = {mom_cos!r}\n\n")
    out.write(f"# sympy-checked: -Lap exp(-r^2) in 3-D equals {lap_form}\n")


if __name__ == "__main__":
    main()
