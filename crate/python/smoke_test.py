"""Smoke test for the shocknozzle Python bindings.

Build the extension first, e.g.
    cargo build --release -p shocknozzle-python --features extension-module
    cp target/release/libshocknozzle_py.so python/shocknozzle_py.so
or `maturin develop -m crates/python/Cargo.toml --features extension-module`.
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import shocknozzle_py as sn

CONFIG = """
[gas]
gamma = 1.4

[nozzle]
l0 = 0.0
l1 = 1.0
rho0 = 1.0
u0 = 2.0

[force]
coeffs = [0.1]

[exit]
ls = 0.5
epsilon = 1e-3

[grid]
n1 = 17
n2 = 17
"""


def main():
    gas = sn.GasModel(1.4)
    rho, u = gas.rh_jump(1.0, 2.0)
    assert abs(rho * u - 2.0) < 1e-12 and u < 2.0

    nozzle = sn.Nozzle(0.0, 1.0, 1.0, 2.0, gas, [0.1])
    p1, p0 = nozzle.pressure_window()
    assert p1 < p0
    pe = nozzle.exit_pressure_of_shock(0.5)
    bg = nozzle.solve_shock_position(pe)
    assert abs(bg.ls - 0.5) < 1e-8, bg.ls
    assert max(bg.rh_residuals()) < 1e-10

    problem = sn.ShockProblem(bg, 17, 17)
    zero = problem.iterate(0.0)
    assert zero.iterations == 1 and all(v == 0.0 for row in zero.v1 for v in row)

    sol = problem.iterate(1e-3, k=1)
    assert sol.compatible and sol.iterations < 50
    assert all(r < 1 for r in sol.contraction_ratios)
    res = sol.residuals()
    assert res["rh_exact"] < 1e-10 and res["entropy_ok"]
    phys = problem.to_physical(sol)
    assert min(min(row) for row in phys["rho"]) > 0
    assert all(math.isfinite(x) for x in phys["shock"])

    try:
        sn.GasModel(0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("gamma <= 1 must raise ValueError")

    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "run.toml")
        with open(cfg, "w") as f:
            f.write(CONFIG)
        out = os.path.join(tmp, "out")
        print("\n".join(sn.run("perturb", cfg, out)))
        passed, checks = sn.verify(out)
        assert passed, [c for c in checks if not c[1]]
        try:
            sn.verify(os.path.join(tmp, "missing"))
        except OSError:
            pass
        else:
            raise AssertionError("missing directory must raise OSError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
