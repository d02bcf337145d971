"""Smoke test for the pinn_py extension module.

Build the module and put it on the path first:

    cargo build -p pinn-py --features extension-module
    cp target/debug/libpinn_py.so python/pinn_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pinn_py  # noqa: E402


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok   {what}")


def main():
    heat = pinn_py.Problem.heat_1d()
    check(heat.input_dim == 2 and heat.output_dim == 1, "heat_1d dimensions")
    u = heat.exact([[0.0, 0.5]])[0][0]
    check(abs(u + 1.0) < 1e-12, "heat_1d exact solution at t=0, x=0.5")

    sets = pinn_py.TrainingSet(heat, "monte_carlo", 256, 32, 32, seed=3)
    check(sets.n_int == 256 and len(sets.interior_points()) == 256, "training set sizes")

    net, e_t, history = pinn_py.train(heat, sets, depth=2, width=12, iters=150, seed=1)
    check(len(history) > 1 and history[-1] <= history[0], "loss decreases")
    check(math.isfinite(e_t), "finite training error")

    e_g, e_g_rel = pinn_py.generalization_error(heat, net, n_test=5000)
    check(e_g_rel < 20.0, f"generalization error {e_g_rel:.3f}%")

    value, grad, hess = net.jet([0.3, 0.2])
    check(len(value) == 1 and len(grad[0]) == 2 and len(hess[0]) == 2, "jet shapes")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "net.json")
        net.save(path)
        again = pinn_py.Network.load(path)
        check(again.eval([[0.3, 0.2]]) == net.eval([[0.3, 0.2]]), "checkpoint round trip")

    x, u = pinn_py.fv_solve(pinn_py.Problem.burgers_rarefaction(0.0), 256)
    check(len(x) == len(u) == 256 and 0.0 <= min(u) and max(u) <= 1.0, "finite-volume solve")

    config = """
[problem]
kind = "heat_1d"
[sampling]
kind = "monte_carlo"
n_int = 128
n_sb = 16
n_tb = 16
[architecture]
depth = 2
width = 8
activation = "tanh"
[optimizer]
choice = "lbfgs"
iters = 50
[evaluation]
n_test = 2000
bound = false
"""
    summary = json.loads(pinn_py.run_experiment(config))
    check(summary["problem"] == "heat_1d", "run_experiment summary")

    try:
        pinn_py.run_experiment("[problem]\nkind = \"heat_1d\"\n")
    except ValueError as e:
        check("sampling" in str(e), "config errors surface as ValueError")
    else:
        raise SystemExit("FAIL: incomplete config accepted")

    print("all good")


if __name__ == "__main__":
    main()
