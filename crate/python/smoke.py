"""Smoke test for the sobolev_dfo_py extension.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`, then run
`python python/smoke.py`.
"""

import math

import sobolev_dfo_py as sd


def main():
    # seminorm of 0.5|x|^2 over the unit ball in 2D: |grad|^2 = r^2, integral = pi/2
    q = sd.QuadraticModel([0.0, 0.0], 0.0, [0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    assert abs(q.seminorm([0.0, 0.0], 1.0) ** 2 - math.pi / 2) < 1e-12
    assert abs(q([1.0, 2.0]) - 2.5) < 1e-15

    pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    vals = [p[0] ** 2 + 3 * p[1] for p in pts]
    model = sd.solve_p1(pts, vals, [0.0, 0.0], 1.0)
    for p, v in zip(pts, vals):
        assert abs(model(p) - v) < 1e-10
    lag = sd.lagrange_values(pts, [0.0, 0.0], 1.0, pts[2])
    assert all(abs(l - (1.0 if j == 2 else 0.0)) < 1e-10 for j, l in enumerate(lag))

    rep = sd.minimize(lambda x: sum((v - 1.0) ** 2 for v in x), [0.0] * 4, rhoend=1e-7)
    assert rep.status == "converged" and rep.fbest < 1e-10, rep

    try:
        sd.minimize(lambda x: 1 / 0, [0.0, 0.0])
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("objective exception was swallowed")

    rep = sd.solve("sphere", 6)
    assert rep.fbest <= 1e-10
    try:
        sd.solve("nosuch", 6)
    except ValueError as e:
        assert "nosuch" in str(e)
    else:
        raise AssertionError("unknown problem accepted")

    assert "arwhead" in sd.problem_names()
    perm = sd.random_permutation(8, 42)
    assert sorted(perm) == list(range(8))

    csv = sd.run_suite(problems=["sphere", "arwhead"], dims=[6], perms=3, rhoends=[1e-2], seed=7)
    assert csv == sd.run_suite(problems=["sphere", "arwhead"], dims=[6], perms=3, rhoends=[1e-2], seed=7)
    curves = dict(sd.profile(csv))
    assert sorted(curves) == ["esymbp", "esymbs", "symb"]
    for pts in curves.values():
        assert all(a[0] <= b[0] and a[1] <= b[1] for a, b in zip(pts, pts[1:]))
    assert sd.profile_csv(csv, "rstd").startswith("solver,tau,rho")
    assert "<svg" in sd.profile_svg(csv)
    mean, std, rstd, count = sd.summarize([10, 12, 14])
    assert count == 3 and abs(mean - 12) < 1e-12 and abs(rstd - std / mean) < 1e-12

    print("smoke ok")


if __name__ == "__main__":
    main()
