"""Smoke test for the gtsfde Python extension.

Build and run from the repository root:

    cargo build --release -p gtsfde-py
    cp target/release/libgtsfde_py.so python/gtsfde.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import gtsfde  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    w = gtsfde.wsgd_weights(2.0, 4, printed=True)
    assert all(close(a, b, 1e-12) for a, b in zip(w, [1, -5 / 3, 1 / 3, 1 / 3, 0])), w
    assert 1.82 < gtsfde.w2_sign_change(printed=True) < 1.83

    soe = gtsfde.SoeApproximation(0.5, 1e-3, 1.0, 1e-9)
    for t in (1e-3, 0.01, 0.5, 1.0):
        assert abs(soe(t) - t ** -0.5) <= 1e-9 * t ** -0.5 * 10, t

    t = gtsfde.ToeplitzMatrix([4.0, 1.0, 0.5], [4.0, 2.0, 0.25])
    assert t.matvec([1.0, 0.0, 0.0]) == [4.0, 1.0, 0.5]

    op = gtsfde.SystemOperator(2.0, 1.0 / 64, 1.5, 0.7, [1.0] * 63)
    rhs = [math.sin(i) for i in range(63)]
    x, iters, converged, _ = op.solve(rhs)
    assert converged and iters < 40, iters
    back = op.apply(x)
    assert max(abs(a - b) for a, b in zip(back, rhs)) < 1e-9

    pr = gtsfde.Problem.example1(0.5, 1.5, 1.0, 0.7)
    sol = gtsfde.solve(pr, 64, 32, scheme="fast")
    e_inf, _ = sol.errors()
    assert e_inf < 1e-2, e_inf

    rows = gtsfde.run_experiment(
        """
example = "1"
scheme = "direct"
[params]
gamma = [0.5]
alpha = [1.5]
p = [0.7]
[sweep]
axis = "spatial"
m = 256
n = [8, 16]
""",
        timings=False,
    )
    assert len(rows) == 2 and rows[1]["rate_inf"] > 1.5, rows

    failed = [c for c in gtsfde.verify(1) if not c[1]]
    assert not failed, failed
    print("python smoke test passed")


if __name__ == "__main__":
    main()
