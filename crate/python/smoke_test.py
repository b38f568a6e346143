"""Quick check that the compiled extension imports and runs end to end.

    pip install --no-build-isolation ./crates/python
    python3 python/smoke_test.py
"""

import numpy as np

import nambuq as nb

SX = [[0, 1], [1, 0]]
SZ = [[1, 0], [0, -1]]
PLUS = [[0.5, 0.5], [0.5, 0.5]]


def check(name, ok, detail=""):
    print(f"{'ok' if ok else 'FAIL'}  {name} {detail}")
    if not ok:
        raise SystemExit(1)


check("shannon", abs(nb.shannon([0.25] * 4) - 2.0) < 1e-12)
check("renyi_star positive", nb.renyi_star([0.5, 0.5], 2.0) > 0)

traj = nb.evolve(SZ, PLUS, nb.Generator.quadratic(), np.pi, 1e-3, record_every=50)
final = np.array(traj.states[-1])
check("linear flow returns to |+>", np.abs(final - np.array(PLUS)).max() < 1e-8)

rho = nb.random_density(3, 1, 11)
h = np.diag([1.0, 0.0, -1.0]).tolist()
gen = nb.Generator.renyi_pure(2.5)
t = nb.evolve(h, rho, gen, 2.0, 1e-3, record_every=100)
drift = t.max_eigenvalue_drift()
dev = t.deviation_from_linear(h, 2.5 / (2 * 1.5))
check("pure state eigenvalues conserved", drift < 1e-9, f"drift={drift:.2e}")
check("pure state follows rescaled linear flow", dev < 1e-8, f"dev={dev:.2e}")

sx_avg = t.observable(h)
check("observable series length", len(sx_avg) == len(t))

try:
    nb.evolve(SZ, PLUS, nb.Generator.renyi_hom(3.0), 5.0, 0.2, tolerance=1e-14)
except nb.DriftAlarm as e:
    _, partial = e.args
    check("drift alarm carries partial trajectory", len(partial) >= 1)
else:
    check("drift alarm raised", False)

rows = nb.verify("brackets", seed=2, trials=10)
check("verify brackets", all(r["pass"] for r in rows if r["assertable"]), f"({len(rows)} rows)")

print("smoke test passed")
