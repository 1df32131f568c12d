"""What no filter can see: state jumps in the kernel of the observation matrix.

The 3-d tracking benchmark observes coordinates 1 and 3 but never
coordinate 2, which only becomes visible one step later through the
transition.  A state substitution shifts coordinate 2; at filtering time
every variant misses it (the error jumps by orders of magnitude), while the
smoother recovers part of it retroactively.  Scoring in the
observation-adapted seminorm, which ignores the invisible direction, keeps
the tracking filter's error bounded no matter how violent the substitution.
"""

import numpy as np

from robustkalman import (ContaminationSpec, PointMass, Scenario, build_preset,
                          gain_schedule, run_study)
from robustkalman.linalg import pseudo_inverse, symmetrize

model = build_preset("simb")
T, t_star = 50, 35

spec = ContaminationSpec(r_io=0.1, dist_io=PointMass(np.array([0.0, 50.0, 0.0])))
report = run_study(Scenario(model=model, regimes=("ideal", "io"), n_runs=4000,
                            T=T, t_star=t_star, seed=3, contamination=spec,
                            seminorm=True))

print("per-coordinate filter MSE at the scoring time (4000 replications):")
print(f"{'variant':>10} | {'regime':>6} | {'coord 1':>9} {'coord 2':>9} "
      f"{'coord 3':>9}")
for v in report.variant_labels:
    for regime in ("ideal", "io"):
        c = report.coord_mse(regime, v)
        print(f"{v:>10} | {regime:>6} | {c[0]:9.4f} {c[1]:9.3f} {c[2]:9.5f}")

print("\ncoordinate 2 lies in the kernel of the observation matrix: its")
print("io-regime error dwarfs the ideal one for every variant, while the")
print("observed coordinates stay well tracked by the tracking filter.\n")

b = report.calibration["b"]["io"]["b"][-1]
sched = gain_schedule(model, T)
i = t_star - 1
B = symmetrize(sched.Z[i] @ sched.Sigma_pred[i] @ sched.Z[i].T)
bound = 2 * np.trace(pseudo_inverse(B) @ (sched.V[i] + b * b * np.eye(model.q)))
row = report.rows[("io", "rls-io", "filter")]
print(f"tracking filter under substitutions of height 50:")
print(f"  Euclidean MSE        {row.mse:10.3f}   (dominated by the kernel)")
print(f"  seminorm MSE         {row.mse_seminorm:10.3f}")
print(f"  theoretical bound    {bound:10.3f}   (2 tr(B^-(V + b^2 I)))")
