"""A reduced Monte-Carlo benchmark study, table-style.

Replicates contaminated trajectories for the two benchmark models, runs
every variant's filter and smoother, and prints the empirical MSE at the
scoring time in the classic three-row layout (clean / observation outliers /
state outliers).  Reports export to CSV (plus raw per-run squared errors)
and JSON; identical seeds reproduce them byte for byte.

The full-size study (10000 replications) is what the acceptance suite runs;
here 2000 keep the demo quick.  Contaminated-row values are heavy-tailed
across seeds (Cauchy draws), the orderings are the stable part.
"""

from pathlib import Path

from robustkalman import Scenario, export_report, run_study

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

for preset in ("sima", "simb"):
    report = run_study(Scenario(model=preset, regimes=("ideal", "ao", "io"),
                                n_runs=2000, T=50, t_star=35, seed=41))
    print(f"\nModel {preset!r}: empirical MSE at t=35, 2000 replications")
    header = f"{'':>6} | " + " | ".join(f"{v:>18}" for v in report.variant_labels)
    print(header + "   (filter / smoother)")
    for regime in report.regimes:
        cells = []
        for v in report.variant_labels:
            cells.append(f"{report.mse(regime, v):8.3f} /"
                         f"{report.mse(regime, v, 'smoother'):8.3f}")
        print(f"{regime:>6} | " + " | ".join(f"{c:>18}" for c in cells))
    csv_path = OUT / f"study_{preset}.csv"
    export_report(report, "csv", csv_path)
    export_report(report, "json", OUT / f"study_{preset}.json")
    print(f"exported {csv_path} (+ _raw.csv companion) and .json")

print("""
How to read the tables: in the clean row the classical filter is best by a
small margin (the robustness premium).  In the observation-outlier row the
clipped filter wins by orders of magnitude.  In the state-outlier row the
tracking filter wins; the clipped filter, limited to tiny corrections,
cannot follow at all.  Smoothing helps in the clean and observation-outlier
rows; after state substitutions the backward pass mixes in pre-jump
information and can hurt, which is visible in the io row.
""")
