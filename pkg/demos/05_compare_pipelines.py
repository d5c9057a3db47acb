"""Quantum versus classical LOF, end to end, on the toy line dataset.

The quantum pipeline estimates all pairwise distances by amplitude estimation,
finds k-distances by minimum search, counts and collects neighborhoods, builds
densities in reversible fixed point, and amplitude-estimates each outlier
factor.  The manifest compares every estimate against the brute-force oracle
and against the derived error budget

    |LOF_hat - LOF| <= E * eps_lof + 8 * eps_dist / P.
"""

import json

from qlof import QuantumLofPipeline, RunConfig, from_points

ds = from_points([[0.0], [1.0], [2.0], [10.0]])
config = RunConfig(k=2, delta=1.5, seed=7, backend="exact")
manifest = QuantumLofPipeline(ds, config).run()

budget = manifest["error_budget"]
print("error budget:")
for key in ("eps_dist", "eps_lof", "ratio_bound", "dist_floor_sq", "total_bound"):
    print(f"  {key:<14} {budget[key]:.6f}")

print("\nindex  classical  quantum    |error|    flagged (c/q)")
for pt in manifest["points"]:
    print(
        f"{pt['index']:>5}  {pt['lof_classical']:<9.5f}  {pt['lof_quantum']:<9.5f}"
        f"  {pt['abs_error']:.2e}   {pt['flagged_classical']} / {pt['flagged_quantum']}"
    )

print(f"\nflag sets match: {manifest['flags_match']}")
print(f"near-threshold delta: {manifest['near_threshold_delta']}")

print("\nquery-ledger totals per stage:")
ledger = manifest["ledger"]
for stage in ("step1", "step2", "step3"):
    total = sum(v for k, v in ledger.items() if k.startswith(stage))
    print(f"  {stage}: {total}")

print("\nfull manifest keys:", sorted(manifest))
print(json.dumps(manifest["error_budget"], indent=2, sort_keys=True))
