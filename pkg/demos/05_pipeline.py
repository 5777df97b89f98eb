"""
Compress, then classify
=======================

The same harness the command line uses: learn a two-row principal transform,
reduce the labelled channels with it and train the classifier on three
parameters instead of twenty-one.  Results land in ``pipeline_out/``.
"""
from entangled_sensing.experiments import preset, run_experiment

config = preset("pipeline", fast=True)
run = run_experiment(config, "pipeline_out")
s = run["summary"]
for label in ("full", "reduced"):
    print(f"{label:>8}: {s[label]['parameters']:2d} parameters, "
          f"median converged error {s[label]['converged_median']:.4f}")
print("overlap of the learned subspace with the labelling plane:",
      [round(a, 3) for a in s["pc_alignment"]])
print("files:", ", ".join(run["files"]))
