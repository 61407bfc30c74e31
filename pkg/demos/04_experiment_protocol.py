"""Repeated trials: designed operator against random vertex sampling with noise.

Run with ``python3 demos/04_experiment_protocol.py`` (about a minute).
The same protocol is available from the shell as ``gssdc experiment``.
"""

from dataclasses import replace

from gssdc.evaluation import ExperimentConfig, run_experiment

cfg = ExperimentConfig(prior="st", n_vertices=64, n_mandatory=6, n_forbidden=6, z=12,
                       n_samples=12, noise_variance=0.1, trials=5, seed=0)

for sampler in ("designed", "random"):
    res = run_experiment(replace(cfg, sampler=sampler))
    agg = res.aggregate
    print(f"{sampler:>8}: MSE {agg['mse_db']:.2f} dB (mean of dB {agg['mean_of_db']:.2f}), "
          f"contributive {agg['contributive_mean']:.1f}, {agg['n_ok']}/{agg['n_trials']} ok")
