"""Build a sensor graph, look at its spectrum and draw signals under each prior.

Run with ``python3 demos/01_graph_and_priors.py``.
"""

import numpy as np

from gssdc.graphcore import build_knn_sensor_graph, laplacian, spectral_decomposition
from gssdc.priors import (gen_gmrf_signal, gen_pgs_signal, gmrf_lowpass, make_smoothness_prior,
                          make_stochastic_prior, make_subspace_prior, pgs_exp, sm_ratio, st_gauss)

g = build_knn_sensor_graph(64, k=6, seed=1)
basis = spectral_decomposition(laplacian(g))
print(f"{g.n_vertices} vertices, {int(np.count_nonzero(g.weights) / 2)} edges, "
      f"lambda_max = {basis.lambda_max:.3f}")
print("smallest eigenvalues:", np.round(basis.eigenvalues[:4], 4))

# Share of the draw's energy on the lowest graph frequencies.
x = gen_gmrf_signal(basis, gmrf_lowpass(0.1), seed=0).x
energy = basis.gft(x) ** 2
print(f"GMRF draw: {energy[:8].sum() / energy.sum():.0%} of energy in the first 8 frequencies")

sb = make_subspace_prior(basis, K=8, response=pgs_exp(1.5))
x_sb = gen_pgs_signal(sb, seed=0).x
coef, *_ = np.linalg.lstsq(sb.A, x_sb, rcond=None)
print(f"PGS draw lies in range(A): residual {np.linalg.norm(sb.A @ coef - x_sb):.1e}")

# Each prior exposes a matrix B; a good operator must make B S full rank.
for name, prior in [("subspace", sb),
                    ("smoothness", make_smoothness_prior(basis, sm_ratio(0.1))),
                    ("stochastic", make_stochastic_prior(basis, st_gauss(), 0.1 * np.eye(12)))]:
    print(f"{name:>10}: B has shape {prior.B.shape}")
