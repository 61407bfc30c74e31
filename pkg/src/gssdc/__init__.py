"""Vertex-wise flexible sampling of graph signals with pre-selected vertices.

The designer solves a difference-of-convex program with a double-proximal
gradient iteration and returns a sampling operator whose forbidden rows are
exactly zero.
"""

from .graphcore import (GraphSpec, SpectralBasis, build_knn_sensor_graph, laplacian,
                        load_graph, load_matrix, save_graph, save_matrix,
                        spectral_decomposition)
from .partition import VertexPartition, greedy_select, make_design
from .priors import (SmoothnessPrior, StochasticPrior, SubspacePrior, add_noise,
                     gen_gmrf_signal, gen_pgs_signal, make_smoothness_prior,
                     make_stochastic_prior, make_subspace_prior, parse_response,
                     gmrf_lowpass, pgs_exp, sm_ratio, st_gauss)
from .proxops import (prox_f2, prox_h_conj, prox_nuclear, prox_topk_rows,
                      pseudo_inverse)
from .recovery import (recover, recover_smoothness, recover_stochastic,
                       recover_subspace, sample, selection_operator)
from .solver import (PARAMETER_PRESETS, SamplingOperator, SolverConfig, SolverTrace,
                     design_sampling_operator, objective_value)
from .evaluation import (ExperimentConfig, count_contributive, ingest_signals, mse_db,
                         run_experiment, run_trial)

__version__ = "0.1.0"
