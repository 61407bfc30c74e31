"""The three proximity operators behind the design iteration.

Run with ``python3 demos/02_prox_operators.py``.
"""

import numpy as np

from gssdc.partition import VertexPartition
from gssdc.proxops import (DualBlock, prox_f2, prox_h, prox_h_conj, prox_nuclear,
                           prox_topk_rows, row_norms)

M = np.array([[3.0, 4.0], [0.3, 0.4], [1.0, 1.0], [2.0, 0.0]])

# Row 0 is mandatory, row 3 forbidden, rows 1 and 2 undecided.
part = VertexPartition.from_sets(4, mandatory=[0], forbidden=[3], z=2)
out = prox_f2(M, part, gamma=1.0, lam=1.0, delta=0.1)
print("prox_f2 row norms:", np.round(row_norms(out), 4))
print("  mandatory row only rescaled, small undecided row zeroed, forbidden row zeroed")

print("prox_nuclear singular values:",
      np.round(np.linalg.svd(prox_nuclear(M, 1.0), compute_uv=False), 4))

# The top-K penalty shrinks the largest rows and leaves row directions alone.
two = np.array([[5.0, 0.0], [0.0, 1.0]])
print("top-1 prox norms, exact:        ", row_norms(prox_topk_rows(two, 2.0, 1)))
print("top-1 prox norms, paper-literal:", row_norms(prox_topk_rows(two, 2.0, 1,
                                                                  method="paper-literal")))

# The dual step uses the conjugate prox, obtained through Moreau's identity.
rng = np.random.default_rng(0)
Z = DualBlock(rng.standard_normal((3, 2)), rng.standard_normal((4, 2)))
gamma = 0.5
resid = prox_h_conj(Z, gamma, 1.0, 2) + gamma * prox_h(Z / gamma, 1 / gamma, 1.0, 2) - Z
print(f"Moreau identity residual: {resid.norm():.1e}")
