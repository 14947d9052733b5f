# %% [markdown]
# # Cost comparison and error bounds
#
# For small target errors, a handful of extrapolation nodes is cheaper than
# shrinking the step of a single product formula. The rigorous bounds are
# loose but dominate the observed errors.

# %%
import warnings

import numpy as np

from chebtrot import build_tfim, cost_scan, crossover_epsilon
from chebtrot.bounds import bernstein_energy_bound
from chebtrot.trotter import st_scheme

warnings.simplefilter("ignore")
model = build_tfim(2, 1.0, 1.0)
rows = cost_scan(model, order=2, t=0.1, eps_values=np.logspace(-2, -8, 7))
for r in rows:
    print(f"eps={r.epsilon:.0e}  single={r.cost_single:>14,}  extrapolated={r.cost_extrap:>14,}  n={r.n_used}")
print("crossover below eps =", crossover_epsilon(rows))

# %%
scheme = st_scheme(2, model.m)
for n in (2, 4, 6, 8):
    b = bernstein_energy_bound(model, scheme, t=0.1, n=n, a=1.0)
    print(f"n={n}  Bernstein bound {b.value:.2e}  (log10 {b.log10_value:.2f})")
