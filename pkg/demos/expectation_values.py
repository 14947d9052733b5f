# %% [markdown]
# # Time-evolved expectation values
#
# `f(s) = <psi| U_s(t)^dag O U_s(t) |psi>` is even in `s`, so the same
# extrapolation applies. Noise on the node values is amplified by at most the
# Lebesgue factor of the grid.

# %%
import math
import warnings

import numpy as np

from chebtrot import GaussianNoise, build_pauli_term, build_tfim, extrapolate_expectation, lebesgue_factor

warnings.simplefilter("ignore")
model = build_tfim(2, 1.0, 1.0)
rho = np.zeros((4, 4))
rho[0, 0] = 1.0
Z0 = build_pauli_term(1.0, "ZI").matrix
t = 1.0
a = math.pi / 20 / ((5 / 3) * model.m * model.hmax * t)  # edge of the analytic domain

# %%
for n in (2, 4, 6):
    res = extrapolate_expectation(model, rho, Z0, order=2, t=t, n=n, a=a)
    single = abs(res.per_node[0].value - res.exact_reference)
    print(f"n={n}  error={res.systematic_error:.2e}  (single node: {single:.2e})")

# %% Gaussian noise of eps / L_n per node keeps the estimate within eps most of the time.
eps, n = 1e-3, 8
base = extrapolate_expectation(model, rho, Z0, 2, t, n, a).estimate
hits = 0
for seed in range(300):
    noisy = extrapolate_expectation(model, rho, Z0, 2, t, n, a, GaussianNoise(eps / lebesgue_factor(n), seed, True))
    hits += abs(noisy.estimate - base) <= eps
print(f"within eps in {hits}/300 trials")
