# %% [markdown]
# # Measuring the Trotter error itself
#
# An ancilla-controlled circuit comparing `U` and `V` on a maximally mixed
# register returns `0` with probability `||U - V||_F^2 / 2^(n+2)`. Extrapolating
# the distance between fractional steps and a full step to `s = 0` estimates
# how far one Trotter step is from exact evolution.

# %%
import warnings

from scipy.stats import unitary_group

from chebtrot import build_tfim, estimate_trotter_error, frobenius_circuit_probability, frobenius_probability

warnings.simplefilter("ignore")
U, V = unitary_group.rvs(4, random_state=0), unitary_group.rvs(4, random_state=1)
print("circuit:", frobenius_circuit_probability(U, V), " trace formula:", frobenius_probability(U, V))

# %%
model = build_tfim(2, 1.0, 1.0)
for n in (2, 4, 6):
    res = estimate_trotter_error(model, order=2, t=0.5, n=n, a=0.5)
    print(f"n={n}  d_hat={res.estimate:.8f}  direct={res.exact_reference:.8f}")
