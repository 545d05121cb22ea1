# %% [markdown]
# # Generalized measurements and their dilation
#
# A three-outcome measurement on a qutrit that is not projective, its
# outcome probabilities, and a projective measurement on a larger space
# that reproduces them.

# %%
import numpy as np

from curvedqit.hilbert import ProductSpace, random_density_matrix
from curvedqit.povm import check_povm, neumark_dilate, probabilities, random_povm, simulate_frequencies

rng = np.random.default_rng(1)
space = ProductSpace((3,))
povm = random_povm(space, 3, rng)
rho = random_density_matrix(space, rng)

print("violations:", check_povm(povm.effects))
print("p =", probabilities(povm, rho))

# %% [markdown]
# The square-root dilation stacks `sqrt(E_k)` into an isometry from the
# qutrit into a register of size 3 times the qutrit. Projecting the register
# gives the same statistics.

# %%
dil = neumark_dilate(povm)
print("dilation dims:", dil.dilation_space.dims)
print("isometry residual:", dil.isometry_residual())
print("max |p_dilated - p|:", np.max(np.abs(dil.probabilities(rho) - probabilities(povm, rho))))

# %% [markdown]
# Finite sampling: with 10^5 shots each empirical frequency sits well inside
# five standard errors of its probability.

# %%
rep = simulate_frequencies(povm, rho, 100_000, seed=7)
print(rep.to_csv())
