# %% [markdown]
# # Completely positive maps
#
# Kraus operators act as `rho -> sum_k A_k^dag rho A_k`; the dual map on
# observables is `B -> sum_k A_k B A_k^dag`.

# %%
import numpy as np

from curvedqit.channel import (
    adjoint_channel,
    apply,
    choi_distance,
    choi_from_kraus,
    choi_from_map,
    kraus_from_choi,
    random_channel,
    replacement_channel,
)
from curvedqit.hilbert import ProductSpace, maximally_mixed, random_density_matrix, random_hermitian

rng = np.random.default_rng(2)
space = ProductSpace((4,))
t = random_channel(space, 3, rng)
rho = random_density_matrix(space, rng)
b = random_hermitian(space, rng)

lhs = (apply(t, rho) @ b).trace()
rhs = (rho @ adjoint_channel(t)(b)).trace()
print("duality residual:", abs(lhs - rhs))

# %% [markdown]
# Choi matrix and back: the recovered Kraus set differs from the original
# but defines the same map.

# %%
c = choi_from_kraus(t)
t_back = kraus_from_choi(c)
print("Kraus rank:", len(t_back.kraus_ops))
print("Choi round trip:", choi_distance(c, choi_from_kraus(t_back)))

# %% [markdown]
# The transpose is positive but not completely positive.

# %%
print("transpose Choi min eigenvalue:", choi_from_map(ProductSpace((2,)), lambda m: m.T).min_eigenvalue())

# %% [markdown]
# A map that forgets its input: every state goes to the same output, so a
# pure input becomes mixed.

# %%
forget = replacement_channel(maximally_mixed(space))
out = apply(forget, random_density_matrix(space, rng, rank=1))
print("output purity:", (out @ out).trace().real)
