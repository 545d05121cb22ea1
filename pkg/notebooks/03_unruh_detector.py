# %% [markdown]
# # An accelerated detector in the inertial vacuum
#
# At acceleration `a = 2 pi` and frequency `omega = 1` the wedge state is
# thermal at unit temperature. The vacuum is built two ways and the
# detector's click probability is compared with the thermal prediction.

# %%
import math

from curvedqit.hilbert import FockSpace, expectation, number_op, partial_trace, trace_distance
from curvedqit.unruh import (
    SqueezingParams,
    compare_representations,
    rindler_thermal_state,
    two_mode_squeezed_state,
)

params = SqueezingParams(a=2 * math.pi, omega=1.0)
print("T =", params.temperature, " r =", params.r)

two = FockSpace(2, 30)
wedge = partial_trace(two_mode_squeezed_state(two, params), keep=[0])
print("<n> =", expectation(wedge, number_op(wedge.space)).real, " 1/(e-1) =", 1 / (math.e - 1))
print("distance to Gibbs:", trace_distance(wedge, rindler_thermal_state(FockSpace(1, 30), params)))

# %% [markdown]
# Click probabilities across cutoffs. The series state agrees with the
# Gibbs state at every cutoff; the state from the exponentiated truncated
# generator converges as the cutoff grows.

# %%
cmp = compare_representations(params, alpha=0.01, cutoffs=(5, 10, 20, 30))
print(cmp.to_csv())
print("ok:", cmp.ok)
