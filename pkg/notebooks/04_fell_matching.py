# %% [markdown]
# # Matching finitely many expectation values
#
# A state on a large Fock space is matched, on a few observables, by a
# state on a smaller one. The solver returns a density matrix and a
# certificate recomputed from scratch.

# %%
import math

from curvedqit.fell import certify, fock_pair, make_constraints, solve_fell
from curvedqit.hilbert import FockSpace
from curvedqit.unruh import SqueezingParams, rindler_thermal_state

params = SqueezingParams(2 * math.pi, 1.0)
source = rindler_thermal_state(FockSpace(1, 30), params)
pair = fock_pair(source, FockSpace(1, 6))
problem = make_constraints(pair, ["number", "number2"], [1e-6, 1e-6])

sol = solve_fell(problem)
print(sol.status, "after", sol.iterations, "iterations")
print(certify(problem, sol).table())
