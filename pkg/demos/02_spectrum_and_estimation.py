"""
Walsh-Hadamard spectra, exact and sampled
=========================================

Small tables get an exact integer transform. Wide functions are reached
through an oracle and a Hoeffding-sized sample of low-degree coefficients.
"""

import numpy as np

from ptfsynth import registry
from ptfsynth.core import TernaryMask
from ptfsynth.transform import (EstimationPlan, Oracle, exact_coefficients, fwht, hoeffding_samples,
                                label_survey, low_degree_survey)

# %%
# The transform is its own inverse up to 2**n.
v = np.array([3, -1, 4, 1, -5, 9, 2, -6])
print(fwht(v), fwht(fwht(v)) // 8)

# %%
# Majority of three: half on each variable, minus half on the triple product.
spec = exact_coefficients(registry.table("majority_3", 3))
print({k: float(v) for k, v in label_survey(dict(enumerate(spec.coeffs)), 3).items() if v})

# %%
# A 20-variable function evaluated as a polynomial: estimate degree <= 2.
variables = tuple(f"x{i}" for i in range(20))
mask = TernaryMask.from_terms(["x0", "x5", "x7*x9"], [1, 1, -1], variables)
plan = EstimationPlan.for_accuracy(epsilon=0.05, delta=0.01, max_degree=2)
print("samples per estimate", hoeffding_samples(0.05, 0.01))
survey = low_degree_survey(Oracle.from_mask(mask), plan, seed=0)
top = sorted(label_survey(survey, 20).items(), key=lambda kv: -abs(kv[1]))[:5]
print([(k, round(v, 3)) for k, v in top])
