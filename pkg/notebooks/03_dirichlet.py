# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Dirichlet series over odd pairs
#
# Summing `v^(-2s)` over an odd ensemble has a closed form in terms of zeta.
# Truncating at `v_max` leaves a tail that is bounded by an integral.

# %%
from brentlab.dirichlet import (SeriesQuery, pole_estimate, series_truncated, verify_convolution,
                                verify_numthy)
from brentlab.ensembles import EnsembleId

for v_max in (10**2, 10**3, 10**4):
    r = series_truncated(SeriesQuery(EnsembleId.ODD, 1.5, 0, v_max=v_max))
    print(v_max, r.value, r.residual, r.tail_bound)

# %%
for chk in (*verify_numthy(2.0, 10**4), verify_convolution(1.5, 10**4, 1)):
    print(chk.name, chk.residual, chk.tail_bound, chk.passed)

# %% [markdown]
# ## Near the pole
#
# `(s - 1)` times the ensemble-2 series approaches 1/8 slowly as `s -> 1`.

# %%
for s in (1.2, 1.1, 1.05, 1.01):
    print(s, pole_estimate(s).scaled)
