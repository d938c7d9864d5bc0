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
# # Binary GCD traces and ensemble averages
#
# Each step of the algorithm on odd parts `u < v` either swaps the pair
# (branch 1) or keeps it (branch 2), then strips `k` factors of two.
# A cost function assigns a number to every `(branch, k)`.

# %%
from brentlab import COST_E, COST_S, COST_T, binary_gcd_trace, total_cost
from brentlab.ensembles import (EnsembleId, ensemble_census, geometric_ladder, mean_cost,
                                slope_fit)

tr = binary_gcd_trace(6, 20)
print(tr.gcd, tr.dumps())
for c in (COST_S, COST_T, COST_E):
    print(c.name, total_cost(tr, c))

# %% [markdown]
# ## Ensemble sizes
#
# Ensemble 1 (odd coprime pairs) grows like `n^2 / pi^2` and ensemble 2
# (all odd pairs) like `n^2 / 8`.  Counts come from a totient sieve.

# %%
for e in (EnsembleId.ODD_COPRIME, EnsembleId.ODD):
    for n in (10**3, 10**4, 10**5):
        print(int(e), n, ensemble_census(e, n).ratio)

# %% [markdown]
# ## Mean cost versus log n
#
# Averages grow linearly in `log n`; the slope is fitted over a doubling ladder.

# %%
ladder = geometric_ladder(2**8, 2**12)
for c in (COST_S, COST_T, COST_E):
    fit = slope_fit(EnsembleId.ODD, c, ladder)
    print(c.name, round(fit.slope, 5), [round(mean_cost(EnsembleId.ODD, n, c).mean, 3) for n in ladder[:2]])
