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
# # Limiting density and derived constants
#
# The density has a logarithmic singularity at 0 and is stored as
# `alpha * (-log2 x) + chi(x)`.  A reduced grid keeps this notebook quick;
# the default grid is what the acceptance run uses.

# %%
import numpy as np

from brentlab.constants import constants_report
from brentlab.density import GridSpec, integrate, solve_F, solve_xi, xi_eval

spec = GridSpec(m_geometric=512, m_uniform=512)
d, rec = solve_xi(1e-12, spec)
print("xi(1) =", d.xi_at_one, "iterations", rec.iterations, "theta_hat", rec.theta_hat)
print("alpha / xi(1) =", d.alpha / d.xi_at_one)

# %%
xs = np.array([1e-6, 1e-3, 0.1, 0.5, 0.9, 1.0])
print(np.c_[xs, [xi_eval(d, x) for x in xs]])
print("mass", integrate(d, "one"))

# %% [markdown]
# ## Distribution function
#
# `F` solves its own fixed-point problem; its derivative should reproduce the density.

# %%
from brentlab.density import distribution_derivative

F, frec = solve_F(1e-12, spec)
for x in (0.25, 0.5, 1.0):
    print(x, distribution_derivative(F, x) / xi_eval(d, x) - 1)

# %% [markdown]
# ## Constants
#
# Every truncated sum reports a bound on what it discards.

# %%
rep = constants_report(d, F)
print(rep.table())
