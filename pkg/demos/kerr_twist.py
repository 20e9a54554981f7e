# %% [markdown]
# # The twist of Kerr and its map into the hyperbolic plane
#
# In four dimensions the twist one-form `omega = u^3 * d theta` is closed on
# vacuum metrics, so it has a potential `psi`.  The pair `(psi, u^2)` is then a
# map into the upper half plane, and it turns out to be harmonic.

# %%
import numpy as np

from stationary import catalog, reduction4d as r4

kerr = catalog.make_kerr(M=1.0, a=0.5)
S = kerr.spacetime
p = np.array([5.0, np.pi / 3, 0.4])

omega = r4.twist_one_form(S, p)
ids = r4.twist_identities(S, p)
print("omega =", omega)
print("norm / divergence / curl residuals:", ids.norm, ids.divergence, ids.curl)
print("|d omega| =", ids.d_omega)

# %% [markdown]
# Line integrals of `omega` along two different polylines agree, so `psi`
# is well defined near the equatorial anchor at r = 10.

# %%
base = kerr.twist_anchor
a = r4.twist_potential(S, base, p)
b = r4.twist_potential(S, base, p, path=[[7.0, 2.0, -0.5]])
print(f"psi = {a:.12f}  (second path differs by {abs(a - b):.1e})")

# %% [markdown]
# Energy density three ways, then the tension field of the map.

# %%
e = r4.energy_density(S, p)
print("trace form", e.trace, "closed form", e.closed, "via scalar curvature", e.conformal)
t = r4.tension_field(S, p)
print("tension components:", t.x, t.y)

# %% [markdown]
# Both sides of the Bochner identity for half the energy density.  Every term
# on the right is a square, so it is non-negative on vacuum metrics.

# %%
bt = r4.bochner_terms(S, p)
for k, v in bt.squares.items():
    print(f"{k:>12s} {v: .6e}")
print("lhs", bt.lhs, "rhs", bt.rhs, "relative gap", bt.relative)

# %% [markdown]
# The monitor `h` bundles the two pieces of the energy density.

# %%
h = r4.h_monitor(S, p)
print(h)
