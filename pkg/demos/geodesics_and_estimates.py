# %% [markdown]
# # Geodesics, horizontal projection and the estimate monitors
#
# We integrate a timelike Schwarzschild orbit, project it to a horizontal
# curve and compare with the reduced equation on the orbit space.  Then we
# sample a geodesic ball in the Riemannian metric and evaluate the monitors.

# %%
import numpy as np

from stationary import catalog, estimates as est, geodesics as gd

schw = catalog.make_schwarzschild(M=1.0)
S = schw.spacetime
orbit = gd.integrate_geodesic(S, "lorentzian", gd.circular_orbit_state(1.0, 6.0), 100.0,
                              s_eval=np.linspace(0, 100, 101))
print("exit:", orbit.exit, " r range:", orbit.x[:, 0].min(), orbit.x[:, 0].max())
print("drift of <T, X>:", orbit.max_c_drift, " drift of g(T, T):", orbit.max_norm_drift)

# %% [markdown]
# A Kerr geodesic and its horizontal projection.  The reduced equation,
# driven by the conserved quantity `c`, reproduces the projected curve.

# %%
kerr = catalog.make_kerr(M=1.0, a=0.5)
K = kerr.spacetime
init = gd.GeodesicState(0.0, [8.0, 1.2, 0.0], [1.2, 0.05, 0.02, 0.03])
ev = np.linspace(0, 10, 41)
tr = gd.integrate_geodesic(K, "lorentzian", init, 10.0, s_eval=ev)
sigma = gd.horizontal_projection(K, tr)
red = gd.projected_geodesic_integrate(K, init.x, init.T[1:], tr.c, 10.0, s_eval=ev)
print("c =", tr.c, " max gap:", np.max(np.abs(red.x - sigma.x)))

# %% [markdown]
# Radial Riemannian geodesics from r = 6 toward the horizon reach the chart
# edge in finite length.  This says something about the chart only.

# %%
fan = [gd.GeodesicState(0.0, [6.0, np.pi / 2, 0.0], [0.0, -1.0, 0.0, 0.0])]
print(gd.completeness_probe(S, "hat", fan, 50.0).outcomes)

# %% [markdown]
# Estimate monitors on a ball of radius 2 around r = 6, and the curvature
# monitor at two radii.

# %%
rep = est.gradient_estimate_ratio(S, [6.0, np.pi / 2, 0.0], 2.0, ray_count=16, per_ray=8)
print(rep.to_json(indent=1))
print(est.scaling_diagnostic(S, [6.0, np.pi / 2, 0.0], 1.0, ray_count=16, per_ray=8))
