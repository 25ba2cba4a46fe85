"""
Three prediction regions for one test point
===========================================

Fit a Dirichlet regression on simulated data, calibrate each conformal
method on held-out points and draw the resulting regions for a single new
observation on the ternary diagram.
"""

import numpy as np

import simplexconf as sc
from simplexconf.plotting import emit_ternary_plot

rng = np.random.default_rng(7)
spec = sc.scenario("1a")

###############################################################################
# Simulate, split 70/30 and fit on the training part.
data = sc.generate_scenario(spec, rng)
split = sc.split_data(len(data), (0.7, 0.3, 0.0), seed=7)
model = sc.fit_mle(data.subset(split.train))
print("converged in", model.convergence.iterations, "iterations")
print("beta:\n", model.coefficients.beta.round(3))
print("gamma:", model.coefficients.gamma.round(3))

###############################################################################
# One fresh point, regions at the 90% level.
cal = data.subset(split.calibration)
test = sc.generate_scenario(spec, rng, n=1)
for method in (sc.QR, sc.HDR_FLOOR, sc.HDR_GRID):
    rec = sc.predict_regions(model, cal, test, method, alpha=0.1, grid_m=100)[0]
    print(f"{method:15s} covered={rec.covered}  widths={np.round(rec.region.widths(), 3)}")
    emit_ternary_plot(rec.region, rec.mp.mu, rec.y, f"region_{method}.svg", title=method)
