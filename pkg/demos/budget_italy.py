"""
Household budget shares
=======================

Food, housing and other expenditure shares of 1729 Italian households,
modelled on log income, household size and three price indices.  Ten
random 70/20/10 splits; the numbers are averages over the splits.
"""

import simplexconf as sc

data = sc.load_dataset(sc.budget_italy_path(), sc.BUDGET_ITALY_SCHEMA)
print(len(data), "households,", data.D, "shares")

summaries = sc.run_application(data, sc.RunConfig(alpha=0.1, repeats=10, seed=0))
for s in summaries:
    widths = ", ".join(f"{w:.4f}" for w in s.mean_widths)
    print(f"{s.method:15s} coverage {s.empirical_coverage:6.2f}%  widths ({widths})")

###############################################################################
# A full-data fit, for the coefficient table.
model = sc.fit_mle(data)
for name, row in zip(data.y_names[1:], model.coefficients.beta):
    print(name, {k: round(float(v), 3) for k, v in zip(data.x_names, row)})
print("log precision:", model.coefficients.gamma.round(3))
