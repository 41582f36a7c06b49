"""
Stiff and sloppy directions of a fit
====================================

Fit a noisy synthetic series from 500 starts and look at the eigenvalues of
the Hessian of the objective at the best fit.
"""
from lppl_sloppy import FitConfig, SynthSpec, hessian_of_s, make_series, multistart_fit, sloppiness_report

series = make_series(SynthSpec(), 0)
fit = multistart_fit(series, FitConfig(n_starts=500))
print("best fit:", fit.params)
print(f"S = {fit.s:.2f} after {fit.iterations} iterations (start {fit.start_index})")

report = sloppiness_report(hessian_of_s(fit.params, series))
print(f"eigenvalues span {report.orders_of_separation} orders of magnitude\n")

# One row per eigenvalue; components above 0.1 in magnitude are starred
names = report.parameter_names
print("lambda      " + "".join(f"{n:>9}" for n in names))
for lam, row in zip(report.eigenvalues, report.eigenvectors):
    cells = "".join(f"{v:8.3f}{'*' if abs(v) > 0.1 else ' '}" for v in row)
    print(f"{lam:10.3e}  {cells}")

# The same table as CSV, ready for plotting or diffing
print()
print(report.to_csv())
