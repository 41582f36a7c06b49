"""
Dropping the oscillations
=========================

The power law is the LPPL with C = 0.  It has five parameters instead of
seven, so its objective divides by two more degrees of freedom.  Without the
oscillations the fitted singularity tends to hug the last observation.
"""
from lppl_sloppy import (
    DomainError, FitConfig, Model, SynthSpec, hessian_of_s, make_series, multistart_fit,
    sloppiness_report,
)
from lppl_sloppy.model import PARAM_NAMES

full = make_series(SynthSpec(), 0)
for end in (760, full.t1):
    series = full.truncate(end)
    print(f"window 0..{end}")
    for model in (Model.LPPL, Model.POWER_LAW):
        fit = multistart_fit(series, FitConfig(n_starts=200, model=model))
        names = [PARAM_NAMES[i] for i in model.free_index]
        try:
            orders = sloppiness_report(hessian_of_s(fit.params, series, model), names).orders_of_separation
        except DomainError:
            orders = "n/a (t_c at the window end)"
        print(f"  {model.value:>9}: S={fit.s:8.2f}  n={fit.n_params}  t_c={fit.params.t_c:8.2f}  "
              f"alpha={fit.params.alpha:.3f}  C={fit.params.C:.3f}  orders={orders}")
