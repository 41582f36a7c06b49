"""
Eigenvalues approaching the singularity
=======================================

Refit growing prefixes of a synthetic series and track the four Hessian
eigenvalues that belong to the nonlinear parameters.
"""
from lppl_sloppy import FitConfig, SynthSpec, make_series, rolling_track

spec = SynthSpec()
series = make_series(spec, 0)
track = rolling_track(series, spec.truth.t_c, horizon=150, stride=10,
                      fit_config=FitConfig(n_starts=50), threads=None)

print("date  days to t_c   lambda1    lambda2    lambda3    lambda4")
for d, dd, row in zip(track.dates, track.days_to_tc, track.spectra):
    print(f"{d:4d}  {dd:11.0f}  " + " ".join(f"{x:10.3e}" for x in row))

print("rank swaps between consecutive dates:", track.crossings)
print("dates whose fit failed:", track.failed or "none")
