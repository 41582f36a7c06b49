"""
How early can the crash time be read off?
=========================================

A small version of the expanding-window Monte Carlo: fit LPPL-plus-AR(1)
noise series that end closer and closer to t_c, then summarize t_c.
Raise ``n_samples`` to 200 for the full-size run (about 15 minutes per core).
"""
from lppl_sloppy import FitConfig, McConfig, SynthSpec, confidence_window, gaussianity_check, run_mc
from lppl_sloppy.mc import third_rule_window

spec = SynthSpec()
config = McConfig(spec=spec, n_samples=20, window_ends=(734, 764, 794, 814, 824),
                  fit_config=FitConfig(n_starts=30))
summary = run_mc(config, progress=lambda s: print(f"sample {s} done", end="\r"))
print()

t_c = spec.truth.t_c
print("end  t_c-t   mean    std   std/(t_c-t)   80% window")
for r in summary.rows:
    d = t_c - r.window_end
    lo, hi = r.windows[0.8]
    print(f"{r.window_end}  {d:5.0f}  {r.mean_tc:6.1f}  {r.std_tc:5.1f}  {r.std_tc / d:11.2f}   [{lo:.0f}, {hi:.0f}]")

# If std were exactly (t_c - t) / 2, the Gaussian 80% window would be much
# wider than the +-(t_c - t) / 3 band
d = 60.0
print("gaussian 80% with std=d/2:", confidence_window(t_c, d / 2, 0.8))
print("third rule:               ", third_rule_window(t_c, d))

col = summary.estimates[:, 1]
check = gaussianity_check(col)
print(f"skew {check.skewness:.2f}, excess kurtosis {check.excess_kurtosis:.2f}, gaussian: {check.passed}")
