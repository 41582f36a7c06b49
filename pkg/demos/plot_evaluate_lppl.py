"""
Evaluating the log-periodic power law
=====================================

A quick tour of the model function, its gradient and the power-law limit.
"""
import numpy as np

from lppl_sloppy import LpplParams, eval_lppl, eval_power_law, grad_lppl
from lppl_sloppy.synth import REFERENCE_1987

# The shipped synthetic truth: an index climbing from ~1100 to ~3900
t = np.arange(0, 834, 83.0)
print("t    f(t)")
for ti, fi in zip(t, eval_lppl(REFERENCE_1987, t)):
    print(f"{ti:4.0f} {fi:9.2f}")

# Oscillations accelerate as t approaches t_c; setting C = 0 removes them
smooth = eval_power_law(REFERENCE_1987, t)
print("max |LPPL - power law| :", np.max(np.abs(eval_lppl(REFERENCE_1987, t) - smooth)))

# The gradient is analytic; one row per time, one column per parameter
g = grad_lppl(REFERENCE_1987, np.array([700.0, 800.0, 830.0]))
print("d f / d t_c near the end:", g[:, 3])

# Evaluation at or past the singularity is refused
try:
    eval_lppl(LpplParams(0, 1, 0, 10, 0.5, 6, 0), 10.0)
except ValueError as exc:
    print("refused:", exc)
