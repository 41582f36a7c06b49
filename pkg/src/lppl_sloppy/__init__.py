"""Log-periodic power law fitting, Hessian sloppiness analysis and crash-time Monte Carlo."""
__version__ = "0.1.0"

from .errors import (
    BZero, DegenerateDesign, DegenerateWindow, DomainError, GapError, InitInvalid, LpplError,
    NonPositiveError, NotSymmetric, ParseError, SummaryEmpty, TooFewSamples,
)
from .model import (
    PARAM_NAMES, LpplParams, Model, PriceSeries, Scale, eval_lppl, eval_power_law, grad_lppl,
)
from .objective import (
    degrees_of_freedom, gradient_of_s, hessian_of_s, linear_subfit, normalized_sse, residuals,
)
from .fitter import FitConfig, FitResult, lm_fit, multistart_fit, sample_starts
from .sloppy import (
    EigenTrack, SloppinessReport, eigendecompose, jacobi_eigh, nonlinear_block, rolling_track,
    sloppiness_report,
)
from .synth import REFERENCE_1987, Ar1Config, SynthSpec, ar1_generate, make_series
from .mc import McConfig, McSummary, confidence_window, gaussianity_check, run_mc
from .io import load_csv, write_csv
