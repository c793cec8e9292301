"""Outage probability of RIS-assisted paths: closed form and Monte Carlo."""

from .closedform import OutageResult, outage_best_path, outage_closed_form, outage_with_failures
from .failure import FailurePattern, failure_pmf, first_q_pattern, sample_pattern
from .kernels import BACKEND
from .model import ConfigParseError, Scenario, ValidationError, load_scenario, validate
from .montecarlo import McEstimate, estimate_outage, simulate_snr
from .specfun import bessel_i0, bessel_k1, log_binomial
from .sweep import SweepRow, SweepSpec, agreement_report, emit_csv, run_sweep
from .upsilon import UpsilonValue, upsilon_direct, upsilon_expanded

__version__ = "0.1.0"
