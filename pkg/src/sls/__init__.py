"""Scaled least squares estimation for stochastic linear combinations of
non-linear regressions.

The estimator solves, per direction, an ordinary least-squares problem on
the surrogate response z_j * y and then rescales the solution by the root
of an empirical scale equation; no iterative optimization over the
coefficient vectors is needed.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DataFormatError, DegenerateDirection,
                     InsufficientPoints, NonFiniteScale, NoRootInRange,
                     SingularGram, SLSError)
from .links import (IDENTITY, LOGISTIC, SIGMOID, LinkFunction, LinkKind,
                    link_name, make_link, monomial, parse_link_name)
from .model import Dataset, ModelSpec, response, response_batch
from .estimator import (EstimationResult, GramInverse, RootDiagnostics,
                        RootOptions, empirical_scale, empirical_scale_deriv,
                        gram_inverse_full, gram_inverse_subsampled,
                        newton_root, ols_direction, sls_estimate)
from .synth import (DesignDistribution, GaussianGeneral, GaussianIsotropic,
                    SynthConfig, UniformBox, generate, sample_beta_star,
                    sample_design, splitmix64, stream_rng)
from .verify import (CovarianceSummary, SigmoidScaleReport, covariance_summary,
                     cubic_oracle, proportionality_gap, sigmoid_scale_check,
                     stein_identity_gap)
from .bench import (ExperimentPlan, ExperimentRecord, SampleSizeSweep,
                    SubsampleSweep, emit_csv, emit_plot, fit_convergence_slope,
                    relative_error_l2, relative_error_linf, run_experiment,
                    summarize)
from .datafile import load_dataset, save_dataset
from .config import RunConfig, parse_config
