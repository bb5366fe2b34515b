"""Break AR-AGARCH toolkit.

Closed-form solutions, predictors, moments and autocovariances for AR(2)
and AGARCH(1,1) processes with abrupt parameter breaks; a seeded Monte
Carlo simulator serving as the brute-force oracle; quasi-ML estimation of
the univariate break-dummy and sign-regime variance models; a bivariate
spillover system with dynamic correlations; and a variance break scanner.
"""

__version__ = "0.1.0"

from .errors import (DataError, DivergenceError, FilterError, FitError,
                     SpecError)
from .params import (ArParams, BreakSchedule, GarchParams, ShockMoments,
                     TvArSpec, TvGarchSpec, coeff_at, increments_from_regimes,
                     persistence, regime_persistence, regimes_from_increments)
from .mean import (MeanMomentResult, MeanSolution, SummabilityReport,
                   autocorrelation, autocovariance, check_summability,
                   forecast_error, forecast_error_variance, general_solution,
                   impulse_weight, impulse_weights, predict_mean,
                   unconditional_moments)
from .variance import (InnovationVariance, VariancePath, VarianceSolution,
                       garch_general_solution, innovation_weight_sq_expected,
                       innovation_weights_realized, persistence_product_expected,
                       persistence_products_expected,
                       persistence_products_realized, predict_variance,
                       unconditional_variance, unconditional_variance_path,
                       variance_mse)
from .montecarlo import (MomentEstimate, SimConfig, SimOutput,
                         estimate_moments, iter_blocks, shock_moments,
                         simulate)
from .diagnostics import hosking_q, ljung_box
from .qml import (FitOptions, FitResult, UnivariateModelSpec, fit, loglik,
                  loglik_gradient, robust_se)
from .bivariate import (BivariateFitConfig, BivariateFitResult, BivariateSpec,
                        PositivityReport, ShiftConfig, SignShift,
                        SpilloverShift, bivariate_filter, check_positivity,
                        fit_bivariate, simulate_bivariate)
from .breaks import BreakScanResult, scan_variance_breaks
from .io import PriceSeries, ingest

__all__ = [name for name in dir() if not name.startswith("_")]
