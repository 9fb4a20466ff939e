"""Sample quantiles of nonlinear functionals of long-memory Gaussian sequences.

Hermite analysis of indicator functionals, exact circulant-embedding
simulation, closed-form rates and limit constants, and a Monte-Carlo harness
for the Bahadur remainder of the sample quantile.
"""
from .asymptotics import (
    RateSpec,
    Regime,
    classify_regime,
    k_const,
    rate_rn,
    sigma2_p,
    var_empirical_cdf,
)
from .errors import (
    AssumptionAError,
    BahadurError,
    EmbeddingError,
    RankUndetectableError,
    RegimeError,
    TruncationError,
)
from .experiments import (
    BahadurStudyResult,
    StudyConfig,
    fit_loglog_slope,
    run_bahadur_study,
    run_clt_check,
)
from .functionals import (
    Branch,
    IntervalUnion,
    PiecewiseFunctional,
    cdf_gY,
    get_functional,
    pdf_gY,
    sublevel_set,
    true_quantile,
)
from .gaussproc import (
    CorrelationModel,
    GaussianPath,
    embedding_spectrum,
    empirical_acf,
    partial_sum,
    rho_eval,
    sample_path,
)
from .hermite import (
    HermiteCoefficients,
    coefficients_by_quadrature,
    coefficients_of_indicator,
    cross_moment,
    gauss_hermite_rule,
    hermite_eval,
    hermite_rank,
    interval_hermite_coefficient,
    kappa,
    min_rank_neighborhood,
)
from .kernels import BACKEND
from .quantiles import QuantileObservation, bahadur_remainder, empirical_cdf, sample_quantile

__version__ = "0.1.0"
