"""Time-windowed Bayesian model evidence (tBME).

Thin wrapper around the compiled ``_tbme`` extension.
"""

from ._tbme import (  # noqa: F401
    DetectionReport,
    Episode,
    IoError,
    MvgParams,
    NumericalError,
    ReferenceBands,
    Signal,
    TbmeCurve,
    TbmeError,
    ValidationError,
    Verdict,
    __version__,
    build_case,
    detect,
    ess,
    gauss_log_terms,
    log_sum_exp,
    mualem_conductivity,
    mvg_conductivity,
    mvg_theta,
    posterior_weights,
    run,
    sample_reference,
    tbme_curve,
    weighted_kde,
    weighted_quantile,
)
