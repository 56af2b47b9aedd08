"""Python bindings for the pursuit_lab Monte Carlo core."""

from ._core import (
    ConfigError,
    DomainError,
    EnsembleConfig,
    Error,
    ExponentFit,
    Formulation,
    GridSpec,
    KernelSpec,
    MCEstimate,
    Monitoring,
    PursuerGroup,
    RatioEstimate,
    d_closed_form,
    d_quadrature,
    estimate_survival,
    fbm_cov,
    fit_gamma_n,
    gaussian_tail,
    lamperti_corr,
    leadership_ratio,
    log_gamma,
    mills_ratio,
    prediction,
    sample_fbm,
    sample_stationary,
    shannon_kernel,
    theory_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
