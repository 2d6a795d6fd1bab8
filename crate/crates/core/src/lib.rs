//! Spatio-temporal determinantal point processes.
//!
//! The crate is organised around the life cycle of a stationary, isotropic
//! space-time DPP model:
//!
//! - [`kernels`]: the kernel catalog (separable Gaussian×exponential,
//!   separable and non-separable Matérn-type, and the general Fuentes
//!   spectral family), spectral densities, existence validation and
//!   numeric spectral inversion.
//! - [`moments`]: product densities as kernel-matrix determinants, pair
//!   correlation functions and space-time K-functions.
//! - [`simulate`]: spectral simulation on a space-time box and a Poisson
//!   baseline.
//! - [`estimate`]: nonparametric intensity, K and pair-correlation
//!   estimators and minimum-contrast fitting.
//!
//! [`specialfn`] and [`quad`] hold the numerical building blocks.

pub mod error;
pub mod estimate;
pub mod kernels;
pub mod linalg;
pub mod moments;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod specialfn;

pub use error::{Error, Result};
pub use estimate::{
    estimate_intensity, estimate_kfun, estimate_pcf, fit_min_contrast, BandwidthSpec, ContrastProblem, Family,
    FitOptions, FitResult, ParamBounds, Statistic,
};
pub use kernels::{
    kernel_value_numeric, validate_existence, FuentesSpectralParams, InversionGrid, KernelModel,
    MaternNonSeparableParams, MaternSeparableParams, NumericKernelValue, SeparableGaussExpParams, ValidationReport,
};
pub use moments::{
    kfun_separable_gauss_exp, kfun_theoretical, pcf_ordering_check, pcf_theoretical, pcf_value, product_density,
    KMethod, LagGrid, OrderingReport, StatisticKind, SummaryCurve,
};
pub use simulate::{
    build_spectral_approx, sample_poisson, sample_poisson_replicate, sample_stdpp, sample_stdpp_replicate,
    PointPattern, SpaceTimePoint, SpectralApproximation, SpectralConfig, Window,
};

/// Library version string recorded in run manifests.
pub const VERSION: &str = concat!("stdpp ", env!("CARGO_PKG_VERSION"));
