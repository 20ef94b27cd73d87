use thiserror::Error;

/// Errors produced across the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Gamma evaluated at (or within tolerance of) a nonpositive integer.
    #[error("gamma pole at z = {re}{im:+}i (nearest pole {pole})")]
    Pole { re: f64, im: f64, pole: i64 },

    /// Series or product failed to reach its tolerance within the term budget.
    #[error("{what} did not converge within {budget} terms (last term {last:.3e})")]
    Convergence {
        what: &'static str,
        budget: usize,
        last: f64,
    },

    /// Invalid argument to a special function or builder.
    #[error("invalid argument: {0}")]
    Arg(String),

    /// Contour geometry is inconsistent (e.g. dimple taller than the truncation height).
    #[error("contour geometry: {0}")]
    Geometry(String),

    /// A quadrature node fell too close to a pole of the integrand.
    #[error("contour passes within {dist:.3e} of a pole at {pole_re}{pole_im:+}i")]
    ContourPole {
        dist: f64,
        pole_re: f64,
        pole_im: f64,
    },

    /// Node-pair constraint of the finite-ε contours violated.
    #[error("contour constraint: {0}")]
    Constraint(String),

    /// Kernel evaluated on a branch cut or at a removable-singularity point
    /// closer than the guard tolerance.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Parameter outside the admissible domain.
    #[error("domain: {0}")]
    Domain(String),

    /// A computed quantity failed a sanity bound (NaN, residual too large, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Simulation window too small for the requested observation.
    #[error("window: {0}")]
    Window(String),

    /// Refinement budget exhausted before the error estimate met tolerance.
    #[error("{what}: error estimate {estimate:.3e} above tol {tol:.3e} at max size {size}")]
    Budget {
        what: &'static str,
        estimate: f64,
        tol: f64,
        size: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
