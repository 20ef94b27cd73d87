//! Distribution functions assembled from the kernel + determinant machinery:
//! the edge and fan crossover CDFs (μ̃-averaged Fredholm determinants on
//! contours), their Airy-process limits, the finite-asymmetry exact ASEP CDF,
//! tail and sandwich bound evaluators, and the small-time Gaussian covariance.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::contours::{build_eps_circles, build_mu_contour, gauss_legendre_on};
use crate::fredholm::{det_i_minus, det_i_minus_real, det_i_plus, mu_integral};
use crate::kernels::{
    a2bm_rank_one, kernel_airy2, ContourKernel, JKernel, KtildeKernel, LambdaPsi, CBRT2,
};
use crate::specialfn::q_pochhammer;
use crate::{C64, Error, Result};

/// Knobs for the determinant pipelines.  The defaults are calibrated by the
/// self-convergence suite; everything is overridable.
#[derive(Clone, Debug, Serialize)]
pub struct NumericConfig {
    /// Quadrature nodes per contour segment (ζ and η grids).
    pub nodes_per_segment: usize,
    /// Nodes per μ̃-contour segment.
    pub mu_nodes: usize,
    /// Truncation of the μ̃ rays at Re μ̃ = mu_x_max.
    pub mu_x_max: f64,
    /// Height at which the ζ/η contours are truncated.
    pub tail_height: f64,
    /// Nodes of the real-line grid for operators on L²(s, ∞).
    pub real_nodes: usize,
    /// Length of the real-line grid: [s, s + real_span].
    pub real_span: f64,
    /// Nodes per circle for the finite-ε contours.
    pub circle_nodes: usize,
    /// Imaginary residual above which a CDF value is rejected.
    pub imag_tol: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            nodes_per_segment: 96,
            mu_nodes: 64,
            mu_x_max: 40.0,
            tail_height: 10.0,
            real_nodes: 96,
            real_span: 40.0,
            circle_nodes: 128,
            imag_tol: 1e-6,
        }
    }
}

impl NumericConfig {
    /// Coarser settings for smoke tests and quick scans.
    pub fn coarse() -> Self {
        NumericConfig {
            nodes_per_segment: 32,
            mu_nodes: 32,
            mu_x_max: 25.0,
            tail_height: 6.0,
            real_nodes: 64,
            real_span: 30.0,
            circle_nodes: 64,
            imag_tol: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CdfPoint {
    pub f: f64,
    /// |Im| of the μ̃ integral, discarded after the residual check.
    pub imag_residual: f64,
}

fn finish_cdf(what: &str, v: C64, imag_tol: f64) -> Result<CdfPoint> {
    if v.im.abs() > imag_tol {
        return Err(Error::Numerical(format!(
            "{what}: imaginary residual {:.3e} exceeds {imag_tol:.1e} (Re = {}); \
             increase contour resolution or μ̃ truncation",
            v.im, v.re
        )));
    }
    Ok(CdfPoint {
        f: v.re,
        imag_residual: v.im.abs(),
    })
}

/// ∮ e^{−μ̃}/μ̃ · det(μ̃) dμ̃/(2πi) in the subtracted form
/// 1 + ∮ e^{−μ̃}/μ̃ (det(μ̃) − 1): the residue term is exact, so the
/// quadrature only carries the decaying part.
fn mu_average(
    what: &str,
    cfg: &NumericConfig,
    det: impl Fn(C64) -> Result<C64> + Sync,
) -> Result<CdfPoint> {
    let mu = build_mu_contour(cfg.mu_x_max, cfg.mu_nodes)?;
    let v = mu_integral(&mu, true, |m| Ok(det(m)? - 1.0))? + 1.0;
    finish_cdf(what, v, cfg.imag_tol)
}

/// Edge crossover distribution F^edge_{T,X}(s): the one-point law of the
/// KPZ height with half-Brownian initial data.
pub fn f_edge(big_t: f64, big_x: f64, s: f64, cfg: &NumericConfig) -> Result<CdfPoint> {
    let kernel = ContourKernel::new_edge(big_t, big_x, s, cfg.tail_height, cfg.nodes_per_segment)?;
    mu_average("F_edge", cfg, |mu| det_i_minus(&kernel.nystrom_matrix(mu)?))
}

/// The same distribution through the microscopic (a, X/T) parameterization:
/// an independent route for the parameter-map cross-check.
pub fn f_edge_via_gamma(big_t: f64, big_x: f64, s: f64, cfg: &NumericConfig) -> Result<CdfPoint> {
    let a = s * big_t.powf(1.0 / 3.0) / CBRT2;
    let x_gamma = CBRT2 * big_t.powf(2.0 / 3.0) * big_x;
    let kernel =
        ContourKernel::new_csc_gamma(big_t, a, x_gamma, cfg.tail_height, cfg.nodes_per_segment)?;
    mu_average("F_edge (Gamma route)", cfg, |mu| {
        det_i_minus(&kernel.nystrom_matrix(mu)?)
    })
}

/// F^edge_{T,0}(s) through the real-line kernel on L²(s, ∞): a third,
/// structurally different route (deformed Airy functions instead of contour
/// Gamma ratios).
pub fn f_edge_ktilde(big_t: f64, s: f64, cfg: &NumericConfig) -> Result<CdfPoint> {
    let (x, w) = gauss_legendre_on(s, s + cfg.real_span, cfg.real_nodes);
    let kt = KtildeKernel::new(big_t, &x)?;
    mu_average("F_edge (real-line route)", cfg, |mu| {
        let mut m = kt.matrix(mu)?;
        for j in 0..x.len() {
            for i in 0..x.len() {
                m[(i, j)] *= w[j];
            }
        }
        det_i_minus(&m)
    })
}

/// Fan crossover distribution F^fan_T(s) (delta initial data; no X
/// dependence and no Gamma ratio, straight contours).
pub fn f_fan(big_t: f64, s: f64, cfg: &NumericConfig) -> Result<CdfPoint> {
    let kernel = ContourKernel::new_fan(big_t, s, cfg.tail_height, cfg.nodes_per_segment)?;
    mu_average("F_fan", cfg, |mu| det_i_minus(&kernel.nystrom_matrix(mu)?))
}

fn real_nystrom(kernel: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    DMatrix::from_fn(n, n, |i, j| kernel[(i, j)] * w[j])
}

/// GUE Tracy–Widom distribution: det(I − K_Airy) on L²(s, ∞).
pub fn f_gue(s: f64, cfg: &NumericConfig) -> Result<f64> {
    let (x, w) = gauss_legendre_on(s, s + cfg.real_span, cfg.real_nodes);
    let k = kernel_airy2(&x);
    det_i_minus_real(&real_nystrom(&k, &w))
}

/// One-point Airy₂→BM transition law (BBP one-spike transition) at
/// position X: det(I − K) on L²(s, ∞) with the rank-one perturbed kernel,
/// X → +∞ being the Airy₂ side.
///
/// The determinant is split as det(I − K_{A₂})·(1 − ⟨v, (I − K_{A₂})⁻¹Ai⟩)
/// so that on the Brownian side (X < 0), where v(y) carries mass of size
/// e^{-|X|³/3 + |X|y} near y ≈ X², the huge rank-one column never enters an
/// LU factorization — it only meets the Airy-decaying resolvent column in a
/// quadrature sum whose terms stay O(1).
pub fn f_a2bm(big_x: f64, s: f64, cfg: &NumericConfig) -> Result<f64> {
    let (span, n) = if big_x < 0.0 {
        // Grid must reach past the saddle of v(y)·Ai(y) at y ≈ X², and stay
        // dense enough there (GL midpoint spacing ≈ π·span/2n).
        let span = cfg.real_span.max(big_x * big_x + 6.0 * big_x.abs() + 20.0 - s);
        if big_x.abs().powi(3) / 3.0 + big_x.abs() * (s.abs() + span) > 600.0 {
            return Err(Error::Domain(format!(
                "X = {big_x} is too far on the Brownian side for double-precision \
                 evaluation (rank-one factor overflows)"
            )));
        }
        (span, cfg.real_nodes.max((2.5 * span) as usize))
    } else {
        (cfg.real_span, cfg.real_nodes)
    };
    let (x, w) = gauss_legendre_on(s, s + span, n);
    let a = real_nystrom(&kernel_airy2(&x), &w);
    let det0 = det_i_minus_real(&a)?;
    let (ai, v) = a2bm_rank_one(&x, big_x);
    let resolvent = (DMatrix::identity(n, n) - &a)
        .lu()
        .solve(&DVector::from_column_slice(&ai))
        .ok_or_else(|| Error::Numerical("Airy resolvent solve failed".into()))?;
    let correction: f64 = (0..n).map(|j| w[j] * v[j] * resolvent[j]).sum();
    if !correction.is_finite() {
        return Err(Error::Numerical(
            "rank-one correction is not finite".into(),
        ));
    }
    Ok(det0 * (1.0 - correction))
}

/// Exact finite-asymmetry CDF P(x(γ^{-1}t, m) ≤ x) for ASEP started from
/// step Bernoulli data (ρ₋ = 0, density ρ₊ right of the origin).  `t` is the
/// time variable of the transform; the matching particle-system time is t/γ.
pub fn finite_eps_cdf(
    eps: f64,
    rho_plus: f64,
    t: f64,
    m: u32,
    x: i64,
    cfg: &NumericConfig,
) -> Result<CdfPoint> {
    if m == 0 {
        return Err(Error::Arg("particle index m must be >= 1".into()));
    }
    let gamma = eps.sqrt();
    let tau = (1.0 - gamma) / (1.0 + gamma);
    let alpha = (1.0 - rho_plus) / rho_plus;
    let cont = build_eps_circles(eps, rho_plus, cfg.circle_nodes)?;
    let lp = LambdaPsi {
        t,
        m: m as f64,
        x: x as f64,
        xi: -1.0,
    };
    let j = JKernel::new(lp, tau, alpha, cont.zeta, cont.eta)?;
    let v = mu_integral(&cont.mu, false, |mu| {
        Ok(q_pochhammer(mu, tau)? * det_i_plus(&j.nystrom_matrix(mu)?)? / mu)
    })?;
    finish_cdf("finite-eps CDF", v, cfg.imag_tol)
}

/// Shifted arguments of the equilibrium sandwich: the left-tail bound reads
/// F at `2^{1/3}y − 2^{1/3}T^{−1/3}log 2`, the right-tail bound at
/// `−2^{1/3}y − 2^{1/3}T^{−1/3}log 2`.
pub fn sandwich_args(big_t: f64, y: f64) -> (f64, f64) {
    let shift = CBRT2 * big_t.powf(-1.0 / 3.0) * 2.0f64.ln();
    (CBRT2 * y - shift, -CBRT2 * y - shift)
}

/// Sandwich bounds for the equilibrium tail probabilities from the computed
/// edge CDF values at the two shifted arguments: returns
/// ((1−F₊)², 2(1−F₊)) for the left tail and (F₋², 2F₋) for the right tail.
pub fn eq_sandwich(f_left_arg: f64, f_right_arg: f64) -> ((f64, f64), (f64, f64)) {
    (
        ((1.0 - f_left_arg).powi(2), 2.0 * (1.0 - f_left_arg)),
        (f_right_arg.powi(2), 2.0 * f_right_arg),
    )
}

/// Right-hand side of the upper-tail bound
/// c₁ √T (e^{−c₂ y^{3/2}} + e^{−c₃ T^{1/3} y}) for T ≥ 1, y ≥ 0.
pub fn tail_bound_edge(big_t: f64, y: f64, c1: f64, c2: f64, c3: f64) -> f64 {
    let y = y.max(0.0);
    c1 * big_t.sqrt() * ((-c2 * y.powf(1.5)).exp() + (-c3 * big_t.powf(1.0 / 3.0) * y).exp())
}

/// Fits c₁ so the bound is an equality at the anchor point y₀, given the
/// computed left-tail value there.  The decay rates c₂, c₃ are chosen by the
/// caller (they are not claimed optimal; any safe underestimate works).
pub fn fit_tail_c1(big_t: f64, y0: f64, tail_at_y0: f64, c2: f64, c3: f64) -> f64 {
    tail_at_y0 / (big_t.sqrt() * ((-c2 * y0.powf(1.5)).exp() + (-c3 * big_t.powf(1.0 / 3.0) * y0).exp()))
}

/// Arguments of the small-time covariance kernel Ψ.
#[derive(Clone, Copy, Debug)]
pub struct PsiArgs {
    pub x: f64,
    pub y: f64,
    pub x0: f64,
    pub x0p: f64,
}

/// Ψ(x,y,x₀,x₀′) = e^{−¼(x+y−x₀−x₀′)²}/(4π^{3/2})
/// ∫₀¹ e^{−(x−y)²/4(1−s) − (x₀−x₀′)²/4s}/√(s(1−s)) ds, with the endpoint
/// singularities removed by s = sin²θ (ds/√(s(1−s)) = 2dθ).
pub fn small_t_psi(a: &PsiArgs) -> f64 {
    let pre = (-0.25 * (a.x + a.y - a.x0 - a.x0p).powi(2)).exp() / (4.0 * PI.powf(1.5));
    let dxy2 = (a.x - a.y).powi(2);
    let d002 = (a.x0 - a.x0p).powi(2);
    let (th, w) = gauss_legendre_on(0.0, PI / 2.0, 160);
    let mut sum = 0.0;
    for (&t, &wt) in th.iter().zip(&w) {
        let (sin, cos) = t.sin_cos();
        let expo = -dxy2 / (4.0 * cos * cos) - d002 / (4.0 * sin * sin);
        if expo > -700.0 {
            sum += wt * 2.0 * expo.exp();
        }
    }
    pre * sum
}

/// Covariance ∫₀^∞∫₀^∞ Ψ(x, y, X₀, X₀′) [e^{−B(X₀)−B(X₀′)}] dX₀ dX₀′ on a
/// truncated trapezoid grid.  The statement of the covariance omits the
/// e^{−B} weights that its own derivation displays; both variants are
/// offered (`weights = None` gives the unweighted printed form).
pub fn small_t_cov(x: f64, y: f64, x0_grid: &[f64], b: Option<&[f64]>) -> f64 {
    let tw = trapezoid_weights(x0_grid);
    let n = x0_grid.len();
    let mut sum = 0.0;
    for i in 0..n {
        let bi = b.map_or(0.0, |b| b[i]);
        for j in 0..n {
            let bj = b.map_or(0.0, |b| b[j]);
            let psi = small_t_psi(&PsiArgs {
                x,
                y,
                x0: x0_grid[i],
                x0p: x0_grid[j],
            });
            sum += tw[i] * tw[j] * psi * (-bi - bj).exp();
        }
    }
    sum
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = grid[i + 1] - grid[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

/// Heat kernel p(T, X) = (2πT)^{−1/2} e^{−X²/2T}.
pub fn heat_kernel(big_t: f64, big_x: f64) -> f64 {
    (-big_x * big_x / (2.0 * big_t)).exp() / (2.0 * PI * big_t).sqrt()
}

/// Leading small-T term ∫₀^∞ p(T, X−X₀) e^{−B(X₀)} dX₀ of the half-Brownian
/// heat equation solution, trapezoid on the supplied B path.
pub fn heat_baseline(big_t: f64, big_x: f64, x0_grid: &[f64], b: &[f64]) -> f64 {
    let w = trapezoid_weights(x0_grid);
    x0_grid
        .iter()
        .zip(b)
        .zip(&w)
        .map(|((&x0, &bv), &wt)| wt * heat_kernel(big_t, big_x - x0) * (-bv).exp())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Edge,
    Fan,
    A2bm,
    Gue,
    FiniteEps,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DistParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistTable {
    pub kind: DistKind,
    pub params: DistParams,
    pub config: NumericConfig,
    /// Arguments: s for the continuum laws, the lattice site for FiniteEps.
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub imag_residual: Vec<f64>,
}

impl DistTable {
    pub fn compute(
        kind: DistKind,
        params: DistParams,
        s_grid: &[f64],
        cfg: &NumericConfig,
    ) -> Result<DistTable> {
        let need = |o: Option<f64>, name: &str| {
            o.ok_or_else(|| Error::Arg(format!("{name} required for {kind:?} tables")))
        };
        let points: Result<Vec<CdfPoint>> = s_grid
            .par_iter()
            .map(|&s| match kind {
                DistKind::Edge => f_edge(need(params.big_t, "T")?, need(params.big_x, "X")?, s, cfg),
                DistKind::Fan => f_fan(need(params.big_t, "T")?, s, cfg),
                DistKind::A2bm => Ok(CdfPoint {
                    f: f_a2bm(need(params.big_x, "X")?, s, cfg)?,
                    imag_residual: 0.0,
                }),
                DistKind::Gue => Ok(CdfPoint {
                    f: f_gue(s, cfg)?,
                    imag_residual: 0.0,
                }),
                DistKind::FiniteEps => finite_eps_cdf(
                    need(params.eps, "eps")?,
                    need(params.rho_plus, "rho_plus")?,
                    need(params.t, "t")?,
                    params
                        .m
                        .ok_or_else(|| Error::Arg("m required for finite-eps tables".into()))?,
                    s.round() as i64,
                    cfg,
                ),
            })
            .collect();
        let points = points?;
        Ok(DistTable {
            kind,
            params,
            config: cfg.clone(),
            s: s_grid.to_vec(),
            f: points.iter().map(|p| p.f).collect(),
            imag_residual: points.iter().map(|p| p.imag_residual).collect(),
        })
    }

    /// CDF-range and monotonicity invariants (1e-6 slack).
    pub fn validate(&self) -> Result<()> {
        for (i, &f) in self.f.iter().enumerate() {
            if !(-1e-6..=1.0 + 1e-6).contains(&f) {
                return Err(Error::Constraint(format!(
                    "F({}) = {f} outside [-1e-6, 1+1e-6]",
                    self.s[i]
                )));
            }
            if i > 0 && f < self.f[i - 1] - 1e-6 {
                return Err(Error::Constraint(format!(
                    "F not monotone: F({}) = {} > F({}) = {f}",
                    self.s[i - 1],
                    self.f[i - 1],
                    self.s[i]
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,F,imag_residual")?;
        for i in 0..self.s.len() {
            writeln!(out, "{},{},{}", self.s[i], self.f[i], self.imag_residual[i])?;
        }
        Ok(())
    }
}
