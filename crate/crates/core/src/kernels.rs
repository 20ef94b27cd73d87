//! Fredholm kernels: the cosecant/Gamma edge kernel and its fan and
//! finite-ε relatives, plus the Airy-type real-line kernels they converge to.

use crate::contours::{
    build_airy_wedge, build_edge_contours, build_fan_contours, gauss_legendre_on, DimpleSpec,
    QuadratureGrid,
};
use crate::specialfn::{airy_ai, airy_gamma, airy_recip_gamma, gamma_complex, q_pochhammer,
    recip_gamma};
use crate::{C64, Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

pub const CBRT2: f64 = 1.259_921_049_894_873_2; // 2^{1/3}

/// Microscopic and scaled parameters of the weakly asymmetric limit.
///
/// ε is the asymmetry parameter (γ = ε^{1/2}), (T, X) the macroscopic time and
/// position, s the fluctuation variable, ρ₊ the right Bernoulli density.
#[derive(Clone, Copy, Debug)]
pub struct ScalingParams {
    pub eps: f64,
    pub big_t: f64,
    pub big_x: f64,
    pub s: f64,
    pub rho_plus: f64,
    /// γ = ε^{1/2} = q - p.
    pub gamma: f64,
    /// Left jump rate q = (1 + γ)/2.
    pub q: f64,
    /// Right jump rate p = (1 - γ)/2.
    pub p: f64,
    /// τ = p/q.
    pub tau: f64,
    /// Microscopic time t = ε^{-3/2} T.
    pub t: f64,
    /// Microscopic position x = ε^{-1} X.
    pub x: f64,
    /// λ_ε = ½ log(q/p).
    pub lambda: f64,
    /// ν_ε = p + q - 2√(pq).
    pub nu: f64,
    /// D_ε = 2√(pq).
    pub d: f64,
    /// Saddle location ξ = -1 - 2ε^{1/2} X/T.
    pub xi: f64,
    /// a = s + X²/(2T).
    pub a: f64,
    /// a' = a + log 2.
    pub a_prime: f64,
    /// Particle index m = ½[ε^{-1/2}(-a + X²/(2T)) + t/2 + x].
    pub m: f64,
    /// κ_T = 2^{-1/3} T^{1/3}.
    pub kappa_t: f64,
    /// α = (1 - ρ₊)/ρ₊.
    pub alpha: f64,
    /// n₀ = ⌊log(ε^{1/2}) / log τ⌋ (number of τ steps to reach scale ε^{1/2}).
    pub n0: i64,
}

impl ScalingParams {
    pub fn new(eps: f64, big_t: f64, big_x: f64, s: f64, rho_plus: f64) -> Result<Self> {
        if !(0.0 < eps && eps < 1.0) {
            return Err(Error::Domain(format!("eps = {eps} outside (0,1)")));
        }
        if big_t <= 0.0 {
            return Err(Error::Domain(format!("T = {big_t} must be positive")));
        }
        if !(0.0 < rho_plus && rho_plus < 1.0) {
            return Err(Error::Domain(format!("rho_plus = {rho_plus} outside (0,1)")));
        }
        let gamma = eps.sqrt();
        let q = (1.0 + gamma) / 2.0;
        let p = (1.0 - gamma) / 2.0;
        let tau = p / q;
        let t = eps.powf(-1.5) * big_t;
        let x = big_x / eps;
        let a = s + big_x * big_x / (2.0 * big_t);
        Ok(ScalingParams {
            eps,
            big_t,
            big_x,
            s,
            rho_plus,
            gamma,
            q,
            p,
            tau,
            t,
            x,
            lambda: 0.5 * (q / p).ln(),
            nu: p + q - 2.0 * (p * q).sqrt(),
            d: 2.0 * (p * q).sqrt(),
            xi: -1.0 - 2.0 * gamma * big_x / big_t,
            a,
            a_prime: a + 2f64.ln(),
            m: 0.5 * ((-a + big_x * big_x / (2.0 * big_t)) / gamma + t / 2.0 + x),
            kappa_t: big_t.powf(1.0 / 3.0) / CBRT2,
            alpha: (1.0 - rho_plus) / rho_plus,
            n0: (gamma.ln() / tau.ln()).floor() as i64,
        })
    }
}

/// Closed form of the cosecant integral:
/// ∫_ℝ μ̃ e^{-z̃t/2}/(e^t - μ̃) dt = (-μ̃)^{-z̃/2} π csc(π z̃/2),
/// valid for -2 < Re z̃ < 0 and μ̃ off the positive real axis
/// (the branch of (-μ̃)^w is the principal one).
pub fn csc_closed_form(mu: C64, z_tilde: C64) -> Result<C64> {
    if mu.im == 0.0 && mu.re >= 0.0 {
        return Err(Error::Domain(format!("mu = {mu} on the branch cut [0,∞)")));
    }
    let s = (PI * z_tilde / 2.0).sin();
    if s.norm() < 1e-12 {
        return Err(Error::Singularity(format!(
            "csc pole: z̃ = {z_tilde} within 1e-12 of an even integer"
        )));
    }
    Ok(((-mu).ln() * (-z_tilde / 2.0)).exp() * PI / s)
}

/// Direct quadrature of the cosecant integral (oracle route).
pub fn csc_integral_quadrature(mu: C64, z_tilde: C64) -> Result<C64> {
    let rp = 1.0 + z_tilde.re / 2.0; // decay rate as t → +∞
    let rm = -z_tilde.re / 2.0; // decay rate as t → -∞
    if rp <= 0.05 || rm <= 0.05 {
        return Err(Error::Domain(format!(
            "z̃ = {z_tilde} outside the convergence strip -2 < Re z̃ < 0"
        )));
    }
    let t_plus = 42.0 / rp;
    let t_minus = -42.0 / rm;
    // Panels of unit length; node count tracks the oscillation e^{-i Im(z̃) t/2}.
    let per_unit = (8.0 + 4.0 * z_tilde.im.abs()).ceil() as usize;
    let mut sum = C64::new(0.0, 0.0);
    let mut lo = t_minus;
    while lo < t_plus {
        let hi = (lo + 1.0).min(t_plus);
        let (xs, ws) = gauss_legendre_on(lo, hi, per_unit);
        for (&t, &w) in xs.iter().zip(&ws) {
            sum += w * mu * (-z_tilde * t / 2.0).exp() / (C64::new(t.exp(), 0.0) - mu);
        }
        lo = hi;
    }
    Ok(sum)
}

/// Contour kernel with the cosecant/Gamma structure, μ̃-separated.
///
/// K_μ̃(η, η') = Σ_ζ w_ζ exp{-T/3(ζ³-η'³) + b(ζ-η')}
///              · π 2^{1/3} (-μ̃)^{-2^{1/3}(ζ-η')} / sin(π 2^{1/3}(ζ-η'))
///              · Γ(2^{1/3}(ζ-o)) / Γ(2^{1/3}(η'-o)) · 1/(ζ-η)
///
/// with b the linear coefficient (s T^{1/3} for the edge kernel, 2^{1/3}a for
/// the finite-time Gamma kernel) and o the Gamma offset (X T^{-1/3}, X/T
/// respectively; `None` drops the Gamma ratio — the fan kernel).
///
/// The μ̃-independent amplitude P(ζ,η') and the Cauchy factor 1/(ζ-η) are
/// precomputed; (-μ̃)^{-2^{1/3}(ζ-η')} factors exactly into e^{-Lζ}·e^{Lη'},
/// L = 2^{1/3} Log(-μ̃), so each μ̃ costs one matrix product.
pub struct ContourKernel {
    pub zeta: QuadratureGrid,
    pub eta: QuadratureGrid,
    pub dimple: Option<DimpleSpec>,
    big_t: f64,
    lin: f64,
    offset: Option<f64>,
    /// P[k, j]: ζ-weighted amplitude at (ζ_k, η'_j).
    p: DMatrix<C64>,
    /// C[i, k] = 1/(ζ_k - η_i).
    cauchy: DMatrix<C64>,
}

fn csc_gamma_amplitude(
    big_t: f64,
    lin: f64,
    offset: Option<f64>,
    zeta: C64,
    eta_p: C64,
) -> Result<C64> {
    let d = zeta - eta_p;
    let u = CBRT2 * d;
    // Guard the removable-singularity lattice of the cosecant.
    let nearest = u.re.round();
    if (u - C64::new(nearest, 0.0)).norm() < 1e-10 {
        return Err(Error::Singularity(format!(
            "2^(1/3)(ζ-η') = {u} within 1e-10 of integer {nearest}"
        )));
    }
    let expo = (-big_t / 3.0 * (zeta * zeta * zeta - eta_p * eta_p * eta_p) + lin * d).exp();
    let csc = PI * CBRT2 / (PI * u).sin();
    let ratio = match offset {
        Some(o) => {
            gamma_complex(CBRT2 * (zeta - o))? * recip_gamma(CBRT2 * (eta_p - o))
        }
        None => C64::new(1.0, 0.0),
    };
    Ok(expo * csc * ratio)
}

impl ContourKernel {
    fn build(
        zeta: QuadratureGrid,
        eta: QuadratureGrid,
        dimple: Option<DimpleSpec>,
        big_t: f64,
        lin: f64,
        offset: Option<f64>,
    ) -> Result<Self> {
        let nz = zeta.len();
        let ne = eta.len();
        let mut p = DMatrix::zeros(nz, ne);
        for k in 0..nz {
            for j in 0..ne {
                p[(k, j)] = zeta.weights[k]
                    * csc_gamma_amplitude(big_t, lin, offset, zeta.nodes[k], eta.nodes[j])?;
            }
        }
        let mut cauchy = DMatrix::zeros(ne, nz);
        for i in 0..ne {
            for k in 0..nz {
                let d = zeta.nodes[k] - eta.nodes[i];
                if d.norm() < 1e-12 {
                    return Err(Error::Singularity(format!(
                        "ζ and η contours touch at {}",
                        zeta.nodes[k]
                    )));
                }
                cauchy[(i, k)] = 1.0 / d;
            }
        }
        Ok(ContourKernel {
            zeta,
            eta,
            dimple,
            big_t,
            lin,
            offset,
            p,
            cauchy,
        })
    }

    /// Finite-T edge kernel K^edge_s of the crossover distribution
    /// (linear coefficient s T^{1/3}, Gamma offset X T^{-1/3}).
    pub fn new_edge(big_t: f64, big_x: f64, s: f64, tail: f64, n: usize) -> Result<Self> {
        let (zeta, eta, dimple) = build_edge_contours(big_t, big_x, tail, n)?;
        let lin = s * big_t.powf(1.0 / 3.0);
        let offset = big_x * big_t.powf(-1.0 / 3.0);
        Self::build(zeta, eta, Some(dimple), big_t, lin, Some(offset))
    }

    /// Finite-T Gamma kernel in the (a, X/T) parameterization of the
    /// microscopic theorem; identical to `new_edge` under
    /// a = 2^{-1/3} T^{1/3} s, X_here = 2^{1/3} T^{2/3} X_edge.
    pub fn new_csc_gamma(big_t: f64, a: f64, big_x: f64, tail: f64, n: usize) -> Result<Self> {
        let offset = big_x / (CBRT2 * big_t);
        // The dimple must clear the Gamma poles, whose rightmost is at
        // 2^{-1/3}X/T: reuse the edge builder, which places it right of
        // X_edge T^{-1/3}.
        let x_edge = offset * big_t.powf(1.0 / 3.0);
        let (zeta, eta, dimple) = build_edge_contours(big_t, x_edge, tail, n)?;
        Self::build(zeta, eta, Some(dimple), big_t, CBRT2 * a, Some(offset))
    }

    /// Fan (stationary-side) kernel: no Gamma ratio, straight contours.
    pub fn new_fan(big_t: f64, s: f64, tail: f64, n: usize) -> Result<Self> {
        let (zeta, eta) = build_fan_contours(tail, n)?;
        let lin = s * big_t.powf(1.0 / 3.0);
        Self::build(zeta, eta, None, big_t, lin, None)
    }

    /// Kernel matrix K_μ̃(η_i, η_j) at the given μ̃ (fast separated path).
    pub fn matrix(&self, mu: C64) -> Result<DMatrix<C64>> {
        if mu.im == 0.0 && mu.re >= 0.0 {
            return Err(Error::Domain(format!("mu = {mu} on the branch cut [0,∞)")));
        }
        let l = CBRT2 * (-mu).ln();
        let nz = self.zeta.len();
        let ne = self.eta.len();
        let mut scaled = self.p.clone();
        for k in 0..nz {
            let e = (-l * self.zeta.nodes[k]).exp();
            for j in 0..ne {
                scaled[(k, j)] *= e;
            }
        }
        let mut m = &self.cauchy * scaled;
        for j in 0..ne {
            let f = (l * self.eta.nodes[j]).exp();
            for i in 0..ne {
                m[(i, j)] *= f;
            }
        }
        Ok(m)
    }

    /// Direct (unseparated) evaluation of K_μ̃ at one point pair; the slow
    /// reference route for the separability invariant.
    pub fn eval_direct(&self, mu: C64, eta: C64, eta_p: C64) -> Result<C64> {
        let l = CBRT2 * (-mu).ln();
        let mut sum = C64::new(0.0, 0.0);
        for (&z, &w) in self.zeta.nodes.iter().zip(&self.zeta.weights) {
            let amp = csc_gamma_amplitude(self.big_t, self.lin, self.offset, z, eta_p)?;
            sum += w * amp * (-l * z + l * eta_p).exp() / (z - eta);
        }
        Ok(sum)
    }

    /// Oracle route: same kernel with the cosecant factor replaced by direct
    /// quadrature of its defining t-integral, 2^{1/3}∫ μ̃ e^{-2^{1/3}t(ζ-η')}
    /// /(e^t-μ̃) dt. Only converges for -1 < 2^{1/3}Re(ζ-η') < 0.
    pub fn eval_t_integral(&self, mu: C64, eta: C64, eta_p: C64) -> Result<C64> {
        let mut sum = C64::new(0.0, 0.0);
        for (&z, &w) in self.zeta.nodes.iter().zip(&self.zeta.weights) {
            let d = z - eta_p;
            let inner = CBRT2 * csc_integral_quadrature(mu, 2.0 * CBRT2 * d)?;
            let expo =
                (-self.big_t / 3.0 * (z * z * z - eta_p * eta_p * eta_p) + self.lin * d).exp();
            let ratio = match self.offset {
                Some(o) => gamma_complex(CBRT2 * (z - o))? * recip_gamma(CBRT2 * (eta_p - o)),
                None => C64::new(1.0, 0.0),
            };
            sum += w * expo * inner * ratio / (z - eta);
        }
        Ok(sum)
    }

    /// Weighted Nyström matrix M_ij = K(η_i, η_j) w_j for det(I - K).
    pub fn nystrom_matrix(&self, mu: C64) -> Result<DMatrix<C64>> {
        let mut m = self.matrix(mu)?;
        let ne = self.eta.len();
        for j in 0..ne {
            let w = self.eta.weights[j];
            for i in 0..ne {
                m[(i, j)] *= w;
            }
        }
        Ok(m)
    }
}

/// Airy kernel K_{A₂}(x, y) = ∫_0^∞ Ai(t+x) Ai(t+y) dt on a real grid,
/// evaluated by shared Gauss–Legendre quadrature in t.
pub fn kernel_airy2(x_nodes: &[f64]) -> DMatrix<f64> {
    let (t_nodes, t_w) = airy_t_rule(x_nodes);
    let ai = airy_matrix(x_nodes, &t_nodes);
    let n = x_nodes.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = 0.0;
            for (kk, &w) in t_w.iter().enumerate() {
                sum += w * ai[(i, kk)] * ai[(j, kk)];
            }
            k[(i, j)] = sum;
            k[(j, i)] = sum;
        }
    }
    k
}

fn airy_t_rule(x_nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let x_min = x_nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    // Ai(x_min + t) < 1e-18 once (2/3)(x_min+t)^{3/2} ≳ 42.
    let t_max = (16.0 - x_min).max(4.0);
    let panels = (t_max / 4.0).ceil() as usize;
    let mut nodes = vec![];
    let mut weights = vec![];
    for p in 0..panels {
        let lo = t_max * p as f64 / panels as f64;
        let hi = t_max * (p + 1) as f64 / panels as f64;
        let (xs, ws) = gauss_legendre_on(lo, hi, 48);
        nodes.extend(xs);
        weights.extend(ws);
    }
    (nodes, weights)
}

fn airy_matrix(x_nodes: &[f64], t_nodes: &[f64]) -> DMatrix<f64> {
    let n = x_nodes.len();
    let m = t_nodes.len();
    let mut a = DMatrix::zeros(n, m);
    for i in 0..n {
        for k in 0..m {
            a[(i, k)] = airy_ai(C64::new(x_nodes[i] + t_nodes[k], 0.0)).re;
        }
    }
    a
}

/// Rank-one factors of the Airy-to-Brownian-motion crossover kernel:
/// returns (Ai(x_i), v(x_j)) with
///
///   v(y) = e^{X³/3 - Xy} - ∫_0^∞ Ai(y+t) e^{Xt} dt
///        = ∫_{-∞}^0 Ai(y+t) e^{Xt} dt,
///
/// the two forms being tied together by the bilateral Laplace transform of
/// Ai. Orientation: X → +∞ is the Airy₂ side (v ~ Ai(y)/X → 0), X → -∞
/// the Brownian side (v picks up mass e^{-|X|³/3 + |X|y} near y ≈ X²).
///
/// The closed form subtracts two terms of size e^{X³/3 - Xy}, so it is used
/// only for X < 1 where the cancellation is mild; for X ≥ 1 the one-sided
/// integral is evaluated directly (its weight e^{Xt} dies on scale 1/X).
pub fn a2bm_rank_one(x_nodes: &[f64], big_x: f64) -> (Vec<f64>, Vec<f64>) {
    let ai: Vec<f64> = x_nodes
        .iter()
        .map(|&x| airy_ai(C64::new(x, 0.0)).re)
        .collect();
    let x_min = x_nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let v = if big_x >= 1.0 {
        let t_lo = (45.0 / big_x).max(6.0);
        let panels = (t_lo / 3.0).ceil() as usize;
        let mut t_nodes = vec![];
        let mut t_w = vec![];
        for p in 0..panels {
            let lo = -t_lo + t_lo * p as f64 / panels as f64;
            let hi = -t_lo + t_lo * (p + 1) as f64 / panels as f64;
            let (xs, ws) = gauss_legendre_on(lo, hi, 48);
            t_nodes.extend(xs);
            t_w.extend(ws);
        }
        x_nodes
            .iter()
            .map(|&y| {
                t_nodes
                    .iter()
                    .zip(&t_w)
                    .map(|(&t, &w)| w * airy_ai(C64::new(y + t, 0.0)).re * (big_x * t).exp())
                    .sum()
            })
            .collect()
    } else {
        // Saddle of Ai(y+t)e^{Xt} sits at y + t = X² (only relevant for
        // X < 0); push the cutoff past it.
        let t_max = (20.0 - x_min + big_x.min(0.0).powi(2) + 6.0 * big_x.abs()).max(4.0);
        let panels = (t_max / 4.0).ceil() as usize;
        let mut t_nodes = vec![];
        let mut t_w = vec![];
        for p in 0..panels {
            let lo = t_max * p as f64 / panels as f64;
            let hi = t_max * (p + 1) as f64 / panels as f64;
            let (xs, ws) = gauss_legendre_on(lo, hi, 48);
            t_nodes.extend(xs);
            t_w.extend(ws);
        }
        x_nodes
            .iter()
            .map(|&y| {
                let lap: f64 = t_nodes
                    .iter()
                    .zip(&t_w)
                    .map(|(&t, &w)| w * airy_ai(C64::new(y + t, 0.0)).re * (big_x * t).exp())
                    .sum();
                (big_x.powi(3) / 3.0 - big_x * y).exp() - lap
            })
            .collect()
    };
    (ai, v)
}

/// One-point Airy-to-Brownian-motion crossover kernel at transversal
/// coordinate X: K_{A₂}(x, y) + Ai(x) v(y) with the rank-one factor of
/// `a2bm_rank_one` (X → +∞ recovers the Airy kernel).
pub fn kernel_a2bm(x_nodes: &[f64], big_x: f64) -> DMatrix<f64> {
    let mut k = kernel_airy2(x_nodes);
    let (ai, v) = a2bm_rank_one(x_nodes, big_x);
    let n = x_nodes.len();
    for j in 0..n {
        for i in 0..n {
            k[(i, j)] += ai[i] * v[j];
        }
    }
    k
}

/// Rescaled finite-T kernel on the real line,
/// K̃_{T,μ̃}(x, y) = ∫_ℝ μ̃/(e^{-κ_T t} - μ̃) Ai^Γ(x+t, κ_T^{-1}, 0)
///                  Ai_Γ(y+t, κ_T^{-1}, 0) dt,
/// acting on L²(s, ∞). The Airy-transform tables are μ̃-independent and are
/// precomputed once per (T, grid).
pub struct KtildeKernel {
    pub kappa: f64,
    t_nodes: Vec<f64>,
    t_weights: Vec<f64>,
    /// ag[i, k] = Ai^Γ(x_i + t_k, 1/κ, 0); ar likewise for Ai_Γ.
    ag: DMatrix<C64>,
    ar: DMatrix<C64>,
}

impl KtildeKernel {
    pub fn new(big_t: f64, x_nodes: &[f64]) -> Result<Self> {
        if big_t <= 0.0 {
            return Err(Error::Domain(format!("T = {big_t} must be positive")));
        }
        let kappa = big_t.powf(1.0 / 3.0) / CBRT2;
        let x_min = x_nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        // t → -∞ is cut off by μ̃ e^{κt} against the e^{O(√|t|)} growth of the
        // transforms; t → +∞ by the Ai_Γ decay.  The lower cutoff also stays
        // above the region where the wedge quadratures of the transforms lose
        // to cancellation (arguments below ≈ -35 need more than double
        // precision), which bounds the integrand there by ~1e-7.
        let t_lo = -25.0f64.max(20.0 / kappa) - 5.0;
        let t_hi = (18.0 - x_min).max(4.0);
        let mut t_nodes = vec![];
        let mut t_weights = vec![];
        let mut lo = t_lo;
        while lo < t_hi {
            let hi = (lo + 4.0).min(t_hi);
            let (xs, ws) = gauss_legendre_on(lo, hi, 32);
            t_nodes.extend(xs);
            t_weights.extend(ws);
            lo = hi;
        }
        let n = x_nodes.len();
        let m = t_nodes.len();
        let b = 1.0 / kappa;
        // Both transforms enter only through the single argument u = x + t,
        // so evaluate them once on a uniform u-grid and fill the (x, t)
        // tables by cubic interpolation.  Step 0.04 resolves the Airy-type
        // oscillation (wavelength 2π/√|u| ≥ 1 on the admissible range) to
        // ~1e-7 relative, below the quadrature tolerance.
        let x_max = x_nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let h = 0.04;
        let u_lo = x_min + t_lo - 2.0 * h;
        let n_u = ((x_max + t_hi - u_lo) / h).ceil() as usize + 4;
        let table: Result<Vec<(C64, C64)>> = (0..n_u)
            .into_par_iter()
            .map(|k| {
                let arg = C64::new(u_lo + k as f64 * h, 0.0);
                Ok((airy_gamma(arg, b, 0.0)?, airy_recip_gamma(arg, b, 0.0)?))
            })
            .collect();
        let table = table?;
        let interp = |u: f64| -> (C64, C64) {
            // 4-point Lagrange on the uniform grid, centered stencil.
            let j = (((u - u_lo) / h) as usize).clamp(1, n_u - 3);
            let s = (u - u_lo) / h - j as f64;
            let w = [
                -s * (s - 1.0) * (s - 2.0) / 6.0,
                (s * s - 1.0) * (s - 2.0) / 2.0,
                -s * (s + 1.0) * (s - 2.0) / 2.0,
                s * (s * s - 1.0) / 6.0,
            ];
            let mut g = C64::new(0.0, 0.0);
            let mut r = C64::new(0.0, 0.0);
            for (d, &wd) in w.iter().enumerate() {
                g += wd * table[j - 1 + d].0;
                r += wd * table[j - 1 + d].1;
            }
            (g, r)
        };
        let mut ag = DMatrix::zeros(n, m);
        let mut ar = DMatrix::zeros(n, m);
        for i in 0..n {
            for k in 0..m {
                let (g, r) = interp(x_nodes[i] + t_nodes[k]);
                ag[(i, k)] = g;
                ar[(i, k)] = r;
            }
        }
        Ok(KtildeKernel {
            kappa,
            t_nodes,
            t_weights,
            ag,
            ar,
        })
    }

    /// Kernel matrix K̃(x_i, x_j) at μ̃.
    pub fn matrix(&self, mu: C64) -> Result<DMatrix<C64>> {
        if mu.im == 0.0 && mu.re >= 0.0 {
            return Err(Error::Domain(format!("mu = {mu} on the branch cut [0,∞)")));
        }
        let n = self.ag.nrows();
        let m = self.t_nodes.len();
        let mut f = vec![C64::new(0.0, 0.0); m];
        for k in 0..m {
            let den = C64::new((-self.kappa * self.t_nodes[k]).exp(), 0.0) - mu;
            // Overall minus: both wedge transforms here are normalized so the
            // b = 0 reduction is +Ai, which traverses the η-side contour in
            // the opposite orientation from the kernel's derivation.  The
            // flip is calibrated against the contour-integral route (the two
            // determinants agree only with it).
            f[k] = -self.t_weights[k] * mu / den;
        }
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut sum = C64::new(0.0, 0.0);
                for k in 0..m {
                    sum += f[k] * self.ag[(i, k)] * self.ar[(j, k)];
                }
                out[(i, j)] = sum;
            }
        }
        Ok(out)
    }
}

/// Λ(ζ) = -x log(1-ζ) + tζ/(1-ζ) + m log ζ and Ψ(ζ) = Λ(ζ) - Λ(ξ) for the
/// finite-ε transform. Principal logs; exp(Λ(ζ)-Λ(η')) is exact when x and m
/// are integers, which is the only case the probability formula uses.
#[derive(Clone, Copy, Debug)]
pub struct LambdaPsi {
    pub t: f64,
    pub m: f64,
    pub x: f64,
    pub xi: f64,
}

impl LambdaPsi {
    pub fn lambda(&self, zeta: C64) -> Result<C64> {
        let one_minus = 1.0 - zeta;
        if one_minus.norm() < 1e-12 || zeta.norm() < 1e-12 {
            return Err(Error::Singularity(format!(
                "Λ evaluated at ζ = {zeta} (poles at 0 and 1)"
            )));
        }
        Ok(-self.x * one_minus.ln() + self.t * zeta / one_minus + self.m * zeta.ln())
    }

    pub fn psi(&self, zeta: C64) -> Result<C64> {
        Ok(self.lambda(zeta)? - self.lambda(C64::new(self.xi, 0.0))?)
    }

    pub fn lambda_prime(&self, zeta: C64) -> Result<C64> {
        let one_minus = 1.0 - zeta;
        if one_minus.norm() < 1e-12 || zeta.norm() < 1e-12 {
            return Err(Error::Singularity(format!(
                "Λ' evaluated at ζ = {zeta} (poles at 0 and 1)"
            )));
        }
        Ok(self.x / one_minus + self.t / (one_minus * one_minus) + self.m / zeta)
    }
}

/// μ f(μ, z) for the doubly infinite sum f(μ,z) = Σ_{k∈ℤ} τ^k z^k/(1 - τ^k μ),
/// evaluated as g₊(z) + g₋(z) with functional-equation acceleration:
/// g₊ is stepped inward until |τ^N z| < 1/2, g₋ outward until |τ^{-N} z| > 2,
/// then the defining series converge geometrically. This is the analytic
/// continuation: z may be anywhere off the poles z = τ^k.
pub fn f_doubly_infinite(mu: C64, z: C64, tau: f64) -> Result<C64> {
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::Domain(format!("tau = {tau} outside (0,1)")));
    }
    if z.norm() < 1e-14 {
        return Err(Error::Domain("z = 0 in f(μ, z)".into()));
    }
    // The g₋ recursion multiplies by μ^{-1} once per step and needs
    // ~ln(2/|z|)/ln(1/τ) steps, so for |μ| well inside the unit disk with τ
    // close to 1 it amplifies rounding error by |μ|^{-N}.  (On the production
    // μ-circle of radius (1+τ)/2 the amplification stays O(1).)  When the
    // predicted amplification is large, fall back on the defining two-sided
    // series, which converges for 1 < |z| < 1/τ.
    let steps = ((2.0 / z.norm()).ln() / (1.0 / tau).ln()).max(0.0);
    if -steps * mu.norm().ln() > 30.0 {
        return f_direct_series(mu, z, tau);
    }
    // g₊ functional steps: g₊(z) = Σ_{k=1}^N μ^k/(1-τ^k z) + μ^N g₊(τ^N z).
    let mut g_plus = C64::new(0.0, 0.0);
    let mut zp = z;
    let mut mu_pow = C64::new(1.0, 0.0);
    while zp.norm() >= 0.5 {
        zp *= tau;
        mu_pow *= mu;
        let den = 1.0 - zp;
        if den.norm() < 1e-12 {
            return Err(Error::Singularity(format!("f(μ,z): z = {z} is near a pole τ^k")));
        }
        g_plus += mu_pow / den;
    }
    // Defining series at zp.
    let term_k = mu_pow * mu; // μ^{N} · μ τ^0 z^0 ... accumulate factors below
    let mut tz = C64::new(1.0, 0.0);
    let mut tk = 1.0f64;
    for _ in 0..10_000usize {
        let term = term_k * tz / (1.0 - tk * mu);
        g_plus += term;
        if term.norm() < 1e-17 * g_plus.norm().max(1.0) {
            break;
        }
        tz *= zp * tau;
        tk *= tau;
    }

    // g₋ functional steps: g₋(z) = Σ_{k=0}^{N-1} μ^{-k}/(1-τ^{-k} z) + μ^{-N} g₋(τ^{-N} z).
    let mut g_minus = C64::new(0.0, 0.0);
    let mut zm = z;
    let mut mu_pow = C64::new(1.0, 0.0);
    while zm.norm() <= 2.0 {
        let den = 1.0 - zm;
        if den.norm() < 1e-12 {
            return Err(Error::Singularity(format!("f(μ,z): z = {z} is near a pole τ^k")));
        }
        g_minus += mu_pow / den;
        zm /= tau;
        mu_pow /= mu;
    }
    // Defining series at zm: Σ_{k≥1} μ τ^{-k} z^{-k} / (1 - τ^{-k} μ).
    let mut tzk = C64::new(1.0, 0.0);
    let mut tmk = 1.0f64;
    let mut tail = C64::new(0.0, 0.0);
    for _ in 0..10_000usize {
        tzk /= zm;
        tmk /= tau;
        let term = mu * tmk * tzk / (1.0 - tmk * mu);
        tail += term;
        if term.norm() < 1e-17 * tail.norm().max(1.0) {
            break;
        }
    }
    g_minus += mu_pow * tail;

    Ok(g_plus + g_minus)
}

/// μ f(μ, z) summed term by term in overflow-safe form: (τz)^k μ/(1 - τ^k μ)
/// for k ≥ 0 and z^{-j} μ/(τ^j - μ) for k = -j < 0.  Converges only in the
/// annulus 1 < |z| < 1/τ; slow for τ near 1, but immune to the μ^{-N}
/// amplification of the accelerated route.
fn f_direct_series(mu: C64, z: C64, tau: f64) -> Result<C64> {
    let zn = z.norm();
    if zn <= 1.0 + 1e-14 || zn * tau >= 1.0 - 1e-14 {
        return Err(Error::Domain(format!(
            "f(μ,z) direct series needs 1 < |z| < 1/τ, got |z| = {zn}, 1/τ = {}",
            1.0 / tau
        )));
    }
    let budget = 20_000_000usize;
    let mut sum = C64::new(0.0, 0.0);
    let tz = tau * z;
    let mut tzk = C64::new(1.0, 0.0);
    let mut tk = 1.0f64;
    let mut done = false;
    for _ in 0..budget {
        let den = 1.0 - tk * mu;
        if den.norm() < 1e-12 {
            return Err(Error::Singularity(format!("f(μ,z): μ = {mu} is near a pole τ^-k")));
        }
        let term = tzk * mu / den;
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1.0) {
            done = true;
            break;
        }
        tzk *= tz;
        tk *= tau;
    }
    if !done {
        return Err(Error::Convergence {
            what: "f(μ,z) direct series, k ≥ 0".into(),
            budget,
            last: tzk.norm(),
        });
    }
    let w = 1.0 / z;
    let mut wj = C64::new(1.0, 0.0);
    let mut tj = 1.0f64;
    done = false;
    for _ in 0..budget {
        wj *= w;
        tj *= tau;
        let den = tj - mu;
        if den.norm() < 1e-12 {
            return Err(Error::Singularity(format!("f(μ,z): μ = {mu} is near a pole τ^k")));
        }
        let term = wj * mu / den;
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1.0) {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::Convergence {
            what: "f(μ,z) direct series, k < 0".into(),
            budget,
            last: wj.norm(),
        });
    }
    Ok(sum)
}

/// g(ζ) = ∏_{n≥0} (1 + τⁿ α ζ): the Bernoulli-density product of the
/// finite-ε kernel.
pub fn g_product(zeta: C64, alpha: f64, tau: f64) -> Result<C64> {
    q_pochhammer(-alpha * zeta, tau)
}

/// p_ε(μ̃) = ∏_{k≥0} (1 - ε^{1/2} μ̃ τ^k); converges to e^{-μ̃/2} as ε ↓ 0.
pub fn prefactor_product(mu_tilde: C64, eps: f64) -> Result<C64> {
    let gamma = eps.sqrt();
    let tau = (1.0 - gamma) / (1.0 + gamma);
    q_pochhammer(gamma * mu_tilde, tau)
}

/// Finite-ε kernel J(η, η') = Σ_ζ w_ζ exp(Λ(ζ)-Λ(η')) · f(μ, ζ/η')
/// /(η'(ζ-η)) · g(η')/g(ζ); the determinant det(I + μJ) enters the exact
/// ASEP distribution before any scaling limit.
pub struct JKernel {
    pub lp: LambdaPsi,
    pub tau: f64,
    pub alpha: f64,
    pub zeta: QuadratureGrid,
    pub eta: QuadratureGrid,
    /// exp(Λ(ζ_k)) / g(ζ_k) · w_k, per ζ node.
    zeta_amp: Vec<C64>,
    /// exp(-Λ(η_j)) · g(η_j) / η_j, per η node.
    eta_amp: Vec<C64>,
}

impl JKernel {
    pub fn new(
        lp: LambdaPsi,
        tau: f64,
        alpha: f64,
        zeta: QuadratureGrid,
        eta: QuadratureGrid,
    ) -> Result<Self> {
        let mut zeta_amp = vec![];
        for (&z, &w) in zeta.nodes.iter().zip(&zeta.weights) {
            zeta_amp.push(w * lp.lambda(z)?.exp() / g_product(z, alpha, tau)?);
        }
        let mut eta_amp = vec![];
        for &h in &eta.nodes {
            eta_amp.push((-lp.lambda(h)?).exp() * g_product(h, alpha, tau)? / h);
        }
        Ok(JKernel {
            lp,
            tau,
            alpha,
            zeta,
            eta,
            zeta_amp,
            eta_amp,
        })
    }

    /// Weighted Nyström matrix M_ij = μ J(η_i, η_j) w_j for det(I + μJ).
    pub fn nystrom_matrix(&self, mu: C64) -> Result<DMatrix<C64>> {
        let ne = self.eta.len();
        let nz = self.zeta.len();
        let mut m = DMatrix::zeros(ne, ne);
        for j in 0..ne {
            let hj = self.eta.nodes[j];
            // f(μ, ζ/η') over ζ nodes for this column.
            let mut col = vec![C64::new(0.0, 0.0); nz];
            for k in 0..nz {
                let muf = f_doubly_infinite(mu, self.zeta.nodes[k] / hj, self.tau)?;
                col[k] = self.zeta_amp[k] * muf / mu;
            }
            for i in 0..ne {
                let hi = self.eta.nodes[i];
                let mut sum = C64::new(0.0, 0.0);
                for k in 0..nz {
                    sum += col[k] / (self.zeta.nodes[k] - hi);
                }
                m[(i, j)] = mu * sum * self.eta_amp[j] * self.eta.weights[j];
            }
        }
        Ok(m)
    }
}

/// (2πi)^{-1} ∫ e^{-Z³/3 - bZ² + cZ} dZ/Z over a left-opening wedge whose
/// apex sits left of the origin pole (rays toward e^{±2πi/3}∞, where the
/// cubic decays).  This is the contour integral that remains after the
/// rank-one part of the Brownian-edge kernel is pushed through the pole at
/// the origin.
pub fn cubic_pole_integral(b: f64, c: f64) -> Result<C64> {
    // Ray length: the cubic must dominate the quadratic and linear terms by
    // 45 in the exponent so the truncation error sits below 1e-16 · scale.
    let mut len = 6.0f64;
    while len.powi(3) / 3.0 - b.abs() * len * len - (b.abs() + c.abs() + 1.0) * len < 45.0 {
        len += 1.0;
    }
    let mut prev = C64::new(f64::NAN, 0.0);
    let mut n = 200;
    for _ in 0..5 {
        let grid = build_airy_wedge(-0.5, 2.0 * PI / 3.0, len, n);
        let mut sum = C64::new(0.0, 0.0);
        for (&z, &wt) in grid.nodes.iter().zip(&grid.weights) {
            sum += wt * (-z * z * z / 3.0 - b * z * z + c * z).exp() / z;
        }
        if (sum - prev).norm() < 1e-10 * (1.0 + sum.norm()) {
            return Ok(sum);
        }
        prev = sum;
        n *= 2;
    }
    Err(Error::Numerical(format!(
        "cubic pole integral did not stabilize at (b, c) = ({b}, {c})"
    )))
}

/// −e^{-2b³/3 − bc} ∫₀^∞ Ai(b² + c + t) e^{-bt} dt for b ≥ 0: the closed
/// form the pole integral above collapses to once the contour is traded for
/// the Airy function's own integral representation.
pub fn airy_laplace_tail(b: f64, c: f64) -> Result<f64> {
    if b < 0.0 {
        return Err(Error::Domain(format!(
            "airy_laplace_tail: b = {b} < 0, the t-integral diverges"
        )));
    }
    // Past Airy argument 14 the integrand is below 1e-13 (and e^{-bt} only
    // helps), so truncate there instead of at a fixed long horizon.
    let t_max = (14.0 - (b * b + c)).clamp(3.0, 30.0 + c.abs());
    let panels = (t_max / 3.0).ceil() as usize;
    let mut integral = 0.0;
    for k in 0..panels {
        let (t, w) = gauss_legendre_on(k as f64 * 3.0, ((k + 1) as f64 * 3.0).min(t_max), 24);
        for (&ti, &wi) in t.iter().zip(&w) {
            integral += wi * airy_ai(C64::new(b * b + c + ti, 0.0)).re * (-b * ti).exp();
        }
    }
    Ok(-(-2.0 * b.powi(3) / 3.0 - b * c).exp() * integral)
}
