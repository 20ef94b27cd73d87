//! Contours and quadrature grids.
//!
//! Every contour integral in this crate carries an implicit 1/(2πi): the
//! complex weights stored in a [`QuadratureGrid`] are `gl_weight * z'(u) / (2πi)`
//! (or the trapezoidal equivalent on circles), so a plain weighted sum of
//! integrand values *is* the normalized contour integral.

use crate::{C64, Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Re(ζ) distance between the two edge contours: c₃ = 2^{-4/3}.
pub const C3: f64 = 0.396_850_262_992_049_87; // 2^(-4/3)

const TWO_PI_I: C64 = C64::new(0.0, 2.0 * PI);

/// Tags for the segments a contour is assembled from.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum Segment {
    /// Left semicircle of the μ contour, radius 1, θ ∈ [π/2, 3π/2].
    MuSemicircle,
    /// Horizontal ray x ± i of the μ contour, truncated at `x_max`.
    MuRay { imag: f64, x_max: f64 },
    /// Vertical segment at fixed real part, from `im_lo` to `im_hi` (upward).
    VerticalLine { re: f64, im_lo: f64, im_hi: f64 },
    /// Right-bulging semicircular dimple centered on the real axis.
    Dimple { center: f64, radius: f64 },
    /// Full circle centered on the real axis, traversed counterclockwise.
    Circle { center: f64, radius: f64 },
    /// Ray from an apex on the real axis to `apex + len·e^{iθ}`.
    AiryRay { apex: f64, angle: f64, len: f64 },
}

/// Geometric description of a contour (ordered segments).
#[derive(Clone, Debug, Serialize)]
pub struct ContourSpec {
    pub segments: Vec<Segment>,
}

/// Dimple geometry, reported alongside the edge contours.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DimpleSpec {
    pub center: f64,
    pub radius: f64,
}

/// Discretized contour: nodes and complex weights (weights include 1/(2πi)).
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureGrid {
    pub spec: ContourSpec,
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted sum of `f` over the grid: the (1/2πi)-normalized contour integral.
    pub fn integrate(&self, mut f: impl FnMut(C64) -> C64) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }

    fn push_segment(&mut self, seg: Segment, n: usize) {
        let (xs, ws) = gauss_legendre(n);
        match seg {
            Segment::MuSemicircle => {
                // θ from π/2 to 3π/2, z = e^{iθ}, dz = i e^{iθ} dθ.
                for (&x, &w) in xs.iter().zip(&ws) {
                    let theta = PI / 2.0 + PI * (x + 1.0) / 2.0;
                    let z = C64::from_polar(1.0, theta);
                    self.nodes.push(z);
                    self.weights.push(C64::i() * z * (w * PI / 2.0) / TWO_PI_I);
                }
            }
            Segment::MuRay { imag, x_max } => {
                // Upper ray traversed inward (x_max → 0), lower ray outward,
                // so the closed-at-infinity contour is counterclockwise.
                let inward = imag > 0.0;
                for (&x, &w) in xs.iter().zip(&ws) {
                    let u = x_max * (x + 1.0) / 2.0;
                    let re = if inward { x_max - u } else { u };
                    self.nodes.push(C64::new(re, imag));
                    let dz = if inward { -1.0 } else { 1.0 };
                    self.weights
                        .push(C64::new(dz * w * x_max / 2.0, 0.0) / TWO_PI_I);
                }
            }
            Segment::VerticalLine { re, im_lo, im_hi } => {
                let half = (im_hi - im_lo) / 2.0;
                let mid = (im_hi + im_lo) / 2.0;
                for (&x, &w) in xs.iter().zip(&ws) {
                    self.nodes.push(C64::new(re, mid + half * x));
                    self.weights.push(C64::i() * (w * half) / TWO_PI_I);
                }
            }
            Segment::Dimple { center, radius } => {
                // θ from -π/2 to π/2: bulges right, traversed upward.
                for (&x, &w) in xs.iter().zip(&ws) {
                    let theta = PI / 2.0 * x;
                    let z = C64::new(center, 0.0) + C64::from_polar(radius, theta);
                    let dz = C64::i() * C64::from_polar(radius, theta);
                    self.nodes.push(z);
                    self.weights.push(dz * (w * PI / 2.0) / TWO_PI_I);
                }
            }
            Segment::Circle { center, radius } => {
                // Uniform (trapezoidal) nodes: spectrally accurate on circles.
                let dtheta = 2.0 * PI / n as f64;
                for k in 0..n {
                    let theta = dtheta * (k as f64 + 0.5) - PI;
                    let e = C64::from_polar(radius, theta);
                    self.nodes.push(C64::new(center, 0.0) + e);
                    self.weights.push(C64::i() * e * dtheta / TWO_PI_I);
                }
            }
            Segment::AiryRay { apex, angle, len } => {
                let dir = C64::from_polar(1.0, angle);
                // Lower ray (angle < 0) runs from the far end toward the apex.
                let inward = angle < 0.0;
                for (&x, &w) in xs.iter().zip(&ws) {
                    let u = len * (x + 1.0) / 2.0;
                    let u = if inward { len - u } else { u };
                    self.nodes.push(C64::new(apex, 0.0) + dir * u);
                    let dz = if inward { -dir } else { dir };
                    self.weights.push(dz * (w * len / 2.0) / TWO_PI_I);
                }
            }
        }
        self.spec.segments.push(seg);
    }
}

fn grid_from_segments(segments: Vec<(Segment, usize)>) -> QuadratureGrid {
    let mut g = QuadratureGrid {
        spec: ContourSpec { segments: vec![] },
        nodes: vec![],
        weights: vec![],
    };
    for (seg, n) in segments {
        g.push_segment(seg, n);
    }
    g
}

/// μ̃ contour C̃: unit semicircle through -1 plus rays x ± i, x ∈ (0, x_max].
///
/// `n` is the node count per segment. The closed-at-infinity orientation is
/// counterclockwise, so ∮ e^{-μ}/μ dμ/(2πi) → 1 as x_max → ∞.
pub fn build_mu_contour(x_max: f64, n: usize) -> Result<QuadratureGrid> {
    if x_max < 1.0 {
        return Err(Error::Arg(format!("mu contour x_max = {x_max} < 1")));
    }
    if n < 8 {
        return Err(Error::Arg(format!("mu contour n = {n} < 8")));
    }
    Ok(grid_from_segments(vec![
        (Segment::MuRay { imag: 1.0, x_max }, n),
        (Segment::MuSemicircle, n),
        (Segment::MuRay { imag: -1.0, x_max }, n),
    ]))
}

/// Rightmost pole of the Gamma factor Γ(2^{1/3}(ζ - XT^{-1/3})) is at XT^{-1/3};
/// the rest sit 2^{-1/3} apart to its left.
fn gamma_pole_positions(x_over_t13: f64, re_min: f64) -> Vec<f64> {
    let step = 2f64.powf(-1.0 / 3.0);
    let mut poles = vec![];
    let mut p = x_over_t13;
    while p > re_min - 1.0 {
        poles.push(p);
        p -= step;
    }
    poles
}

fn check_pole_clearance(grid: &QuadratureGrid, poles: &[f64], min_dist: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for &z in &grid.nodes {
        for &p in poles {
            let d = (z - C64::new(p, 0.0)).norm();
            if d < best {
                best = d;
            }
            if d < min_dist {
                return Err(Error::ContourPole {
                    dist: d,
                    pole_re: p,
                    pole_im: 0.0,
                });
            }
        }
    }
    Ok(best)
}

/// Edge contours Γ̃_ζ (Re = -c₃/2, dimpled right of the Gamma poles) and
/// Γ̃_η = Γ̃_ζ + c₃. Vertical tails are truncated at ±i·tail_height; `n` is
/// the node count per segment (three segments per contour).
///
/// Returns (ζ grid, η grid, dimple). The η grid is the ζ grid shifted by the
/// real constant c₃ node-for-node, which keeps ζ_i - η'_j off the integer
/// lattice of the cosecant factor: matched heights give Re = -c₃ exactly
/// (so 2^{1/3}(ζ-η') = -1/2 + 0i), unmatched heights have Im ≠ 0.
pub fn build_edge_contours(
    big_t: f64,
    big_x: f64,
    tail_height: f64,
    n: usize,
) -> Result<(QuadratureGrid, QuadratureGrid, DimpleSpec)> {
    if big_t <= 0.0 {
        return Err(Error::Domain(format!("T = {big_t} must be positive")));
    }
    if tail_height < 4.0 {
        return Err(Error::Arg(format!("tail_height = {tail_height} < 4")));
    }
    if n < 16 {
        return Err(Error::Arg(format!("n = {n} < 16")));
    }
    let xp = big_x * big_t.powf(-1.0 / 3.0);
    let radius = (2.0 * xp + C3 + 0.5).max(0.5);
    if radius >= tail_height {
        return Err(Error::Geometry(format!(
            "dimple radius {radius} exceeds tail_height {tail_height}"
        )));
    }
    let center = -C3 / 2.0;
    let zeta = grid_from_segments(vec![
        (
            Segment::VerticalLine {
                re: center,
                im_lo: -tail_height,
                im_hi: -radius,
            },
            n,
        ),
        (Segment::Dimple { center, radius }, n),
        (
            Segment::VerticalLine {
                re: center,
                im_lo: radius,
                im_hi: tail_height,
            },
            n,
        ),
    ]);
    let mut eta = zeta.clone();
    for z in &mut eta.nodes {
        *z += C3;
    }
    eta.spec = ContourSpec {
        segments: zeta
            .spec
            .segments
            .iter()
            .map(|s| match *s {
                Segment::VerticalLine { re, im_lo, im_hi } => Segment::VerticalLine {
                    re: re + C3,
                    im_lo,
                    im_hi,
                },
                Segment::Dimple { center, radius } => Segment::Dimple {
                    center: center + C3,
                    radius,
                },
                ref other => other.clone(),
            })
            .collect(),
    };
    let poles = gamma_pole_positions(xp, center - 1.0);
    check_pole_clearance(&zeta, &poles, 1e-6)?;
    Ok((zeta, eta, DimpleSpec { center, radius }))
}

/// Fan contours: plain vertical lines at Re = ∓c₃/2 (no Gamma factor, so no
/// dimple is needed). Each line gets 2n nodes to match the edge resolution.
pub fn build_fan_contours(
    tail_height: f64,
    n: usize,
) -> Result<(QuadratureGrid, QuadratureGrid)> {
    if tail_height < 4.0 {
        return Err(Error::Arg(format!("tail_height = {tail_height} < 4")));
    }
    if n < 16 {
        return Err(Error::Arg(format!("n = {n} < 16")));
    }
    let line = |re: f64| {
        grid_from_segments(vec![(
            Segment::VerticalLine {
                re,
                im_lo: -tail_height,
                im_hi: tail_height,
            },
            2 * n,
        )])
    };
    Ok((line(-C3 / 2.0), line(C3 / 2.0)))
}

/// Finite-ε circular contours for the doubly-infinite-ASEP transform.
pub struct EpsContours {
    pub eta: QuadratureGrid,
    pub zeta: QuadratureGrid,
    pub mu: QuadratureGrid,
    /// min / max of |ζ_i/η_j| over node pairs. The defining-series condition
    /// |ζ/η| > 1 cannot hold pairwise for nested circles; the kernel uses the
    /// analytic continuation of f, so only the pole clearance below is fatal.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Number of node pairs with |ζ/η| ≤ 1 (reported, not fatal).
    pub ratio_lower_violations: usize,
}

/// Circles for the finite-ε formula: η on diameter [-1/α + 2δ, 1 - δ],
/// ζ on diameter [-1/α + ς, 1 + ς] with δ = ς = ε^{1/2}/2, μ of radius
/// (τ+1)/2. Fails if max |ζ/η| ≥ 1/τ or if any ratio ζ_i/η_j falls within
/// 1e-8 of a pole τ^k of the doubly-infinite sum f.
pub fn build_eps_circles(eps: f64, rho_plus: f64, n: usize) -> Result<EpsContours> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} outside (0,1)")));
    }
    if !(0.0 < rho_plus && rho_plus <= 1.0) {
        return Err(Error::Domain(format!("rho_plus = {rho_plus} outside (0,1]")));
    }
    let gamma = eps.sqrt();
    let tau = (1.0 - gamma) / (1.0 + gamma);
    let alpha = (1.0 - rho_plus) / rho_plus;
    let delta = gamma / 2.0;
    let a_inv = if alpha == 0.0 { f64::INFINITY } else { 1.0 / alpha };
    if !a_inv.is_finite() {
        return Err(Error::Domain("rho_plus = 1 gives alpha = 0".into()));
    }
    let circle = |lo: f64, hi: f64| {
        grid_from_segments(vec![(
            Segment::Circle {
                center: (lo + hi) / 2.0,
                radius: (hi - lo) / 2.0,
            },
            n,
        )])
    };
    let eta = circle(-a_inv + 2.0 * delta, 1.0 - delta);
    let zeta = circle(-a_inv + delta, 1.0 + delta);
    let mu = circle(-(tau + 1.0) / 2.0, (tau + 1.0) / 2.0);

    let mut ratio_min = f64::INFINITY;
    let mut ratio_max: f64 = 0.0;
    let mut lower = 0usize;
    // Poles of f at z = τ^k; only a window of k can be reached by |ζ/η|.
    let mut pole_ring = vec![];
    let mut tk = 1.0;
    while tk < 16.0 {
        pole_ring.push(tk);
        tk /= tau;
    }
    let mut tk = tau;
    while tk > 1e-3 {
        pole_ring.push(tk);
        tk *= tau;
    }
    for &z in &zeta.nodes {
        for &h in &eta.nodes {
            let r = z / h;
            let m = r.norm();
            ratio_min = ratio_min.min(m);
            ratio_max = ratio_max.max(m);
            if m <= 1.0 {
                lower += 1;
            }
            for &p in &pole_ring {
                let d = (r - C64::new(p, 0.0)).norm();
                if d < 1e-8 {
                    return Err(Error::ContourPole {
                        dist: d,
                        pole_re: p,
                        pole_im: 0.0,
                    });
                }
            }
        }
    }
    if ratio_max >= 1.0 / tau {
        return Err(Error::Constraint(format!(
            "max |zeta/eta| = {ratio_max} >= 1/tau = {}",
            1.0 / tau
        )));
    }
    Ok(EpsContours {
        eta,
        zeta,
        mu,
        ratio_min,
        ratio_max,
        ratio_lower_violations: lower,
    })
}

/// Wedge contour for Airy-type integrals: rays at ±`angle` from a real apex,
/// truncated at `len`, traversed upward (lower ray inward, upper ray outward).
/// Node set is symmetric under conjugation.
pub fn build_airy_wedge(apex: f64, angle: f64, len: f64, n_per_ray: usize) -> QuadratureGrid {
    grid_from_segments(vec![
        (
            Segment::AiryRay {
                apex,
                angle: -angle,
                len,
            },
            n_per_ray,
        ),
        (
            Segment::AiryRay { apex, angle, len },
            n_per_ray,
        ),
    ])
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        ws[i] = w;
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let half = (b - a) / 2.0;
    let mid = (b + a) / 2.0;
    (
        xs.iter().map(|&x| mid + half * x).collect(),
        ws.iter().map(|&w| w * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // 12-node rule is exact through degree 23.
        let (xs, ws) = gauss_legendre(12);
        for deg in 0..=23usize {
            let got: f64 = xs
                .iter()
                .zip(&ws)
                .map(|(&x, &w)| w * x.powi(deg as i32))
                .sum();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert_abs_diff_eq!(got, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [1, 2, 3, 7, 64, 200] {
            let (_, ws) = gauss_legendre(n);
            assert_abs_diff_eq!(ws.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mu_contour_residue_of_exp() {
        // ∮ e^{-μ}/μ dμ/(2πi) = 1 (pole at 0 enclosed counterclockwise).
        let grid = build_mu_contour(40.0, 200).unwrap();
        let val = grid.integrate(|z| (-z).exp() / z);
        assert!((val - C64::new(1.0, 0.0)).norm() < 1e-8, "got {val}");
    }

    #[test]
    fn mu_contour_higher_residues() {
        // ∮ e^{-μ}/μ^2 dμ/(2πi) = -1 and ∮ e^{-μ} μ dμ/(2πi) = 0.
        let grid = build_mu_contour(40.0, 200).unwrap();
        let v2 = grid.integrate(|z| (-z).exp() / (z * z));
        assert!((v2 - C64::new(-1.0, 0.0)).norm() < 1e-8, "got {v2}");
        let v0 = grid.integrate(|z| (-z).exp() * z);
        assert!(v0.norm() < 1e-8, "got {v0}");
    }

    #[test]
    fn mu_contour_rejects_bad_args() {
        assert!(build_mu_contour(0.5, 64).is_err());
        assert!(build_mu_contour(10.0, 4).is_err());
    }

    #[test]
    fn edge_contours_shift_and_symmetry() {
        let (zeta, eta, dimple) = build_edge_contours(1.0, 0.0, 10.0, 24).unwrap();
        assert_eq!(zeta.len(), eta.len());
        for (z, h) in zeta.nodes.iter().zip(&eta.nodes) {
            assert_abs_diff_eq!((h - z).re, C3, epsilon = 1e-14);
            assert_abs_diff_eq!((h - z).im, 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(dimple.radius, 0.5 + C3, epsilon = 1e-14);
        // Conjugation symmetry of the node set.
        for &z in &zeta.nodes {
            let conj = z.conj();
            let found = zeta
                .nodes
                .iter()
                .any(|&w| (w - conj).norm() < 1e-12);
            assert!(found, "no conjugate for {z}");
        }
    }

    #[test]
    fn edge_contour_closed_loop_is_zero() {
        // The ζ contour plus its reversal encloses nothing; equivalently the
        // integral of an entire function's derivative telescopes: check that
        // ∫ d/dz[exp(-z^3/3)] dz over the truncated contour matches endpoint
        // values (fundamental theorem along the path).
        let (zeta, _, _) = build_edge_contours(1.0, 0.0, 10.0, 256).unwrap();
        let f = |z: C64| (-z * z * z / 3.0).exp();
        let df = |z: C64| -z * z * f(z);
        let got = zeta.integrate(df) * TWO_PI_I;
        let lo = C64::new(-C3 / 2.0, -10.0);
        let hi = C64::new(-C3 / 2.0, 10.0);
        let expect = f(hi) - f(lo);
        assert!((got - expect).norm() < 1e-10, "got {got}, want {expect}");
    }

    #[test]
    fn edge_dimple_clears_gamma_poles() {
        // (T, X) = (1, 1): rightmost pole at 1; min distance > radius/2.
        let (zeta, _, dimple) = build_edge_contours(1.0, 1.0, 10.0, 48).unwrap();
        let poles = gamma_pole_positions(1.0, -C3 / 2.0 - 1.0);
        let best = check_pole_clearance(&zeta, &poles, 1e-6).unwrap();
        assert!(
            best > dimple.radius / 2.0,
            "clearance {best} <= radius/2 = {}",
            dimple.radius / 2.0
        );
    }

    #[test]
    fn eps_circles_constraints() {
        let c = build_eps_circles(0.09, 0.5, 128).unwrap();
        assert!(c.ratio_max < (1.0 + 0.3) / (1.0 - 0.3)); // 1/τ
        assert!(c.ratio_min > 0.0);
        // Nested circles put min|ζ| ≈ max|η|; pairs near ratio 1 exist either
        // side of it, which is reported rather than fatal.
        assert!(c.ratio_min < 1.01);
        // μ circle radius (τ+1)/2.
        let tau = (1.0 - 0.3) / (1.0 + 0.3);
        for &m in &c.mu.nodes {
            assert_abs_diff_eq!(m.norm(), (tau + 1.0) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn circle_quadrature_residue() {
        let c = build_eps_circles(0.09, 0.5, 128).unwrap();
        // η circle encloses the origin: ∮ dz/z /(2πi) = 1.
        let v = c.eta.integrate(|z| 1.0 / z);
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12, "got {v}");
    }

    #[test]
    fn wedge_grid_conjugation_symmetric() {
        let g = build_airy_wedge(0.5, 2.0 * PI / 3.0, 6.0, 80);
        for (&z, &w) in g.nodes.iter().zip(&g.weights) {
            let found = g
                .nodes
                .iter()
                .zip(&g.weights)
                .any(|(&z2, &w2)| (z2 - z.conj()).norm() < 1e-12 && (w2 - w.conj()).norm() < 1e-12);
            assert!(found, "no conjugate node/weight for {z} {w}");
        }
    }

    #[test]
    fn contour_spec_serializes() {
        let grid = build_mu_contour(4.0, 8).unwrap();
        let s = serde_json::to_string(&grid).unwrap();
        assert!(s.contains("MuSemicircle"));
        assert!(s.contains("nodes"));
    }
}
