//! Fredholm determinants of Nyström-discretized operators.
//!
//! An integral operator on a quadrature grid becomes the matrix
//! M_ij = K(z_i, z_j) w_j (asymmetric weighting — the contour weights are
//! complex, so the symmetric √w convention would force a branch choice for
//! no benefit; the determinant is the same either way).  Determinants are
//! LU products with partial pivoting.  Self-convergence is controlled by
//! node doubling: the determinant at n nodes is accepted once it agrees
//! with the n/2 value to the requested tolerance.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::contours::QuadratureGrid;
use crate::{C64, Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct DetResult {
    pub value: C64,
    /// |value(n) − value(n/2)| from the last doubling step.
    pub est_error: f64,
    pub n_used: usize,
}

/// det(I + M) for a dense complex Nyström matrix.
pub fn det_i_plus(m: &DMatrix<C64>) -> Result<C64> {
    if m.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
        return Err(Error::Numerical(
            "non-finite entry in Nyström matrix".into(),
        ));
    }
    let n = m.nrows();
    let a = DMatrix::identity(n, n) + m;
    Ok(a.lu().determinant())
}

pub fn det_i_minus(m: &DMatrix<C64>) -> Result<C64> {
    det_i_plus(&-m.clone())
}

/// Real-symmetric-path determinant det(I − M) for real kernels (Airy₂, GUE).
pub fn det_i_minus_real(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical(
            "non-finite entry in Nyström matrix".into(),
        ));
    }
    let n = m.nrows();
    let a = DMatrix::identity(n, n) - m;
    Ok(a.lu().determinant())
}

/// Doubles the node count until two successive determinant evaluations agree
/// to `tol`.  `eval(n)` must rebuild the discretization at n nodes.
pub fn refine_det(
    what: &'static str,
    tol: f64,
    n0: usize,
    n_max: usize,
    eval: impl Fn(usize) -> Result<C64>,
) -> Result<DetResult> {
    let mut n = n0;
    let mut prev = eval(n)?;
    loop {
        let next_n = (2 * n).min(n_max);
        if next_n == n {
            return Err(Error::Budget {
                what,
                estimate: f64::INFINITY,
                tol,
                size: n,
            });
        }
        let value = eval(next_n)?;
        let est = (value - prev).norm();
        if est < tol {
            return Ok(DetResult {
                value,
                est_error: est,
                n_used: next_n,
            });
        }
        if next_n == n_max {
            return Err(Error::Budget {
                what,
                estimate: est,
                tol,
                size: next_n,
            });
        }
        n = next_n;
        prev = value;
    }
}

/// ∫ e^{−μ̃} dμ̃/μ̃ · det(μ̃) over the μ̃ grid (weights already carry 1/2πi).
/// With `include_exp_over_mu` off the bare det(μ̃) is integrated, which is
/// what the finite-ε representation needs (its prefactor is the
/// q-Pochhammer product, supplied inside `det`).
pub fn mu_integral<F>(mu_grid: &QuadratureGrid, include_exp_over_mu: bool, det: F) -> Result<C64>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    let terms: Result<Vec<C64>> = mu_grid
        .nodes
        .par_iter()
        .zip(mu_grid.weights.par_iter())
        .map(|(&mu, &w)| {
            let d = det(mu)?;
            if include_exp_over_mu {
                Ok(w * (-mu).exp() / mu * d)
            } else {
                Ok(w * d)
            }
        })
        .collect();
    Ok(terms?.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{build_mu_contour, gauss_legendre_on};
    use crate::kernels::ContourKernel;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Cofactor-expansion determinant, the independent oracle for small n.
    fn cofactor_det(m: &DMatrix<C64>) -> C64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut det = c(0.0, 0.0);
        let mut sign = 1.0;
        for j in 0..n {
            let minor = m.clone().remove_row(0).remove_column(j);
            det += sign * m[(0, j)] * cofactor_det(&minor);
            sign = -sign;
        }
        det
    }

    #[test]
    fn zero_kernel_det_is_one() {
        let m = DMatrix::<C64>::zeros(12, 12);
        assert_eq!(det_i_plus(&m).unwrap(), c(1.0, 0.0));
        assert_eq!(det_i_minus(&m).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn rank_one_closed_form() {
        // K(x,y) = 1 on [0,1]: det(I+K) = 1 + ∫₀¹ 1 = 2.
        let (_, w) = gauss_legendre_on(0.0, 1.0, 20);
        let n = w.len();
        let m = DMatrix::from_fn(n, n, |_, j| c(w[j], 0.0));
        assert_abs_diff_eq!(det_i_plus(&m).unwrap().re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(det_i_plus(&m).unwrap().im, 0.0, epsilon = 1e-14);

        // K(x,y) = xy on [0,1]: det(I−K) = 1 − ∫₀¹x² = 2/3.
        let (x, w) = gauss_legendre_on(0.0, 1.0, 20);
        let m = DMatrix::from_fn(n, n, |i, j| c(x[i] * x[j] * w[j], 0.0));
        assert_abs_diff_eq!(det_i_minus(&m).unwrap().re, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn lu_matches_cofactor_expansion() {
        // Deterministic pseudo-random complex matrices, n = 2..6.
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 2..=6 {
            let m = DMatrix::from_fn(n, n, |_, _| c(next(), next()));
            let lu = det_i_plus(&m).unwrap();
            let id = DMatrix::<C64>::identity(n, n);
            let oracle = cofactor_det(&(id + &m));
            assert!((lu - oracle).norm() < 1e-12, "n={n}: {lu} vs {oracle}");
        }
    }

    #[test]
    fn multiplicativity_for_commuting_operators() {
        let n = 5;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j { c(0.1 * i as f64, 0.2) } else { c(0.0, 0.0) }
        });
        let b = DMatrix::from_fn(n, n, |i, j| {
            if i == j { c(-0.3, 0.05 * i as f64) } else { c(0.0, 0.0) }
        });
        let id = DMatrix::<C64>::identity(n, n);
        let prod = (&id + &a) * (&id + &b) - &id;
        let lhs = det_i_plus(&a).unwrap() * det_i_plus(&b).unwrap();
        let rhs = det_i_plus(&prod).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn mu_integral_residue() {
        // det ≡ 1: ∮ e^{−μ̃}/μ̃ dμ̃/(2πi) = 1 by the residue at 0 (the tails
        // along Im μ̃ = ±1 decay like e^{−x}).
        let grid = build_mu_contour(40.0, 200).unwrap();
        let one = mu_integral(&grid, true, |_| Ok(c(1.0, 0.0))).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-8, "{one}");
        let zero = mu_integral(&grid, true, |_| Ok(c(0.0, 0.0))).unwrap();
        assert_eq!(zero, c(0.0, 0.0));
    }

    #[test]
    fn mu_truncation_converged() {
        let a = mu_integral(&build_mu_contour(40.0, 400).unwrap(), true, |_| {
            Ok(c(1.0, 0.0))
        })
        .unwrap();
        let b = mu_integral(&build_mu_contour(60.0, 600).unwrap(), true, |_| {
            Ok(c(1.0, 0.0))
        })
        .unwrap();
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn node_doubling_cauchy_sequence() {
        // |det(2n) − det(n)| decreasing over three doublings, edge kernel.
        let mu = c(-1.0, 0.5);
        let det_at = |n: usize| {
            let k = ContourKernel::new_edge(1.0, 0.0, 0.0, 10.0, n).unwrap();
            det_i_minus(&k.nystrom_matrix(mu).unwrap()).unwrap()
        };
        let d = [det_at(16), det_at(32), det_at(64), det_at(128)];
        let e1 = (d[1] - d[0]).norm();
        let e2 = (d[2] - d[1]).norm();
        let e3 = (d[3] - d[2]).norm();
        assert!(e2 < e1, "{e1} {e2} {e3}");
        assert!(e3 < e2, "{e1} {e2} {e3}");
    }

    #[test]
    fn refine_det_drives_to_tolerance() {
        let res = refine_det("test series", 1e-10, 8, 640, |n| {
            // A mock discretization converging geometrically.
            Ok(c(1.0 + 0.9f64.powi(n as i32), 0.0))
        })
        .unwrap();
        assert!(res.est_error < 1e-10);
        assert!((res.value.re - 1.0).abs() < 1e-8);

        // Never converges: value depends on n with O(1) jumps.
        let err = refine_det("stuck", 1e-12, 8, 64, |n| Ok(c((n % 3) as f64, 0.0)));
        assert!(err.is_err());
    }
}
