//! The mode equation a·μ + θ_μ = nπ/2 and the asymptotic eigenvalues
//! λ̃_n = ψ(μ̃_n²).
//!
//! Every solution lies in [(n−1)π/(2a), nπ/(2a)] because θ ∈ [0, π/2). For
//! n ≥ 3 the solution is unique (the derivative a + dθ/dμ is positive there
//! thanks to |dθ/dμ| < 3/μ); for n ∈ {1, 2} the equation may have several
//! roots, and the largest one is selected by scanning the bracket from the
//! right.

use crate::cbf::BernsteinSpec;
use crate::error::{Error, Result};
use crate::quad::Tol;
use crate::theta;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Absolute tolerance on the mode-equation residual a·μ + θ_μ − nπ/2.
pub const ROOT_TOL: f64 = 1e-10;

/// One solved mode: index, geometry, root, phase and asymptotic eigenvalue.
#[derive(Debug, Clone, Copy)]
pub struct ModeSolution {
    pub n: u32,
    pub a: f64,
    pub mu: f64,
    pub theta: f64,
    pub lambda: f64,
}

impl ModeSolution {
    /// Residual of the mode equation at the stored root.
    pub fn residual(&self) -> f64 {
        self.a * self.mu + self.theta - self.n as f64 * PI / 2.0
    }

    /// Parity of the approximate eigenfunction: even for odd n.
    pub fn is_even(&self) -> bool {
        self.n % 2 == 1
    }
}

fn check_inputs(a: f64, n: u32) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("half-width a must be positive, got {a}")));
    }
    if n < 1 {
        return Err(Error::domain("mode index n must be >= 1"));
    }
    Ok(())
}

/// Solve a·μ + θ_μ = nπ/2 for the largest root in the bracket.
pub fn solve_mode(spec: &BernsteinSpec, a: f64, n: u32) -> Result<ModeSolution> {
    solve_mode_with_tol(spec, a, n, ROOT_TOL)
}

pub fn solve_mode_with_tol(
    spec: &BernsteinSpec,
    a: f64,
    n: u32,
    root_tol: f64,
) -> Result<ModeSolution> {
    check_inputs(a, n)?;
    let target = n as f64 * PI / 2.0;
    let hi = n as f64 * PI / (2.0 * a);
    let lo = if n == 1 {
        hi * 1e-8
    } else {
        (n - 1) as f64 * PI / (2.0 * a)
    };
    let qtol = Tol::new(1e-11, 1e-12);
    let g = |mu: f64| -> Result<f64> { Ok(a * mu + theta::theta_with_tol(spec, mu, qtol)? - target) };
    let dg = |mu: f64| -> Result<f64> { Ok(a + theta::dtheta_with_tol(spec, mu, qtol)?) };

    // g(lo) = theta(lo) - pi/2 < 0 and g(hi) = theta(hi) >= 0 up to rounding
    let g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_hi.abs() <= root_tol {
        // theta vanishes at the right endpoint (pure drift): root is n pi/2a
        let th = theta::theta(spec, hi)?;
        return Ok(ModeSolution {
            n,
            a,
            mu: hi,
            theta: th,
            lambda: spec.eval(hi * hi)?,
        });
    }
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::BracketFailure { n, lo, hi });
    }

    let (mut blo, mut bhi, mut glo_val) = if n <= 2 {
        // scan 64 points, keep the rightmost sign change
        let m = 64;
        let mut found = None;
        let mut prev_x = lo;
        let mut prev_g = g_lo;
        for i in 1..=m {
            let x = lo + (hi - lo) * i as f64 / m as f64;
            let gx = g(x)?;
            if prev_g <= 0.0 && gx >= 0.0 {
                found = Some((prev_x, x, prev_g));
            }
            prev_x = x;
            prev_g = gx;
        }
        found.ok_or(Error::BracketFailure { n, lo, hi })?
    } else {
        (lo, hi, g_lo)
    };

    // bracketed Newton with bisection fallback
    let mut x = 0.5 * (blo + bhi);
    let mut gx = g(x)?;
    for _ in 0..120 {
        if gx.abs() <= root_tol {
            break;
        }
        if gx < 0.0 {
            blo = x;
            glo_val = gx;
        } else {
            bhi = x;
        }
        let slope = dg(x)?;
        let mut next = if slope > 0.0 { x - gx / slope } else { f64::NAN };
        if !(next > blo && next < bhi) {
            next = 0.5 * (blo + bhi);
        }
        if (next - x).abs() < f64::EPSILON * x.abs() {
            break;
        }
        x = next;
        gx = g(x)?;
    }
    let _ = glo_val;
    if gx.abs() > 100.0 * root_tol {
        return Err(Error::numeric(
            "modes",
            format!("mode n = {n} did not converge: residual {gx:.3e}"),
        ));
    }

    let th = theta::theta(spec, x)?;
    Ok(ModeSolution {
        n,
        a,
        mu: x,
        theta: th,
        lambda: spec.eval(x * x)?,
    })
}

/// One-shot approximation μ_n ≈ nπ/(2a) − θ_{nπ/(2a)}/a.
pub fn first_order_mu(spec: &BernsteinSpec, a: f64, n: u32) -> Result<f64> {
    check_inputs(a, n)?;
    let anchor = n as f64 * PI / (2.0 * a);
    Ok(anchor - theta::theta(spec, anchor)? / a)
}

/// Modes n = 1..n_max; rows are independent and solved in parallel.
pub fn mode_table(spec: &BernsteinSpec, a: f64, n_max: u32) -> Result<Vec<ModeSolution>> {
    check_inputs(a, n_max)?;
    (1..=n_max)
        .into_par_iter()
        .map(|n| solve_mode(spec, a, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cauchy_modes_closed_form() {
        // power(1): mu_n = n pi/2a - pi/8a exactly, lambda = mu
        let spec = BernsteinSpec::power(1.0).unwrap();
        let m = solve_mode(&spec, 1.0, 1).unwrap();
        assert_relative_eq!(m.mu, 3.0 * PI / 8.0, epsilon = 1e-9);
        assert_relative_eq!(m.lambda, 3.0 * PI / 8.0, epsilon = 1e-9);

        let m = solve_mode(&spec, 2.0, 4).unwrap();
        assert_relative_eq!(m.mu, PI - PI / 16.0, epsilon = 1e-9);
        assert_relative_eq!(m.lambda, m.mu, epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_modes() {
        let spec = BernsteinSpec::power(2.0).unwrap();
        let m = solve_mode(&spec, 1.0, 5).unwrap();
        assert_relative_eq!(m.mu, 5.0 * PI / 2.0, epsilon = 1e-10);
        assert_relative_eq!(m.lambda, 25.0 * PI * PI / 4.0, epsilon = 1e-8);
    }

    #[test]
    fn table_brackets_residuals_spacing() {
        let spec = BernsteinSpec::klein_gordon();
        let a = 1.0;
        let table = mode_table(&spec, a, 50).unwrap();
        for m in &table {
            let lo = (m.n - 1) as f64 * PI / (2.0 * a);
            let hi = m.n as f64 * PI / (2.0 * a);
            assert!(m.mu >= lo - 1e-12 && m.mu <= hi + 1e-12);
            assert!(m.residual().abs() <= 1e-9, "residual {}", m.residual());
        }
        for w in table.windows(2) {
            assert!(w[1].mu > w[0].mu);
            assert!(w[1].lambda > w[0].lambda);
            if w[0].n >= 3 {
                assert!(
                    w[1].mu - w[0].mu >= PI / (4.0 * a),
                    "spacing at n = {}",
                    w[0].n
                );
            }
        }
    }

    #[test]
    fn mode_table_power_closed() {
        let spec = BernsteinSpec::power(1.0).unwrap();
        let t = mode_table(&spec, 1.0, 3).unwrap();
        let expect = [3.0 * PI / 8.0, 7.0 * PI / 8.0, 11.0 * PI / 8.0];
        for (m, e) in t.iter().zip(expect) {
            assert_relative_eq!(m.mu, e, epsilon = 1e-9);
        }
        let t2 = mode_table(&BernsteinSpec::power(2.0).unwrap(), 1.0, 3).unwrap();
        let expect2 = [PI / 2.0, PI, 3.0 * PI / 2.0];
        for (m, e) in t2.iter().zip(expect2) {
            assert_relative_eq!(m.mu, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn first_order_approximation() {
        // exact for powers (theta constant)
        let spec = BernsteinSpec::power(1.5).unwrap();
        for n in [1, 4, 9] {
            let fo = first_order_mu(&spec, 1.0, n).unwrap();
            let m = solve_mode(&spec, 1.0, n).unwrap();
            assert_relative_eq!(fo, m.mu, epsilon = 1e-9);
        }
        // klein_gordon at n = 20: within 5e-3
        let kg = BernsteinSpec::klein_gordon();
        let fo = first_order_mu(&kg, 1.0, 20).unwrap();
        let m = solve_mode(&kg, 1.0, 20).unwrap();
        assert!((fo - m.mu).abs() < 5e-3);
        // sum at n = 2: within pi/(4a)
        let sp = BernsteinSpec::sum_of_powers(1.0, 0.5).unwrap();
        let fo = first_order_mu(&sp, 1.0, 2).unwrap();
        let m = solve_mode(&sp, 1.0, 2).unwrap();
        assert!((fo - m.mu).abs() < PI / 4.0);
    }
}
