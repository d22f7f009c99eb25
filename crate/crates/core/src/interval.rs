//! Approximate eigenfunctions φ̃_n on (−a, a) and their explicit norm and
//! residual bounds.
//!
//! φ̃_n interpolates between shifted half-line eigenfunctions,
//!
//! ```text
//! φ̃_n(x) = q(−x) F_{μ̃_n}(a + x) − (−1)ⁿ q(x) F_{μ̃_n}(a − x) ,
//! ```
//!
//! with the C¹ ramp q of width b. The mode equation makes the two sine parts
//! agree, so φ̃_n is close to a true eigenfunction; the residual
//! ‖A_D φ̃_n − λ̃_n φ̃_n‖ is controlled by an explicit expression in
//! G_{μ̃_n}, its derivatives, I_{μ̃_n} and the jump kernel tails ν₀, ν_∞.

use crate::cbf::BernsteinSpec;
use crate::error::{Error, Result};
use crate::halfline::{EigenfunctionF, GammaDensity};
use crate::modes::{self, ModeSolution};
use crate::quad::{self, Tol};
use std::f64::consts::PI;

/// The interpolation ramp: 0 left of −b, 1 right of b, C¹ with piecewise
/// quadratic middle; satisfies q(x) + q(−x) = 1 and 0 ≤ q'' ≤ 1/b².
pub fn q(x: f64, b: f64) -> f64 {
    if x <= -b {
        0.0
    } else if x <= 0.0 {
        let s = x / b + 1.0;
        0.5 * s * s
    } else if x <= b {
        let s = x / b - 1.0;
        1.0 - 0.5 * s * s
    } else {
        1.0
    }
}

fn check_geometry(a: f64, b: f64) -> Result<()> {
    if !(b > 0.0 && b < a) {
        return Err(Error::domain(format!(
            "ramp width must satisfy 0 < b < a, got a={a}, b={b}"
        )));
    }
    Ok(())
}

/// φ̃_n together with its mode data and the cached half-line machinery.
pub struct ApproxEigenfunction {
    pub a: f64,
    pub b: f64,
    pub mode: ModeSolution,
    f: EigenfunctionF,
}

impl ApproxEigenfunction {
    pub fn build(spec: &BernsteinSpec, a: f64, b: f64, n: u32) -> Result<Self> {
        check_geometry(a, b)?;
        let mode = modes::solve_mode(spec, a, n)?;
        let f = EigenfunctionF::build(spec, mode.mu)?;
        Ok(ApproxEigenfunction { a, b, mode, f })
    }

    pub fn from_parts(a: f64, b: f64, mode: ModeSolution, grid: GammaDensity) -> Result<Self> {
        check_geometry(a, b)?;
        Ok(ApproxEigenfunction {
            a,
            b,
            mode,
            f: EigenfunctionF::from_grid(grid),
        })
    }

    pub fn halfline(&self) -> &EigenfunctionF {
        &self.f
    }

    /// φ̃_n(x); exactly zero for |x| ≥ a.
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= self.a {
            return 0.0;
        }
        let sign = if self.mode.n % 2 == 0 { -1.0 } else { 1.0 };
        q(-x, self.b) * self.f.f(self.a + x) + sign * q(x, self.b) * self.f.f(self.a - x)
    }

    /// ‖φ̃_n‖²_{L²(−a,a)} by adaptive quadrature, with breakpoints at the
    /// ramp kinks and panels sized to the oscillation.
    pub fn norm_sq_quadrature(&self) -> Result<f64> {
        let mut pts = vec![-self.a, -self.b, 0.0, self.b, self.a];
        // pre-split to the half-wavelength scale
        let step = PI / self.mode.mu / 2.0;
        let mut x = -self.a + step;
        while x < self.a - 0.5 * step {
            pts.push(x);
            x += step;
        }
        pts.sort_by(|p, r| p.partial_cmp(r).unwrap());
        pts.dedup_by(|p, r| (*p - *r).abs() < 1e-12);
        let f = |x: f64| {
            let v = self.eval(x);
            v * v
        };
        Ok(quad::adaptive_breakpoints(&f, &pts, Tol::new(1e-9, 1e-12))?.value)
    }
}

/// Closed-form two-sided bounds for ‖φ̃_n‖² plus the quadrature value.
#[derive(Debug, Clone, Copy)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    pub quadrature: f64,
}

/// ‖φ̃_n‖² bounds: a − sin(θ)/μ − 4I ≤ ‖φ̃‖² ≤ a + sin(θ)/μ + 4I(1 + sin θ).
pub fn norm_bounds(spec: &BernsteinSpec, a: f64, b: f64, n: u32) -> Result<NormBounds> {
    let phi = ApproxEigenfunction::build(spec, a, b, n)?;
    norm_bounds_of(&phi)
}

pub fn norm_bounds_of(phi: &ApproxEigenfunction) -> Result<NormBounds> {
    let mu = phi.mode.mu;
    let th = phi.mode.theta;
    let i_mu = phi.f.grid().fubini_i();
    let lower = phi.a - th.sin() / mu - 4.0 * i_mu;
    let upper = phi.a + th.sin() / mu + 4.0 * i_mu * (1.0 + th.sin());
    Ok(NormBounds {
        lower,
        upper,
        quadrature: phi.norm_sq_quadrature()?,
    })
}

/// Upper bound for ‖A_D φ̃_n − λ̃_n φ̃_n‖_{L²(D)} with its two squared
/// summand groups exposed for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct ResidualBound {
    pub value: f64,
    /// contribution supported on |x| < a − b (squared, with its 2(a−b) factor)
    pub outer_sq: f64,
    /// contribution supported on the ramp region (squared, with its 2b factor)
    pub ramp_sq: f64,
}

/// The explicit residual bound: with G_{μ,b}(x) = G_μ(x−b) + G_μ(x+b),
///
/// ```text
/// ‖A_D φ̃ − λ̃ φ̃‖² ≤ 2(a−b) [ G_{μ,b}(a)ν₀(2b)/(2b²) + ν(2b)I_μ + 2ν(a)/μ ]²
///   + 2b [ (G_{μ,b}(a) − 2bG'_{μ,b}(a) + b²G''_{μ,b}(a))ν₀(b)/b²
///          + 2G_{μ,b}(a)ν_∞(b) + ν(b)I_μ + λ̃G_{μ,b}(a)/2 + 2ν(a)/μ ]² .
/// ```
pub fn residual_bound(spec: &BernsteinSpec, a: f64, b: f64, n: u32) -> Result<ResidualBound> {
    let phi = ApproxEigenfunction::build(spec, a, b, n)?;
    residual_bound_of(spec, &phi)
}

pub fn residual_bound_of(spec: &BernsteinSpec, phi: &ApproxEigenfunction) -> Result<ResidualBound> {
    let (a, b) = (phi.a, phi.b);
    let mode = &phi.mode;
    let grid = phi.f.grid();
    let tail = spec.levy_tail()?;

    let g_b = grid.g(a - b) + grid.g(a + b);
    let g1_b = grid.g_deriv(a - b, 1) + grid.g_deriv(a + b, 1);
    let g2_b = grid.g_deriv(a - b, 2) + grid.g_deriv(a + b, 2);
    let i_mu = grid.fubini_i();

    let nu_2b = tail.nu(2.0 * b)?;
    let nu_b = tail.nu(b)?;
    let nu_a = tail.nu(a)?;
    let nu0_2b = tail.nu0(2.0 * b)?;
    let nu0_b = tail.nu0(b)?;
    let nu_inf_b = tail.nu_inf(b)?;

    let outer = g_b * nu0_2b / (2.0 * b * b) + nu_2b * i_mu + 2.0 * nu_a / mode.mu;
    let ramp = (g_b - 2.0 * b * g1_b + b * b * g2_b) * nu0_b / (b * b)
        + 2.0 * g_b * nu_inf_b
        + nu_b * i_mu
        + mode.lambda * g_b / 2.0
        + 2.0 * nu_a / mode.mu;

    let outer_sq = 2.0 * (a - b) * outer * outer;
    let ramp_sq = 2.0 * b * ramp * ramp;
    Ok(ResidualBound {
        value: (outer_sq + ramp_sq).sqrt(),
        outer_sq,
        ramp_sq,
    })
}
