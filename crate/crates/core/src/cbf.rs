//! Complete Bernstein function calculus.
//!
//! A complete Bernstein function is represented as
//!
//! ```text
//! ψ(ξ) = c·ξ + (1/π) ∫ ξ/(ξ+z) · m(z)/z dz ,        ∫ min(1/z, 1/z²) m(z) dz < ∞,
//! ```
//!
//! with ψ(0) = 0 throughout (no constant term). The closed families carry
//! analytic formulas for ψ, its first three derivatives, the boundary values
//! of the holomorphic extension on the negative half-axis, and the density m;
//! measure-defined specs evaluate everything by adaptive quadrature of the
//! representation above, with derivatives obtained by differentiating under
//! the integral sign (never by finite differences).

use crate::error::{Error, Result};
use crate::quad::{self, Tol};
use crate::util;
use std::f64::consts::PI;

/// Quadrature tolerance for measure-defined evaluations.
const MEASURE_TOL: Tol = Tol {
    rel: 1e-10,
    abs: 1e-14,
};

/// Built-in densities m(z) for measure-defined specs.
///
/// `LogWeight` is the slowly varying example m(z) = log(z)·1{z>1}, which
/// still has ξψ'(ξ) → ∞. `PowerTail` is m(z) = sin(απ/2)·z^{α/2}, the density
/// of the pure power family; it exists so the quadrature path can be checked
/// against closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    PowerTail { alpha: f64 },
    LogWeight,
}

impl Density {
    /// Density value m(z).
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Density::PowerTail { alpha } => (alpha * PI / 2.0).sin() * z.powf(alpha / 2.0),
            Density::LogWeight => {
                if z > 1.0 {
                    z.ln()
                } else {
                    0.0
                }
            }
        }
    }

    /// Infimum of the support of m.
    pub fn support_lo(&self) -> f64 {
        match self {
            Density::PowerTail { .. } => 0.0,
            Density::LogWeight => 1.0,
        }
    }

    fn name(&self) -> String {
        match self {
            Density::PowerTail { alpha } => format!("power_tail({alpha})"),
            Density::LogWeight => "log".to_string(),
        }
    }
}

/// The ψ families supported by the toolkit.
#[derive(Debug, Clone, PartialEq)]
enum Family {
    /// ψ(ξ) = ξ^{α/2}, 0 < α ≤ 2 (α = 2 is the pure drift ψ(ξ) = ξ).
    Power { alpha: f64 },
    /// ψ(ξ) = ξ^{α/2} + ξ^{β/2}, 0 < β < α ≤ 2.
    SumOfPowers { alpha: f64, beta: f64 },
    /// ψ(ξ) = (1 + ξ)^{1/2} − 1.
    KleinGordon,
    /// ψ(ξ) = log(1 + ξ).
    Log1p,
    /// ψ from the representation integral with drift `c` and density m.
    MeasureDefined { c: f64, density: Density },
}

/// A complete Bernstein function ψ with ψ(0) = 0.
///
/// Immutable after construction; all methods are pure, so values can be
/// shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinSpec {
    family: Family,
}

/// ψ and its first three derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct PsiAt {
    pub t: f64,
    pub psi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl BernsteinSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!(
                "power family requires 0 < alpha <= 2, got {alpha}"
            )));
        }
        Ok(BernsteinSpec {
            family: Family::Power { alpha },
        })
    }

    pub fn sum_of_powers(alpha: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < alpha && alpha <= 2.0) {
            return Err(Error::domain(format!(
                "sum_of_powers requires 0 < beta < alpha <= 2, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(BernsteinSpec {
            family: Family::SumOfPowers { alpha, beta },
        })
    }

    pub fn klein_gordon() -> Self {
        BernsteinSpec {
            family: Family::KleinGordon,
        }
    }

    pub fn log1p() -> Self {
        BernsteinSpec {
            family: Family::Log1p,
        }
    }

    /// Measure-defined spec with drift `c ≥ 0` and density m.
    ///
    /// The representation-measure integrability ∫ min(1/z, 1/z²) m(z) dz < ∞
    /// is checked numerically on a log grid at construction.
    pub fn measure_defined(c: f64, density: Density) -> Result<Self> {
        if c < 0.0 || !c.is_finite() {
            return Err(Error::domain(format!("drift must be nonnegative, got {c}")));
        }
        if let Density::PowerTail { alpha } = density {
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(Error::domain(format!(
                    "power_tail density requires 0 < alpha < 2, got {alpha}"
                )));
            }
        }
        check_integrability(&density)?;
        Ok(BernsteinSpec {
            family: Family::MeasureDefined { c, density },
        })
    }

    /// Construct from a family name and positional parameters (CLI helper).
    pub fn from_name_params(name: &str, params: &[f64]) -> Result<Self> {
        match (name, params) {
            ("power", [a]) => Self::power(*a),
            ("sum_of_powers", [a, b]) => Self::sum_of_powers(*a, *b),
            ("klein_gordon", []) => Ok(Self::klein_gordon()),
            ("log1p", []) => Ok(Self::log1p()),
            _ => Err(Error::Config(format!(
                "unknown psi family `{name}` with {} parameter(s)",
                params.len()
            ))),
        }
    }

    /// Human-readable family label.
    pub fn name(&self) -> String {
        match &self.family {
            Family::Power { alpha } => format!("power({alpha})"),
            Family::SumOfPowers { alpha, beta } => format!("sum_of_powers({alpha},{beta})"),
            Family::KleinGordon => "klein_gordon".to_string(),
            Family::Log1p => "log1p".to_string(),
            Family::MeasureDefined { c, density } => {
                format!("measure_defined(c={c},m={})", density.name())
            }
        }
    }

    /// Drift coefficient c of the representation.
    pub fn drift(&self) -> f64 {
        match &self.family {
            Family::Power { alpha } if *alpha == 2.0 => 1.0,
            Family::SumOfPowers { alpha, .. } if *alpha == 2.0 => 1.0,
            Family::MeasureDefined { c, .. } => *c,
            _ => 0.0,
        }
    }

    /// Density m(z) of the representation measure.
    pub fn measure_density(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Power { alpha } => {
                if *alpha < 2.0 {
                    Density::PowerTail { alpha: *alpha }.eval(z)
                } else {
                    0.0
                }
            }
            Family::SumOfPowers { alpha, beta } => {
                let mut m = Density::PowerTail { alpha: *beta }.eval(z);
                if *alpha < 2.0 {
                    m += Density::PowerTail { alpha: *alpha }.eval(z);
                }
                m
            }
            Family::KleinGordon => {
                if z > 1.0 {
                    (z - 1.0).sqrt()
                } else {
                    0.0
                }
            }
            Family::Log1p => {
                if z > 1.0 {
                    PI
                } else {
                    0.0
                }
            }
            Family::MeasureDefined { density, .. } => density.eval(z),
        }
    }

    /// Infimum of the support of the representation density.
    pub fn measure_support_lo(&self) -> f64 {
        match &self.family {
            Family::Power { .. } | Family::SumOfPowers { .. } => 0.0,
            Family::KleinGordon | Family::Log1p => 1.0,
            Family::MeasureDefined { density, .. } => density.support_lo(),
        }
    }

    /// True when ψ(∞) = ∞. All built-in families are unbounded; the flag
    /// exists because the γ_μ machinery in `halfline` requires it.
    pub fn is_unbounded(&self) -> bool {
        true
    }

    /// ψ(ξ) for ξ > 0.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::domain(format!("psi requires xi > 0, got {xi}")));
        }
        Ok(self.eval_raw(xi))
    }

    /// ψ(ξ) without the domain check; callers guarantee ξ > 0.
    pub(crate) fn eval_raw(&self, xi: f64) -> f64 {
        match &self.family {
            Family::Power { alpha } => xi.powf(alpha / 2.0),
            Family::SumOfPowers { alpha, beta } => xi.powf(alpha / 2.0) + xi.powf(beta / 2.0),
            // stable form of (1+xi)^(1/2) - 1, exact down to subnormal xi
            Family::KleinGordon => xi / (1.0 + (1.0 + xi).sqrt()),
            Family::Log1p => xi.ln_1p(),
            Family::MeasureDefined { c, density } => {
                c * xi + measure_kernel_integral(density, xi, 0) / PI
            }
        }
    }

    /// ψ^{(order)}(ξ) for order in {1, 2, 3}.
    pub fn deriv(&self, xi: f64, order: u8) -> Result<f64> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::domain(format!("deriv requires xi > 0, got {xi}")));
        }
        if !(1..=3).contains(&order) {
            return Err(Error::domain(format!(
                "derivative order must be 1, 2 or 3, got {order}"
            )));
        }
        Ok(self.deriv_raw(xi, order))
    }

    pub(crate) fn deriv_raw(&self, xi: f64, order: u8) -> f64 {
        match &self.family {
            Family::Power { alpha } => power_deriv(*alpha, xi, order),
            Family::SumOfPowers { alpha, beta } => {
                power_deriv(*alpha, xi, order) + power_deriv(*beta, xi, order)
            }
            Family::KleinGordon => {
                let b = 1.0 + xi;
                match order {
                    1 => 0.5 / b.sqrt(),
                    2 => -0.25 / (b * b.sqrt()),
                    _ => 0.375 / (b * b * b.sqrt()),
                }
            }
            Family::Log1p => {
                let b = 1.0 + xi;
                match order {
                    1 => 1.0 / b,
                    2 => -1.0 / (b * b),
                    _ => 2.0 / (b * b * b),
                }
            }
            Family::MeasureDefined { c, density } => {
                let sign = [1.0, -2.0, 6.0][order as usize - 1];
                let base = if order == 1 { *c } else { 0.0 };
                base + sign * measure_kernel_integral(density, xi, order) / PI
            }
        }
    }

    /// ψ and its first three derivatives at `t`.
    pub fn at(&self, t: f64) -> Result<PsiAt> {
        Ok(PsiAt {
            t,
            psi: self.eval(t)?,
            d1: self.deriv(t, 1)?,
            d2: self.deriv(t, 2)?,
            d3: self.deriv(t, 3)?,
        })
    }

    /// Boundary values of the holomorphic extension: ψ(−s + i0) = u + iv.
    ///
    /// The upper-half-plane limit is evaluated in closed form for the closed
    /// families; for measure-defined specs, u comes from a principal-value
    /// quadrature of the representation and v = m(s) (Sokhotski–Plemelj).
    pub fn boundary_values(&self, s: f64) -> Result<(f64, f64)> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!(
                "boundary_values requires s > 0, got {s}"
            )));
        }
        match &self.family {
            Family::Power { alpha } => Ok(power_boundary(*alpha, s)),
            Family::SumOfPowers { alpha, beta } => {
                let (ua, va) = power_boundary(*alpha, s);
                let (ub, vb) = power_boundary(*beta, s);
                Ok((ua + ub, va + vb))
            }
            Family::KleinGordon => {
                if s == 1.0 {
                    return Err(Error::BranchPoint { s });
                }
                if s > 1.0 {
                    Ok((-1.0, (s - 1.0).sqrt()))
                } else {
                    Ok(((1.0 - s).sqrt() - 1.0, 0.0))
                }
            }
            Family::Log1p => {
                if s == 1.0 {
                    return Err(Error::BranchPoint { s });
                }
                if s > 1.0 {
                    Ok(((s - 1.0).ln(), PI))
                } else {
                    Ok(((-s).ln_1p(), 0.0))
                }
            }
            Family::MeasureDefined { c, density } => {
                let lo = density.support_lo();
                if s == lo && lo > 0.0 {
                    return Err(Error::BranchPoint { s });
                }
                let u = -c * s + measure_boundary_real(density, s)?;
                Ok((u, density.eval(s)))
            }
        }
    }

    /// (P, Q) = (μ²ψ'(μ²)/ψ(μ²), −μ²ψ''(μ²)/(2ψ'(μ²))); P + Q ≤ 1 always.
    pub fn pq(&self, mu: f64) -> Result<(f64, f64)> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("pq requires mu > 0, got {mu}")));
        }
        let t = mu * mu;
        let a = self.at(t)?;
        let p = t * a.d1 / a.psi;
        let q = -t * a.d2 / (2.0 * a.d1);
        Ok((p, q))
    }

    /// Heuristic probe of the moderate growth condition ξψ'(ξ) → ∞.
    ///
    /// Passes iff the last value of ξψ'(ξ) on the grid exceeds 10× the first
    /// and the final quarter of the sequence is strictly increasing. This is
    /// a finite-grid heuristic, not a proof.
    pub fn moderate_growth_probe(&self, grid: &[f64]) -> Result<GrowthProbe> {
        if grid.len() < 7 {
            return Err(Error::domain(
                "growth probe needs a grid spanning at least 6 decades",
            ));
        }
        let span = grid[grid.len() - 1] / grid[0];
        if span < 0.99e6 {
            return Err(Error::domain(format!(
                "growth probe grid spans {:.1} decades, need >= 6",
                span.log10()
            )));
        }
        let mut values = Vec::with_capacity(grid.len());
        for &xi in grid {
            values.push((xi, xi * self.deriv(xi, 1)?));
        }
        let first = values[0].1;
        let last = values[values.len() - 1].1;
        let tail_start = values.len() - values.len() / 4;
        let tail_increasing = values[tail_start.saturating_sub(1)..]
            .windows(2)
            .all(|w| w[1].1 > w[0].1);
        Ok(GrowthProbe {
            passes: last > 10.0 * first && tail_increasing,
            values,
        })
    }

    /// Default probe grid: 61 geometric points on [1, 1e6].
    ///
    /// The grid starts at ξ = 1 so the ratio test measures asymptotic growth
    /// rather than the trivial rise of ξψ'(ξ) out of the origin.
    pub fn default_probe_grid() -> Vec<f64> {
        util::geometric_grid(1.0, 1e6, 61)
    }

    /// Jump kernel ν, its truncated second moment ν₀ and tail mass ν_∞.
    pub fn levy_tail(&self) -> Result<LevyTail> {
        Ok(LevyTail { spec: self.clone() })
    }
}

fn power_deriv(alpha: f64, xi: f64, order: u8) -> f64 {
    let h = alpha / 2.0;
    match order {
        1 => h * xi.powf(h - 1.0),
        2 => h * (h - 1.0) * xi.powf(h - 2.0),
        _ => h * (h - 1.0) * (h - 2.0) * xi.powf(h - 3.0),
    }
}

fn power_boundary(alpha: f64, s: f64) -> (f64, f64) {
    if alpha == 2.0 {
        // entire function: psi(-s) = -s exactly
        return (-s, 0.0);
    }
    let r = s.powf(alpha / 2.0);
    let phase = alpha * PI / 2.0;
    (r * phase.cos(), r * phase.sin())
}

/// ∫ m(z)/( (ξ+z)^{k+1} z^{1−k·0} ) dz in the representation sense:
/// k = 0 gives ∫ ξ m(z)/((ξ+z) z) dz, k ≥ 1 gives ∫ m(z)/(ξ+z)^{k+1} dz
/// (the ξ-derivative kernels). Integrated in w = ln z.
fn measure_kernel_integral(density: &Density, xi: f64, order: u8) -> f64 {
    let lo = density.support_lo();
    let (w_lo, w_hi) = measure_w_range(density, xi);
    let w_lo = if lo > 0.0 { lo.ln().max(w_lo) } else { w_lo };
    let f = |w: f64| {
        let z = w.exp();
        let m = density.eval(z);
        match order {
            0 => xi * m / (xi + z),
            1 => m * z / ((xi + z) * (xi + z)),
            2 => m * z / (xi + z).powi(3),
            _ => m * z / (xi + z).powi(4),
        }
    };
    let mut pts = vec![w_lo, w_hi];
    let knee = xi.ln();
    if knee > w_lo && knee < w_hi {
        pts.insert(1, knee);
    }
    // integrands are smooth and exponentially small at the cutoffs
    quad::adaptive_breakpoints(&f, &pts, MEASURE_TOL)
        .map(|q| q.value)
        .unwrap_or(f64::NAN)
}

/// Integration window in w = ln z for the representation kernels.
fn measure_w_range(density: &Density, xi: f64) -> (f64, f64) {
    let knee = xi.ln();
    match *density {
        Density::PowerTail { alpha } => {
            let lo_rate = alpha / 2.0;
            let hi_rate = 1.0 - alpha / 2.0;
            (knee - 90.0 / lo_rate, knee + 90.0 / hi_rate)
        }
        Density::LogWeight => (0.0, knee.max(0.0) + 60.0),
    }
}

/// Principal-value part of Re ψ(−s + i0) for a measure-defined spec:
/// (1/π) PV ∫ (−s)/(z−s) · m(z)/z dz.
fn measure_boundary_real(density: &Density, s: f64) -> Result<f64> {
    let lo = density.support_lo();
    let g = |z: f64| -s * density.eval(z) / z / PI;
    let mut total = 0.0;

    let (core_lo, core_hi) = (0.5 * s, 2.0 * s);
    if core_hi <= lo {
        // pole is entirely below the support: plain integral over the support
        let q = quad::adaptive_breakpoints(
            &|w: f64| {
                let z = w.exp();
                g(z) / (z - s) * z
            },
            &[lo.max(1e-300).ln(), (lo.max(s) + 1.0).ln() + 60.0],
            MEASURE_TOL,
        )?;
        return Ok(q.value);
    }

    // region below the core window
    let below_hi = core_lo.min(f64::MAX);
    if below_hi > lo {
        let w_lo = if lo > 0.0 {
            lo.ln()
        } else {
            // power-tail density: integrand ~ z^{alpha/2 - 1} near 0
            below_hi.ln() - 400.0
        };
        let q = quad::adaptive_breakpoints(
            &|w: f64| {
                let z = w.exp();
                g(z) / (z - s) * z
            },
            &[w_lo, below_hi.ln()],
            MEASURE_TOL,
        )?;
        total += q.value;
    }

    // core window around the pole, symmetrized:
    // PV ∫_{s/2}^{2s} g(z)/(z−s) dz
    //   = ∫_0^{s/2} (g(s+h) − g(s−h))/h dh + ∫_{s/2}^{s} g(s+h)/h dh
    let clip = |z: f64| z.max(lo);
    let sym = |h: f64| {
        let zp = s + h;
        let zm = s - h;
        let gp = if zp > lo { g(zp) } else { 0.0 };
        let gm = if zm > lo { g(zm) } else { 0.0 };
        (gp - gm) / h
    };
    let mut sym_pts = vec![0.0, 0.5 * s];
    if lo > core_lo && lo < core_hi {
        // support edge falls inside the window: kink breakpoints
        let h_edge = (s - lo).abs();
        if h_edge > 0.0 && h_edge < 0.5 * s {
            sym_pts.insert(1, h_edge);
        }
    }
    total += quad::adaptive_breakpoints(&sym, &sym_pts, MEASURE_TOL)?.value;
    let upper = |h: f64| g(clip(s + h)) / h;
    total += quad::adaptive_breakpoints(&upper, &[0.5 * s, s], MEASURE_TOL)?.value;

    // region above the core window
    let q = quad::adaptive_breakpoints(
        &|w: f64| {
            let z = w.exp();
            g(z) / (z - s) * z
        },
        &[core_hi.ln(), core_hi.ln() + 90.0],
        MEASURE_TOL,
    )?;
    total += q.value;

    Ok(total)
}

fn check_integrability(density: &Density) -> Result<()> {
    // ∫ min(1/z, 1/z²) m(z) dz on a log grid; reject non-decaying tails.
    let lo = density.support_lo().max(1e-12);
    let mut acc = 0.0;
    let mut last_decade = f64::INFINITY;
    for k in 0..24 {
        let a = lo * 10f64.powi(k);
        let b = a * 10.0;
        let q = quad::adaptive(
            &|w: f64| {
                let z = w.exp();
                density.eval(z) * z.recip().min(z.powi(-2)) * z
            },
            a.ln(),
            b.ln(),
            Tol::new(1e-8, 1e-12),
        )?;
        acc += q.value;
        if k >= 20 && q.value >= last_decade {
            return Err(Error::domain(format!(
                "density {} fails the integrability check: decade contributions not decaying",
                density.name()
            )));
        }
        last_decade = q.value;
    }
    if !acc.is_finite() {
        return Err(Error::domain(format!(
            "density {} fails the integrability check",
            density.name()
        )));
    }
    Ok(())
}

/// Result of the moderate-growth probe.
#[derive(Debug, Clone)]
pub struct GrowthProbe {
    pub passes: bool,
    /// (ξ, ξψ'(ξ)) samples along the grid.
    pub values: Vec<(f64, f64)>,
}

/// Jump kernel of ψ(−Δ) and the two integrated tails used by the residual
/// bounds: ν₀(x) = c + ∫₀ˣ z²ν(z) dz and ν_∞(x) = ∫ₓ^∞ ν(z) dz.
///
/// Power families use closed forms with constant sin(απ/2)Γ(1+α)/π (checked
/// against the subordination quadrature in the tests); everything else goes
/// through the subordination formula
/// ν(z) = (1/2π) ∫ e^{−|z|√ζ} m(ζ)/√ζ dζ = (1/π) ∫ m(u²) e^{−|z|u} du.
#[derive(Debug, Clone)]
pub struct LevyTail {
    spec: BernsteinSpec,
}

/// Closed-form constant of the power-family jump kernel ν(z) = C(α)/z^{1+α}.
pub fn power_nu_constant(alpha: f64) -> f64 {
    (alpha * PI / 2.0).sin() * util::gamma(1.0 + alpha) / PI
}

impl LevyTail {
    pub fn spec(&self) -> &BernsteinSpec {
        &self.spec
    }

    /// Jump density ν(z), z > 0.
    pub fn nu(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::domain(format!("nu requires z > 0, got {z}")));
        }
        match &self.spec.family {
            Family::Power { alpha } => {
                if *alpha == 2.0 {
                    Ok(0.0)
                } else {
                    Ok(power_nu_constant(*alpha) * z.powf(-1.0 - alpha))
                }
            }
            Family::SumOfPowers { alpha, beta } => {
                let mut v = power_nu_constant(*beta) * z.powf(-1.0 - beta);
                if *alpha < 2.0 {
                    v += power_nu_constant(*alpha) * z.powf(-1.0 - alpha);
                }
                Ok(v)
            }
            _ => self.nu_quadrature(z),
        }
    }

    /// Subordination quadrature ν(z) = (1/π)∫ m(u²) e^{−zu} du.
    fn nu_quadrature(&self, z: f64) -> Result<f64> {
        let u_lo = self.spec.measure_support_lo().sqrt();
        let f = |u: f64| self.spec.measure_density(u * u) * (-z * u).exp();
        let mut hi = u_lo + 50.0 / z;
        let mut acc = quad::adaptive(&f, u_lo, hi, MEASURE_TOL)?.value;
        // extend until the increment is negligible
        for _ in 0..8 {
            let next = hi + (hi - u_lo).max(50.0 / z);
            let inc = quad::adaptive(&f, hi, next, MEASURE_TOL)?.value;
            acc += inc;
            hi = next;
            if inc.abs() <= 1e-15 * acc.abs() {
                break;
            }
        }
        Ok(acc / PI)
    }

    /// ν₀(x) = c + ∫₀ˣ z² ν(z) dz.
    pub fn nu0(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("nu0 requires x > 0, got {x}")));
        }
        let c = self.spec.drift();
        match &self.spec.family {
            Family::Power { alpha } => {
                if *alpha == 2.0 {
                    Ok(c)
                } else {
                    Ok(power_nu_constant(*alpha) * x.powf(2.0 - alpha) / (2.0 - alpha))
                }
            }
            Family::SumOfPowers { alpha, beta } => {
                let mut v = power_nu_constant(*beta) * x.powf(2.0 - beta) / (2.0 - beta);
                if *alpha < 2.0 {
                    v += power_nu_constant(*alpha) * x.powf(2.0 - alpha) / (2.0 - alpha);
                }
                Ok(c + v)
            }
            _ => {
                // z² ν(z) is bounded near 0, so direct adaptive quadrature works
                let f = |z: f64| -> f64 {
                    z * z * self.nu_quadrature(z).unwrap_or(f64::NAN)
                };
                let q = quad::adaptive(&f, 0.0, x, Tol::new(1e-9, 1e-13))?;
                Ok(c + q.value)
            }
        }
    }

    /// ν_∞(x) = ∫ₓ^∞ ν(z) dz = (1/π)∫ m(u²) e^{−xu}/u du (Tonelli).
    pub fn nu_inf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("nu_inf requires x > 0, got {x}")));
        }
        match &self.spec.family {
            Family::Power { alpha } => {
                if *alpha == 2.0 {
                    Ok(0.0)
                } else {
                    Ok(power_nu_constant(*alpha) * x.powf(-alpha) / alpha)
                }
            }
            Family::SumOfPowers { alpha, beta } => {
                let mut v = power_nu_constant(*beta) * x.powf(-beta) / beta;
                if *alpha < 2.0 {
                    v += power_nu_constant(*alpha) * x.powf(-alpha) / alpha;
                }
                Ok(v)
            }
            _ => {
                let u_lo = self.spec.measure_support_lo().sqrt();
                let f = |u: f64| self.spec.measure_density(u * u) * (-x * u).exp() / u;
                // u_lo ≥ 1 for every quadrature-path family in the toolkit,
                // so there is no endpoint singularity at u = 0
                let mut hi = u_lo.max(1e-12) + 60.0 / x;
                let mut acc = quad::adaptive(&f, u_lo.max(1e-12), hi, MEASURE_TOL)?.value;
                for _ in 0..8 {
                    let next = hi + (hi - u_lo).max(60.0 / x);
                    let inc = quad::adaptive(&f, hi, next, MEASURE_TOL)?.value;
                    acc += inc;
                    hi = next;
                    if inc.abs() <= 1e-15 * acc.abs() {
                        break;
                    }
                }
                Ok(acc / PI)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_closed_families() {
        let p1 = BernsteinSpec::power(1.0).unwrap();
        assert_relative_eq!(p1.eval(4.0).unwrap(), 2.0, max_relative = 1e-14);
        let kg = BernsteinSpec::klein_gordon();
        assert_relative_eq!(kg.eval(3.0).unwrap(), 1.0, max_relative = 1e-14);
        let sp = BernsteinSpec::sum_of_powers(1.0, 0.5).unwrap();
        assert_relative_eq!(sp.eval(16.0).unwrap(), 6.0, max_relative = 1e-14);
    }

    #[test]
    fn eval_domain_errors() {
        let p1 = BernsteinSpec::power(1.0).unwrap();
        assert!(p1.eval(0.0).is_err());
        assert!(p1.eval(-1.0).is_err());
        assert!(BernsteinSpec::power(2.5).is_err());
        assert!(BernsteinSpec::sum_of_powers(0.5, 1.0).is_err());
    }

    #[test]
    fn deriv_closed_families() {
        let p1 = BernsteinSpec::power(1.0).unwrap();
        assert_relative_eq!(p1.deriv(4.0, 1).unwrap(), 0.25, max_relative = 1e-14);
        let p2 = BernsteinSpec::power(2.0).unwrap();
        assert_eq!(p2.deriv(7.0, 2).unwrap(), 0.0);
        let lg = BernsteinSpec::log1p();
        assert_relative_eq!(lg.deriv(1.0, 1).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn measure_power_matches_closed_power() {
        // the quadrature path against the closed power family
        let alpha = 1.0;
        let spec = BernsteinSpec::measure_defined(0.0, Density::PowerTail { alpha }).unwrap();
        let closed = BernsteinSpec::power(alpha).unwrap();
        for xi in [0.01, 0.5, 1.0, 7.0, 300.0] {
            assert_relative_eq!(
                spec.eval(xi).unwrap(),
                closed.eval(xi).unwrap(),
                max_relative = 1e-9
            );
            for order in 1..=3u8 {
                assert_relative_eq!(
                    spec.deriv(xi, order).unwrap(),
                    closed.deriv(xi, order).unwrap(),
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn boundary_values_closed() {
        let p1 = BernsteinSpec::power(1.0).unwrap();
        let (u, v) = p1.boundary_values(4.0).unwrap();
        assert!(u.abs() < 1e-14);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);

        let p2 = BernsteinSpec::power(2.0).unwrap();
        let (u, v) = p2.boundary_values(9.0).unwrap();
        assert_relative_eq!(u, -9.0, max_relative = 1e-12);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn boundary_values_klein_gordon_vs_small_eps_oracle() {
        // direct complex evaluation of (1+xi)^{1/2} - 1 at xi = -5 + i*eps
        let s = 5.0f64;
        let eps = 1e-8;
        let w = num_complex::Complex64::new(1.0 - s, eps).sqrt() - 1.0;
        let kg = BernsteinSpec::klein_gordon();
        let (u, v) = kg.boundary_values(s).unwrap();
        assert_relative_eq!(u, -1.0, max_relative = 1e-12);
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
        assert!((w.re - u).abs() < 1e-6);
        assert!((w.im - v).abs() < 1e-6);
        assert!(kg.boundary_values(1.0).is_err());
    }

    #[test]
    fn boundary_values_measure_matches_power() {
        let spec = BernsteinSpec::measure_defined(0.0, Density::PowerTail { alpha: 1.0 }).unwrap();
        for s in [0.5, 4.0, 20.0] {
            let (u, v) = spec.boundary_values(s).unwrap();
            assert!(u.abs() < 1e-7 * (1.0 + s.sqrt()), "u = {u} at s = {s}");
            assert_relative_eq!(v, s.sqrt(), max_relative = 1e-12);
        }
        // alpha where u is nonzero
        let a = 0.6;
        let spec = BernsteinSpec::measure_defined(0.0, Density::PowerTail { alpha: a }).unwrap();
        for s in [0.7, 3.0] {
            let (u, v) = spec.boundary_values(s).unwrap();
            let exact_u = s.powf(a / 2.0) * (a * PI / 2.0).cos();
            let exact_v = s.powf(a / 2.0) * (a * PI / 2.0).sin();
            assert_relative_eq!(u, exact_u, max_relative = 1e-7);
            assert_relative_eq!(v, exact_v, max_relative = 1e-12);
        }
    }

    #[test]
    fn pq_values() {
        for alpha in [0.5, 1.0, 1.5] {
            let spec = BernsteinSpec::power(alpha).unwrap();
            for mu in [0.3, 1.0, 12.0] {
                let (p, q) = spec.pq(mu).unwrap();
                assert_relative_eq!(p, alpha / 2.0, max_relative = 1e-12);
                assert_relative_eq!(q, (2.0 - alpha) / 4.0, max_relative = 1e-12);
            }
        }
        let p2 = BernsteinSpec::power(2.0).unwrap();
        let (p, q) = p2.pq(3.0).unwrap();
        assert_relative_eq!(p, 1.0, max_relative = 1e-14);
        assert!(q.abs() < 1e-14);

        // klein_gordon at mu = 1: P = 1/(2 sqrt2 (sqrt2 - 1)), Q = 1/8
        let kg = BernsteinSpec::klein_gordon();
        let (p, q) = kg.pq(1.0).unwrap();
        let s2 = 2.0f64.sqrt();
        assert_relative_eq!(p, 1.0 / (2.0 * s2 * (s2 - 1.0)), max_relative = 1e-12);
        assert_relative_eq!(q, 0.125, max_relative = 1e-12);
        assert!(p + q <= 1.0 + 1e-12);
    }

    #[test]
    fn growth_probe() {
        let grid = BernsteinSpec::default_probe_grid();
        assert!(BernsteinSpec::power(1.0)
            .unwrap()
            .moderate_growth_probe(&grid)
            .unwrap()
            .passes);
        assert!(!BernsteinSpec::log1p()
            .moderate_growth_probe(&grid)
            .unwrap()
            .passes);
        assert!(BernsteinSpec::sum_of_powers(1.0, 0.5)
            .unwrap()
            .moderate_growth_probe(&grid)
            .unwrap()
            .passes);
        // the slowly varying measure-defined example still passes
        let slow = BernsteinSpec::measure_defined(0.0, Density::LogWeight).unwrap();
        assert!(slow.moderate_growth_probe(&grid).unwrap().passes);
    }

    #[test]
    fn nu_power_closed_forms() {
        let tail = BernsteinSpec::power(1.0).unwrap().levy_tail().unwrap();
        for z in [0.3, 1.0, 5.0] {
            assert_relative_eq!(tail.nu(z).unwrap(), 1.0 / (PI * z * z), max_relative = 1e-13);
            assert_relative_eq!(tail.nu_inf(z).unwrap(), 1.0 / (PI * z), max_relative = 1e-13);
        }
        let t2 = BernsteinSpec::power(2.0).unwrap().levy_tail().unwrap();
        assert_eq!(t2.nu(1.0).unwrap(), 0.0);
        assert_relative_eq!(t2.nu0(0.7).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(t2.nu_inf(0.7).unwrap(), 0.0);
    }

    #[test]
    fn nu_subordination_oracle_power() {
        // quadrature of the subordination formula against the closed form
        for alpha in [0.5, 1.0, 1.5] {
            let spec =
                BernsteinSpec::measure_defined(0.0, Density::PowerTail { alpha }).unwrap();
            let tail = spec.levy_tail().unwrap();
            let c = power_nu_constant(alpha);
            for z in [0.5, 2.0] {
                assert_relative_eq!(
                    tail.nu(z).unwrap(),
                    c * z.powf(-1.0 - alpha),
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn nu_log1p_closed_form() {
        // for log(1+xi) the subordination integral collapses to exp(-z)/z
        let tail = BernsteinSpec::log1p().levy_tail().unwrap();
        for z in [0.4, 1.0, 3.0] {
            assert_relative_eq!(tail.nu(z).unwrap(), (-z).exp() / z, max_relative = 1e-10);
        }
    }

    #[test]
    fn levy_khintchine_identity_power1() {
        // 2 ∫ (1 - cos(xi z)) nu(z) dz = psi(xi^2) = |xi| for the Cauchy case
        let tail = BernsteinSpec::power(1.0).unwrap().levy_tail().unwrap();
        for xi in [0.5f64, 1.0, 3.0] {
            let k = 200.0 * PI / xi; // integer number of periods
            let head = quad::adaptive_breakpoints(
                &|z: f64| 2.0 * (1.0 - (xi * z).cos()) * tail.nu(z).unwrap(),
                &[0.0, PI / xi, k],
                Tol::new(1e-11, 1e-13),
            )
            .unwrap()
            .value;
            // tail: 2 nu_inf(k) plus an oscillatory remainder that is O(nu'(k)/xi^2)
            let total = head + 2.0 * tail.nu_inf(k).unwrap();
            assert_relative_eq!(total, xi, max_relative = 1e-8);
        }
    }

    #[test]
    fn nu_klein_gordon_limits() {
        let tail = BernsteinSpec::klein_gordon().levy_tail().unwrap();
        // near zero the KG kernel matches the Cauchy kernel 1/(pi z^2)
        let z = 1e-4;
        assert_relative_eq!(
            tail.nu(z).unwrap(),
            1.0 / (PI * z * z),
            max_relative = 2e-4
        );
        // Levy-Khintchine at xi = 2: psi(xi^2) = sqrt(5) - 1
        let xi = 2.0f64;
        let k = 200.0 * PI / xi;
        let head = quad::adaptive_breakpoints(
            &|z: f64| 2.0 * (1.0 - (xi * z).cos()) * tail.nu(z).unwrap(),
            &[0.0, PI / xi, k],
            Tol::new(1e-9, 1e-12),
        )
        .unwrap()
        .value;
        let total = head + 2.0 * tail.nu_inf(k).unwrap();
        assert_relative_eq!(total, 5.0f64.sqrt() - 1.0, max_relative = 1e-6);
    }

    #[test]
    fn sign_chain_on_log_grid() {
        let grid = util::geometric_grid(1e-4, 1e6, 41);
        let specs = [
            BernsteinSpec::power(0.5).unwrap(),
            BernsteinSpec::power(1.0).unwrap(),
            BernsteinSpec::power(2.0).unwrap(),
            BernsteinSpec::sum_of_powers(1.0, 0.5).unwrap(),
            BernsteinSpec::klein_gordon(),
            BernsteinSpec::log1p(),
        ];
        for spec in &specs {
            for &xi in &grid {
                let psi = spec.eval(xi).unwrap();
                let d1 = spec.deriv(xi, 1).unwrap();
                let d2 = spec.deriv(xi, 2).unwrap();
                let d3 = spec.deriv(xi, 3).unwrap();
                assert!(psi > 0.0 && d1 > 0.0 && d2 <= 0.0 && d3 >= 0.0, "{}", spec.name());
                // bound chain from the representation
                assert!(-xi * d2 <= 2.0 * d1 * (1.0 + 1e-12));
                assert!(xi * xi * d3 <= 6.0 * d1 * (1.0 + 1e-12));
                // concavity through the origin
                assert!(xi * d1 <= psi * (1.0 + 1e-12));
                // P + Q <= 1
                let (p, q) = spec.pq(xi.sqrt()).unwrap();
                assert!(p + q <= 1.0 + 1e-12, "{}: P+Q = {}", spec.name(), p + q);
            }
        }
    }
}
