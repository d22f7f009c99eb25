//! The half-line generalised eigenfunction F_μ(x) = sin(μx + θ_μ) − G_μ(x).
//!
//! G_μ is the Laplace transform of the density
//!
//! ```text
//! γ_μ(ξ) = (1/π) · μψ'(μ²) v(ξ²) / ((ψ(μ²) − u(ξ²))² + v(ξ²)²) · exp(−E(ξ)) ,
//! E(ξ)   = (1/π) ∫₀^∞ ξ/(ξ² + r²) · log[ ψ'(μ²)(μ² − r²)/(ψ(μ²) − ψ(r²)) ] dr ,
//! ```
//!
//! where u + iv = ψ(−s + i0) are the boundary values supplied by `cbf`, so no
//! small-ε limits appear anywhere. A [`GammaDensity`] caches γ_μ on an
//! adaptively refined panel grid once per μ; every downstream quantity —
//! G_μ, its derivatives, I_μ = ∫G_μ, the total mass — is then a weighted sum
//! over the cached nodes, cheap enough to be used inside further quadratures.

use crate::cbf::{BernsteinSpec, PsiAt};
use crate::error::{Error, Result};
use crate::quad::{self, Tol};
use crate::theta;
use num_complex::Complex64;
use std::f64::consts::PI;

const EFAC_TOL: Tol = Tol {
    rel: 1e-9,
    abs: 1e-12,
};

/// log[ψ'(t)(t−s)/(ψ(t)−ψ(s))], the integrand of the exponential factor.
fn log_ratio(spec: &BernsteinSpec, at: &PsiAt, s: f64) -> f64 {
    theta::log_increment_ratio(spec, at, s)
}

/// E(ξ) = (1/π)∫₀^∞ ξ L(r²)/(ξ²+r²) dr for real ξ > 0.
pub fn exp_factor_log(spec: &BernsteinSpec, mu: f64, xi: f64) -> Result<f64> {
    let at = spec.at(mu * mu)?;
    exp_factor_log_at(spec, &at, mu, xi)
}

fn exp_factor_pts(spec: &BernsteinSpec, mu: f64, xi_abs: f64) -> (Vec<f64>, f64) {
    let cut = 4.0 * mu.max(xi_abs).max(1.0);
    let mut pts = vec![0.0];
    // resolve the Poisson-kernel spike when xi is far below the other scales
    if xi_abs > 0.0 && xi_abs < 0.25 * mu {
        for m in [1.0, 8.0, 64.0, 512.0] {
            let r = m * xi_abs;
            if r < 0.5 * mu {
                pts.push(r);
            }
        }
    }
    pts.push(0.5 * mu);
    pts.push(mu);
    pts.push(2.0 * mu);
    if xi_abs > 0.0 && xi_abs < cut {
        pts.push(xi_abs);
    }
    let edge = spec.measure_support_lo();
    if edge > 0.0 && edge.sqrt() < cut {
        pts.push(edge.sqrt());
    }
    pts.push(cut);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    (pts, cut)
}

fn exp_factor_log_at(spec: &BernsteinSpec, at: &PsiAt, mu: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::domain(format!("exp factor requires xi > 0, got {xi}")));
    }
    let (pts, cut) = exp_factor_pts(spec, mu, xi);
    let f = |r: f64| xi * log_ratio(spec, at, r * r) / (xi * xi + r * r);
    let head = quad::adaptive_breakpoints(&f, &pts, EFAC_TOL)?;
    // tail in v = log r: the integrand decays like e^{-v} times log terms
    let v_lo = cut.ln();
    let tail = quad::adaptive(
        &|v: f64| {
            let r = v.exp();
            xi * log_ratio(spec, at, r * r) / (xi * xi + r * r) * r
        },
        v_lo,
        v_lo + 50.0,
        EFAC_TOL,
    )?;
    Ok((head.value + tail.value) / PI)
}

/// Complex version of the exponential factor, Re ξ > 0 (for 𝓛F_μ).
fn exp_factor_log_complex(
    spec: &BernsteinSpec,
    at: &PsiAt,
    mu: f64,
    xi: Complex64,
) -> Result<Complex64> {
    let xi2 = xi * xi;
    let (pts, cut) = exp_factor_pts(spec, mu, xi.norm());
    let f = |r: f64| xi * log_ratio(spec, at, r * r) / (xi2 + r * r);
    let (head, _) = quad::adaptive_complex(&f, &pts, EFAC_TOL)?;
    let v_lo = cut.ln();
    let (tail, _) = quad::adaptive_complex(
        &|v: f64| {
            let r = v.exp();
            xi * log_ratio(spec, at, r * r) / (xi2 + r * r) * r
        },
        &[v_lo, v_lo + 50.0],
        EFAC_TOL,
    )?;
    Ok((head + tail) / PI)
}

/// Pointwise γ_μ(ξ); returns 0 wherever v(ξ²) = 0 (e.g. the whole line for
/// the pure drift, or ξ < 1 for the Klein–Gordon family).
pub fn gamma_density(spec: &BernsteinSpec, mu: f64, xi: f64) -> Result<f64> {
    if !(mu > 0.0 && xi > 0.0) {
        return Err(Error::domain(format!(
            "gamma_density requires mu, xi > 0, got mu={mu}, xi={xi}"
        )));
    }
    let at = spec.at(mu * mu)?;
    gamma_point(spec, &at, mu, xi)
}

fn gamma_point(spec: &BernsteinSpec, at: &PsiAt, mu: f64, xi: f64) -> Result<f64> {
    let (u, v) = spec.boundary_values(xi * xi)?;
    if v <= 0.0 {
        return Ok(0.0);
    }
    let du = at.psi - u;
    let denom = du * du + v * v;
    let pref = mu * at.d1 * v / (PI * denom);
    let e = exp_factor_log_at(spec, at, mu, xi)?;
    Ok(pref * (-e).exp())
}

struct GammaPanel {
    xs: [f64; 15],
    ws: [f64; 15],
    gs: [f64; 15],
    /// error estimate of the (1 + 1/ξ)-weighted integral over the panel
    err: f64,
    lo: f64,
    hi: f64,
}

impl GammaPanel {
    fn build(spec: &BernsteinSpec, at: &PsiAt, mu: f64, lo: f64, hi: f64) -> Result<Self> {
        let (xs, ws) = quad::gk15_nodes(lo, hi);
        let g7 = quad::g7_weights(lo, hi);
        let mut gs = [0.0; 15];
        let mut k_w = 0.0;
        let mut g_w = 0.0;
        for i in 0..15 {
            gs[i] = gamma_point(spec, at, mu, xs[i])?;
            let weighted = gs[i] * (1.0 + 1.0 / xs[i]);
            k_w += ws[i] * weighted;
            g_w += g7[i] * weighted;
        }
        Ok(GammaPanel {
            xs,
            ws,
            gs,
            err: (k_w - g_w).abs(),
            lo,
            hi,
        })
    }

    fn weighted_mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..15 {
            acc += self.ws[i] * self.gs[i] * (1.0 + 1.0 / self.xs[i]);
        }
        acc
    }
}

/// γ_μ cached on an adaptive panel grid, with θ_μ and the spot values of ψ
/// at μ² riding along.
pub struct GammaDensity {
    spec: BernsteinSpec,
    pub mu: f64,
    pub theta: f64,
    at: PsiAt,
    panels: Vec<GammaPanel>,
}

impl GammaDensity {
    /// Build the grid for one μ. The panel set starts from breakpoints at the
    /// support edge of the spectral measure, the resonance point where
    /// u(s) = ψ(μ²) (if any), and μ itself, is extended geometrically until
    /// new panels stop contributing, and is then refined adaptively against
    /// the (1 + 1/ξ)-weighted measure so that both G_μ and I_μ = ∫γ(ξ)/ξ dξ
    /// come out accurate.
    pub fn build(spec: &BernsteinSpec, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("GammaDensity requires mu > 0, got {mu}")));
        }
        let t = mu * mu;
        let at = spec.at(t)?;
        let th = theta::theta(spec, mu)?;

        if spec.drift() > 0.0 && spec.measure_density(t.max(1.0)) == 0.0 {
            // pure drift (power(2)): gamma vanishes identically
            return Ok(GammaDensity {
                spec: spec.clone(),
                mu,
                theta: th,
                at,
                panels: Vec::new(),
            });
        }

        let edge = spec.measure_support_lo().sqrt();
        let start = edge; // gamma = 0 below the support edge
        let mut bps: Vec<f64> = Vec::new();
        if edge > 0.0 {
            for k in (1..=10).rev() {
                bps.push(edge * (1.0 + (2.0f64).powi(-k)));
            }
        }
        bps.push(mu);
        bps.push(2.0 * mu);
        if let Some(s_star) = resonance_point(spec, at.psi, t)? {
            let xi_star = s_star.sqrt();
            for k in 1..=10 {
                let d = (2.0f64).powi(-k);
                if xi_star * (1.0 - d) > start {
                    bps.push(xi_star * (1.0 - d));
                }
                bps.push(xi_star * (1.0 + d));
            }
            bps.push(xi_star);
            bps.push(2.0 * xi_star);
        }
        bps.retain(|&x| x > start);
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs());

        let mut panels: Vec<GammaPanel> = Vec::new();
        let mut prev = start;
        for &b in &bps {
            panels.push(GammaPanel::build(spec, &at, mu, prev, b)?);
            prev = b;
        }

        // geometric extension until new panels stop contributing
        let mut total: f64 = panels.iter().map(|p| p.weighted_mass()).sum();
        let mut lo = prev.max(mu * 1e-6);
        for _ in 0..260 {
            let hi = 2.0 * lo;
            let p = GammaPanel::build(spec, &at, mu, lo, hi)?;
            let m = p.weighted_mass();
            panels.push(p);
            total += m;
            lo = hi;
            if total != 0.0 && m.abs() <= 1e-11 * total.abs() {
                break;
            }
        }

        // global adaptive refinement on the weighted measure
        let target = |tot: f64| (1e-10 * tot.abs()).max(1e-13);
        for _ in 0..4000 {
            let toterr: f64 = panels.iter().map(|p| p.err).sum();
            if toterr <= target(total) {
                break;
            }
            let (mut imax, mut emax) = (usize::MAX, 0.0);
            for (i, p) in panels.iter().enumerate() {
                if p.err > emax && (p.hi - p.lo) > 1e-14 * p.hi {
                    emax = p.err;
                    imax = i;
                }
            }
            if imax == usize::MAX {
                break;
            }
            let (plo, phi) = (panels[imax].lo, panels[imax].hi);
            let mid = 0.5 * (plo + phi);
            let left = GammaPanel::build(spec, &at, mu, plo, mid)?;
            let right = GammaPanel::build(spec, &at, mu, mid, phi)?;
            total += left.weighted_mass() + right.weighted_mass() - panels[imax].weighted_mass();
            panels[imax] = left;
            panels.push(right);
        }

        Ok(GammaDensity {
            spec: spec.clone(),
            mu,
            theta: th,
            at,
            panels,
        })
    }

    pub fn spec(&self) -> &BernsteinSpec {
        &self.spec
    }

    /// γ_μ evaluated afresh at one point (not interpolated from the grid).
    pub fn density(&self, xi: f64) -> Result<f64> {
        gamma_point(&self.spec, &self.at, self.mu, xi)
    }

    /// Total mass ∫ γ_μ(ξ) dξ = G_μ(0⁺).
    pub fn mass(&self) -> f64 {
        self.sum(|_, g| g)
    }

    /// G_μ(x) = ∫ e^{−xξ} γ_μ(ξ) dξ, valid for all x ≥ 0.
    pub fn g(&self, x: f64) -> f64 {
        self.sum(|xi, g| (-x * xi).exp() * g)
    }

    /// First or second derivative of G_μ (differentiated under the integral).
    pub fn g_deriv(&self, x: f64, order: u8) -> f64 {
        match order {
            1 => self.sum(|xi, g| -xi * (-x * xi).exp() * g),
            _ => self.sum(|xi, g| xi * xi * (-x * xi).exp() * g),
        }
    }

    /// I_μ = ∫₀^∞ G_μ(x) dx = ∫ γ_μ(ξ)/ξ dξ (Fubini route).
    pub fn fubini_i(&self) -> f64 {
        self.sum(|xi, g| g / xi)
    }

    /// Exact Fubini form of the window tail ∫_X^∞ G_μ(x) dx.
    pub fn i_tail(&self, x_cut: f64) -> f64 {
        self.sum(|xi, g| (-x_cut * xi).exp() * g / xi)
    }

    fn sum<W: Fn(f64, f64) -> f64>(&self, w: W) -> f64 {
        let mut acc = 0.0;
        for p in &self.panels {
            let mut local = 0.0;
            for i in 0..15 {
                local += p.ws[i] * w(p.xs[i], p.gs[i]);
            }
            acc += local;
        }
        acc
    }
}

/// Root of u(s) = ψ(μ²) on s > 0, if one exists: the resonance where the
/// denominator of γ_μ is smallest. Scanned on a log grid, then bisected.
fn resonance_point(spec: &BernsteinSpec, psi_t: f64, t: f64) -> Result<Option<f64>> {
    let edge = spec.measure_support_lo();
    let s_lo = (t * 1e-8).max(edge * (1.0 + 1e-9)).max(1e-300);
    let s_hi = t.max(edge.max(1.0)) * 1e10;
    let n = 240;
    let ratio = (s_hi / s_lo).ln() / n as f64;
    let mut prev_s = s_lo;
    let mut prev_h = match spec.boundary_values(prev_s) {
        Ok((u, _)) => u - psi_t,
        Err(_) => return Ok(None),
    };
    let mut found = None;
    for i in 1..=n {
        let s = s_lo * ((i as f64) * ratio).exp();
        let (u, _) = match spec.boundary_values(s) {
            Ok(uv) => uv,
            Err(Error::BranchPoint { .. }) => continue,
            Err(e) => return Err(e),
        };
        let h = u - psi_t;
        if prev_h < 0.0 && h >= 0.0 {
            found = Some((prev_s, s));
        }
        prev_s = s;
        prev_h = h;
    }
    let Some((mut lo, mut hi)) = found else {
        return Ok(None);
    };
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (u, _) = spec.boundary_values(mid)?;
        if u - psi_t < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// G_μ(x) (one-shot; builds the γ grid internally — reuse [`GammaDensity`]
/// when several evaluations share μ).
pub fn g_value(spec: &BernsteinSpec, mu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("G requires x > 0, got {x}")));
    }
    Ok(GammaDensity::build(spec, mu)?.g(x))
}

/// G_μ^{(order)}(x), order ∈ {1, 2}.
pub fn g_deriv(spec: &BernsteinSpec, mu: f64, x: f64, order: u8) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("G' requires x > 0, got {x}")));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::domain(format!(
            "G derivative order must be 1 or 2, got {order}"
        )));
    }
    Ok(GammaDensity::build(spec, mu)?.g_deriv(x, order))
}

/// Closed form I_μ = cos(θ_μ)/μ − √(ψ'(μ²)/ψ(μ²)).
pub fn closed_form_i(spec: &BernsteinSpec, mu: f64) -> Result<f64> {
    let t = mu * mu;
    let at = spec.at(t)?;
    Ok(theta::theta(spec, mu)?.cos() / mu - (at.d1 / at.psi).sqrt())
}

/// I_μ by quadrature. The returned value is the Fubini route ∫ γ(ξ)/ξ dξ;
/// it is cross-checked against the direct route ∫₀^X G(x) dx plus the exact
/// Fubini tail, and a disagreement beyond 1e−4 relative is reported as an
/// error in the γ machinery.
pub fn i_mu(spec: &BernsteinSpec, mu: f64) -> Result<f64> {
    let grid = GammaDensity::build(spec, mu)?;
    let i_fub = grid.fubini_i();
    if i_fub == 0.0 {
        return Ok(0.0);
    }
    let mut x_cut = 4.0 / mu;
    for _ in 0..40 {
        if grid.i_tail(x_cut) <= 1e-5 * i_fub {
            break;
        }
        x_cut *= 2.0;
    }
    let head = quad::adaptive_breakpoints(
        &|x: f64| grid.g(x),
        &[0.0, 1.0 / mu, x_cut],
        Tol::new(1e-9, 1e-13),
    )?;
    let direct = head.value + grid.i_tail(x_cut);
    if (direct - i_fub).abs() > (1e-4 * i_fub.abs()).max(1e-10) {
        return Err(Error::numeric(
            "halfline",
            format!(
                "I_mu routes disagree: direct {direct:.12e} vs fubini {i_fub:.12e} \
                 (gamma machinery suspect)"
            ),
        ));
    }
    Ok(i_fub)
}

/// 𝓛F_μ(ξ) = μ/(μ² + ξ²) · exp(E(ξ)) for Re ξ > 0.
pub fn laplace_f(spec: &BernsteinSpec, mu: f64, xi: Complex64) -> Result<Complex64> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("laplace_f requires mu > 0, got {mu}")));
    }
    if xi.re <= 0.0 {
        return Err(Error::domain(format!(
            "laplace_f requires Re xi > 0, got {}",
            xi.re
        )));
    }
    let denom = Complex64::new(mu * mu, 0.0) + xi * xi;
    if denom.norm() < 1e-12 * (mu * mu + xi.norm_sqr()) {
        return Err(Error::NearPole {
            distance: denom.norm(),
        });
    }
    let at = spec.at(mu * mu)?;
    let e = exp_factor_log_complex(spec, &at, mu, xi)?;
    Ok(mu / denom * e.exp())
}

/// Right-hand side of the 𝓛F_μ estimate:
/// 2√2 · μ/|μ²+ξ²| · √(ψ'(μ²)(μ²−|ξ|²)/(ψ(μ²)−ψ(|ξ|²))).
pub fn laplace_f_bound(spec: &BernsteinSpec, mu: f64, xi: Complex64) -> Result<f64> {
    let t = mu * mu;
    let at = spec.at(t)?;
    let s = xi.norm_sqr();
    // exp(L(s)) is exactly psi'(t)(t-s)/(psi(t)-psi(s))
    let under_sqrt = log_ratio(spec, &at, s).exp();
    let denom = (Complex64::new(t, 0.0) + xi * xi).norm();
    Ok(2.0 * std::f64::consts::SQRT_2 * mu / denom * under_sqrt.sqrt())
}

/// Right-hand side of the G_μ estimate (μx ≠ 1 form, with the removable
/// point handled by its limit):
/// (1/πx) (ψ(1/x²)/ψ(μ²)) √(ψ'(μ²)/ψ(μ²)) ·
/// (1 − ψ(μ²)/(μ²x²ψ(1/x²))) / (1 − ψ(1/x²)/ψ(μ²)).
pub fn lemma_g_bound(spec: &BernsteinSpec, mu: f64, x: f64) -> Result<f64> {
    let t = mu * mu;
    let at = spec.at(t)?;
    let w = 1.0 / (x * x);
    let psi_w = spec.eval(w)?;
    let ratio = if (mu * x - 1.0).abs() < 1e-8 {
        // l'Hopital limit at mu x = 1: (1 - P)/P with P = t psi'/psi
        let p = t * at.d1 / at.psi;
        (1.0 - p) / p
    } else {
        (1.0 - at.psi / (t * x * x * psi_w)) / (1.0 - psi_w / at.psi)
    };
    Ok(psi_w / (PI * x * at.psi) * (at.d1 / at.psi).sqrt() * ratio)
}

/// The half-line eigenfunction F_μ(x) = sin(μx + θ_μ) − G_μ(x), extended by
/// zero to x ≤ 0.
pub struct EigenfunctionF {
    grid: GammaDensity,
}

impl EigenfunctionF {
    pub fn build(spec: &BernsteinSpec, mu: f64) -> Result<Self> {
        Ok(EigenfunctionF {
            grid: GammaDensity::build(spec, mu)?,
        })
    }

    pub fn from_grid(grid: GammaDensity) -> Self {
        EigenfunctionF { grid }
    }

    pub fn mu(&self) -> f64 {
        self.grid.mu
    }

    pub fn theta(&self) -> f64 {
        self.grid.theta
    }

    pub fn grid(&self) -> &GammaDensity {
        &self.grid
    }

    /// sin(μx + θ_μ) for x > 0, else 0.
    pub fn sin_part(&self, x: f64) -> f64 {
        if x > 0.0 {
            (self.grid.mu * x + self.grid.theta).sin()
        } else {
            0.0
        }
    }

    /// G_μ(x) for x > 0, else 0.
    pub fn g(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.grid.g(x)
        } else {
            0.0
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.sin_part(x) - self.grid.g(x)
        } else {
            0.0
        }
    }
}
