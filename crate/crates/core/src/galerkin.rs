//! Rayleigh–Ritz discretisation of the quadratic form of ψ(−Δ) in the
//! zero-extended sine basis of (−a, a):
//!
//! ```text
//! e_j(x) = a^{-1/2} sin(jπ(x+a)/(2a)) on (−a,a), 0 outside,
//! M_jk   = (1/2π) ∫ ψ(ξ²) 𝓕e_j(ξ) conj(𝓕e_k(ξ)) dξ .
//! ```
//!
//! The Fourier transforms are rational-times-trig, so with ω_j = jπ/(2a),
//!
//! ```text
//! M_jk = (4 ω_j ω_k / πa) ∫₀^∞ ψ(ξ²) trig²(aξ) / ((ω_j²−ξ²)(ω_k²−ξ²)) dξ ,
//! ```
//!
//! trig = cos for the spatially even block (odd j) and sin for the odd block.
//! Partial fractions collapse the off-diagonal double-pole products to
//! differences of single-pole integrals H_j, so a whole block assembles from
//! O(N) one-dimensional integrals instead of O(N²): every integrand sample
//! ψ(ξ²)·trig²(aξ) is shared across the block. Beyond ξ = 50·Nπ/(2a) the
//! remaining tail is expanded in (ω/ξ)² and integrated by parts analytically.
//!
//! Ritz eigenvalues are upper bounds of the true λ_n (min-max), decreasing
//! in N by subspace nesting; that is what makes this module an independent
//! oracle for the asymptotic side of the toolkit.

use crate::cbf::BernsteinSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, SymEigen, SymMat};
use crate::modes::ModeSolution;
use crate::quad::{self, Tol};
use crate::util::sinc;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Tail start in units of the largest basis frequency. With the five-term
/// (ω/ξ)² expansion, the expansion truncation error is O((1/20)^10); the
/// integrated-by-parts remainder of the oscillatory tail decays like Ξ^{-4},
/// so small bases push the tail start further out (at constant node count).
fn tail_factor(n: usize) -> f64 {
    (4096.0 / n as f64).max(20.0)
}
/// Maximum sub-panel width for the shared-node quadrature.
const MAX_PANEL_WIDTH: f64 = 0.8;

/// Parity of a Ritz eigenfunction on (−a, a).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// 𝓕e_j(ξ), the Fourier transform of the zero-extended sine mode.
///
/// Odd j give real even functions 2a^{-1/2}ω_j cos(aξ)/(ω_j²−ξ²); even j give
/// purely imaginary 2i·a^{-1/2}ω_j sin(aξ)/(ω_j²−ξ²). The removable points
/// ξ = ±ω_j are evaluated through the shifted-sine form.
pub fn basis_transform(a: f64, j: u32, xi: f64) -> Complex64 {
    assert!(j >= 1 && a > 0.0);
    let om = j as f64 * PI / (2.0 * a);
    let pref = 2.0 * om / a.sqrt();
    let xia = xi.abs();
    let shape = if (xia - om).abs() < 0.5 * om.min(1.0) {
        // trig(a ξ)/(ω²−ξ²) = σ sin(a(ξ−ω)) / ((ξ−ω)(ξ+ω)), σ = ±1
        let i = ((j - 1) / 2) as i32;
        let sigma = if i % 2 == 0 { 1.0 } else { -1.0 };
        let dm = xia - om;
        sigma * a * sinc(a * dm) / (xia + om)
    } else if j % 2 == 1 {
        (a * xia).cos() / ((om - xia) * (om + xia))
    } else {
        (a * xia).sin() / ((om - xia) * (om + xia))
    };
    if j % 2 == 1 {
        Complex64::new(pref * shape, 0.0)
    } else {
        let s = if xi < 0.0 { -1.0 } else { 1.0 };
        Complex64::new(0.0, s * pref * shape)
    }
}

/// Parity-blocked Galerkin matrix of the form.
pub struct FormMatrix {
    pub a: f64,
    pub n_basis: usize,
    /// block of spatially even basis functions (odd j)
    pub even: SymMat,
    /// block of spatially odd basis functions (even j)
    pub odd: SymMat,
    pub even_j: Vec<u32>,
    pub odd_j: Vec<u32>,
}

impl FormMatrix {
    /// Entry M_jk in original basis indices (1-based); exact zero across
    /// parity.
    pub fn entry(&self, j: u32, k: u32) -> f64 {
        if (j + k) % 2 == 1 {
            return 0.0;
        }
        if j % 2 == 1 {
            let ji = ((j - 1) / 2) as usize;
            let ki = ((k - 1) / 2) as usize;
            self.even.get(ji, ki)
        } else {
            let ji = (j / 2 - 1) as usize;
            let ki = (k / 2 - 1) as usize;
            self.odd.get(ji, ki)
        }
    }

    /// Assemble the full N×N matrix (row-major), zeros across parity.
    pub fn full(&self) -> SymMat {
        let n = self.n_basis;
        let mut m = SymMat::zeros(n);
        for j in 1..=n as u32 {
            for k in 1..=n as u32 {
                m.set((j - 1) as usize, (k - 1) as usize, self.entry(j, k));
            }
        }
        m
    }
}

/// Per-block node sums H_j = ∫ψ trig² [1/(ω_j²−ξ²) + 1/(c₀²+ξ²)] dξ and
/// D_j = ∫ψ trig²/(ω_j²−ξ²)² dξ over [0, Ξ].
struct BlockSums {
    h: Vec<f64>,
    d: Vec<f64>,
}

fn block_sums(
    spec: &BernsteinSpec,
    a: f64,
    oms: &[f64],
    use_cos: bool,
    xi_max: f64,
) -> BlockSums {
    let base_w = PI / (2.0 * a);
    let c0 = base_w;
    let c0sq = c0 * c0;
    let l_max = (xi_max / base_w).round() as usize;
    let sub = (base_w / MAX_PANEL_WIDTH).ceil().max(1.0) as usize;

    // panel list: dyadic refinement of [0, base_w] (psi(ξ²) can have a branch
    // point at 0), then uniform sub-panels of each half-period cell
    let mut panels: Vec<(f64, f64)> = Vec::with_capacity(l_max * sub + 64);
    for k in (0..52).rev() {
        let hi = base_w * (0.5f64).powi(k);
        panels.push((0.5 * hi, hi));
    }
    for l in 1..l_max {
        let lo = l as f64 * base_w;
        for s in 0..sub {
            let w = base_w / sub as f64;
            panels.push((lo + s as f64 * w, lo + (s + 1) as f64 * w));
        }
    }

    let (gl_x, gl_w) = quad::gl15();
    let near = 0.75 * base_w;
    let m = oms.len();

    let chunks: Vec<(Vec<f64>, Vec<f64>)> = panels
        .par_chunks(256)
        .map(|chunk| {
            let mut h = vec![0.0; m];
            let mut d = vec![0.0; m];
            for &(lo, hi) in chunk {
                let c = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                for (x, w) in gl_x.iter().zip(gl_w) {
                    let xi = c + half * x;
                    let wt = w * half;
                    let psi = spec.eval_raw(xi * xi);
                    let (sn, cs) = (a * xi).sin_cos();
                    let trig = if use_cos { cs } else { sn };
                    let trig2 = trig * trig;
                    let wpsi = wt * psi;
                    let shared = trig2 / (c0sq + xi * xi);
                    for (i, &om) in oms.iter().enumerate() {
                        let dm = xi - om;
                        let s = if dm.abs() < near {
                            let sigma = if i % 2 == 0 { 1.0 } else { -1.0 };
                            sigma * a * sinc(a * dm) / (xi + om)
                        } else {
                            trig / ((om - xi) * (om + xi))
                        };
                        h[i] += wpsi * (trig * s + shared);
                        d[i] += wpsi * (s * s);
                    }
                }
            }
            (h, d)
        })
        .collect();

    let mut h = vec![0.0; m];
    let mut d = vec![0.0; m];
    for (hc, dc) in chunks {
        for i in 0..m {
            h[i] += hc[i];
            d[i] += dc[i];
        }
    }
    BlockSums { h, d }
}

/// Tail moments T_m = ∫_Ξ^∞ ψ(ξ²) trig²(aξ) ξ^{−4−2m} dξ for m = 0..4,
/// via trig² = (1 ± cos(2aξ))/2: a smooth u-substituted quadrature plus a
/// thrice-integrated-by-parts oscillatory part.
fn tail_moments(spec: &BernsteinSpec, a: f64, xi_max: f64, use_cos: bool) -> Result<[f64; 5]> {
    let kappa = 2.0 * a;
    let mut t = [0.0; 5];
    for (m, tm) in t.iter_mut().enumerate() {
        let p = (4 + 2 * m) as f64;
        // smooth half: (1/2)∫ ψ(ξ²) ξ^{-p} dξ, ξ = Ξ/u
        let sm = quad::adaptive(
            &|u: f64| {
                let xi = xi_max / u;
                spec.eval_raw(xi * xi) * u.powf(p - 2.0)
            },
            0.0,
            1.0,
            Tol::new(1e-11, 1e-300),
        )?
        .value
            * xi_max.powf(1.0 - p);
        // oscillatory half: ±(1/2)∫ ψ(ξ²) cos(2aξ) ξ^{-p} dξ by parts
        let x = xi_max;
        let x2 = x * x;
        let psi = spec.eval_raw(x2);
        let d1 = spec.deriv_raw(x2, 1);
        let d2 = spec.deriv_raw(x2, 2);
        let f0 = psi * x.powf(-p);
        let f1 = 2.0 * d1 * x.powf(1.0 - p) - p * psi * x.powf(-1.0 - p);
        let f2 = 4.0 * d2 * x.powf(2.0 - p) + (2.0 - 4.0 * p) * d1 * x.powf(-p)
            + p * (p + 1.0) * psi * x.powf(-2.0 - p);
        let (skx, ckx) = (kappa * x).sin_cos();
        let osc = -f0 * skx / kappa - f1 * ckx / (kappa * kappa)
            + f2 * skx / (kappa * kappa * kappa);
        let sign = if use_cos { 1.0 } else { -1.0 };
        *tm = 0.5 * (sm + sign * osc);
    }
    Ok(t)
}

fn assemble_block(
    spec: &BernsteinSpec,
    a: f64,
    oms: &[f64],
    use_cos: bool,
    xi_max: f64,
) -> Result<SymMat> {
    let sums = block_sums(spec, a, oms, use_cos, xi_max);
    let t = tail_moments(spec, a, xi_max, use_cos)?;
    let m = oms.len();
    let mut mat = SymMat::zeros(m);
    let pref = 4.0 / (PI * a);
    for j in 0..m {
        let oj2 = oms[j] * oms[j];
        // diagonal: D_j + Σ (m+1) ω^{2m} T_m
        let tail_d = t[0]
            + oj2 * (2.0 * t[1] + oj2 * (3.0 * t[2] + oj2 * (4.0 * t[3] + oj2 * 5.0 * t[4])));
        mat.set(j, j, pref * oj2 * (sums.d[j] + tail_d));
        for k in 0..j {
            let ok2 = oms[k] * oms[k];
            // complete homogeneous symmetric polynomials in (ω_j², ω_k²)
            let h1 = oj2 + ok2;
            let h2 = oj2 * oj2 + oj2 * ok2 + ok2 * ok2;
            let h3 = oj2 * h2 + ok2 * ok2 * ok2;
            let h4 = oj2 * h3 + ok2 * ok2 * ok2 * ok2;
            let tail = t[0] + h1 * t[1] + h2 * t[2] + h3 * t[3] + h4 * t[4];
            let head = (sums.h[j] - sums.h[k]) / (ok2 - oj2);
            let v = pref * oms[j] * oms[k] * (head + tail);
            mat.set(j, k, v);
            mat.set(k, j, v);
        }
    }
    Ok(mat)
}

/// Assemble the parity-blocked form matrix for basis size `n`.
pub fn form_matrix(spec: &BernsteinSpec, a: f64, n: usize) -> Result<FormMatrix> {
    if n < 2 {
        return Err(Error::domain(format!("basis size must be >= 2, got {n}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("half-width must be positive, got {a}")));
    }
    let base_w = PI / (2.0 * a);
    let xi_max = tail_factor(n) * n as f64 * base_w;
    let even_j: Vec<u32> = (1..=n as u32).filter(|j| j % 2 == 1).collect();
    let odd_j: Vec<u32> = (1..=n as u32).filter(|j| j % 2 == 0).collect();
    let om_of = |j: &u32| *j as f64 * base_w;
    let even_oms: Vec<f64> = even_j.iter().map(om_of).collect();
    let odd_oms: Vec<f64> = odd_j.iter().map(om_of).collect();
    let (even, odd) = (
        assemble_block(spec, a, &even_oms, true, xi_max)?,
        assemble_block(spec, a, &odd_oms, false, xi_max)?,
    );
    Ok(FormMatrix {
        a,
        n_basis: n,
        even,
        odd,
        even_j,
        odd_j,
    })
}

/// Thin wrapper over the dense symmetric eigensolver.
pub fn eigensolve(mat: &SymMat) -> Result<SymEigen> {
    linalg::sym_eigen(mat, true)
}

/// One Ritz eigenvalue with its parity and position inside its block.
#[derive(Debug, Clone, Copy)]
pub struct RitzPair {
    pub lambda: f64,
    pub parity: Parity,
    pub block_index: usize,
}

/// Merged spectrum of both parity blocks, with eigenvectors kept per block.
pub struct RitzSpectrum {
    pub a: f64,
    pub n_basis: usize,
    pub pairs: Vec<RitzPair>,
    pub even_j: Vec<u32>,
    pub odd_j: Vec<u32>,
    even_eig: SymEigen,
    odd_eig: SymEigen,
}

impl RitzSpectrum {
    /// λ_n^{(N)}, 1-based.
    pub fn lambda(&self, n: usize) -> f64 {
        self.pairs[n - 1].lambda
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sine-basis coefficients of the k-th (1-based, sorted) Ritz vector,
    /// as (parity, basis indices j, coefficients).
    pub fn coefficients(&self, k: usize) -> Option<(Parity, &[u32], &[f64])> {
        let pair = self.pairs.get(k - 1)?;
        let (eig, js) = match pair.parity {
            Parity::Even => (&self.even_eig, &self.even_j),
            Parity::Odd => (&self.odd_eig, &self.odd_j),
        };
        let v = eig.vector(pair.block_index)?;
        Some((pair.parity, js.as_slice(), v))
    }

    /// Pointwise value of the k-th normalised Ritz function.
    pub fn ritz_function(&self, k: usize, x: f64) -> Option<f64> {
        let (_, js, v) = self.coefficients(k)?;
        if x.abs() >= self.a {
            return Some(0.0);
        }
        let mut acc = 0.0;
        for (j, c) in js.iter().zip(v) {
            let om = *j as f64 * PI / (2.0 * self.a);
            acc += c * (om * (x + self.a)).sin() / self.a.sqrt();
        }
        Some(acc)
    }
}

fn merge_blocks(
    a: f64,
    n_basis: usize,
    even_j: Vec<u32>,
    odd_j: Vec<u32>,
    even_eig: SymEigen,
    odd_eig: SymEigen,
) -> RitzSpectrum {
    let mut pairs: Vec<RitzPair> = Vec::with_capacity(n_basis);
    for (i, &l) in even_eig.values.iter().enumerate() {
        pairs.push(RitzPair {
            lambda: l,
            parity: Parity::Even,
            block_index: i,
        });
    }
    for (i, &l) in odd_eig.values.iter().enumerate() {
        pairs.push(RitzPair {
            lambda: l,
            parity: Parity::Odd,
            block_index: i,
        });
    }
    pairs.sort_by(|p, q| p.lambda.partial_cmp(&q.lambda).unwrap());
    RitzSpectrum {
        a,
        n_basis,
        pairs,
        even_j,
        odd_j,
        even_eig,
        odd_eig,
    }
}

fn spectrum_inner(spec: &BernsteinSpec, a: f64, n: usize, vectors: bool) -> Result<RitzSpectrum> {
    let fm = form_matrix(spec, a, n)?;
    let (even_eig, odd_eig) = rayon::join(
        || linalg::sym_eigen(&fm.even, vectors),
        || linalg::sym_eigen(&fm.odd, vectors),
    );
    Ok(merge_blocks(a, n, fm.even_j, fm.odd_j, even_eig?, odd_eig?))
}

/// Full Ritz spectrum with eigenvectors.
pub fn spectrum(spec: &BernsteinSpec, a: f64, n: usize) -> Result<RitzSpectrum> {
    spectrum_inner(spec, a, n, true)
}

/// Ritz eigenvalues only (roughly 3× faster; used by convergence studies).
pub fn spectrum_values(spec: &BernsteinSpec, a: f64, n: usize) -> Result<RitzSpectrum> {
    spectrum_inner(spec, a, n, false)
}

/// Two-sided trace check: Σ e^{−λ_n t} against (2a/π)∫ e^{−tψ(ξ²)} dξ.
#[derive(Debug, Clone, Copy)]
pub struct TraceCheck {
    pub t: f64,
    /// Σ over the computed Ritz eigenvalues (lower bound of the true sum)
    pub lhs: f64,
    /// analytic bound on the discarded tail Σ_{n>N} e^{−λ_n t}
    pub tail_bound: f64,
    pub rhs: f64,
    /// rhs − lhs (strict-inequality margin)
    pub margin: f64,
    pub ok: bool,
}

/// Evaluate the trace inequality at time `t` using a computed spectrum.
///
/// The computed lhs underestimates the true sum only through truncation; the
/// tail is bounded by e^{−t·ψ(ω_n²)/2} summed via an integral comparison, so
/// `lhs ≤ rhs` is a genuine necessary condition.
pub fn trace_check(
    spec: &BernsteinSpec,
    a: f64,
    t: f64,
    spectrum: &RitzSpectrum,
) -> Result<TraceCheck> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("trace time must be positive, got {t}")));
    }
    let lhs: f64 = spectrum.pairs.iter().map(|p| (-t * p.lambda).exp()).sum();

    // integrable-symbol cutoff: find X with t psi(X^2) large
    let mut x_hi = (spectrum.n_basis as f64 * PI / (2.0 * a)).max(1.0);
    for _ in 0..200 {
        if t * spec.eval(x_hi * x_hi)? > 750.0 {
            break;
        }
        x_hi *= 2.0;
    }
    if t * spec.eval(x_hi * x_hi)? <= 750.0 {
        return Err(Error::UnsupportedFamily {
            operation: "trace_check",
            detail: format!(
                "exp(-t psi(xi^2)) not integrable enough at t = {t} for {}",
                spec.name()
            ),
        });
    }
    let rhs = 2.0 * a / PI
        * quad::adaptive_breakpoints(
            &|xi: f64| (-t * spec.eval_raw(xi * xi)).exp(),
            &[0.0, 1.0 / t.sqrt().max(1e-8), x_hi],
            Tol::new(1e-11, 1e-14),
        )?
        .value;
    let om_n = spectrum.n_basis as f64 * PI / (2.0 * a);
    let tail_bound = 2.0 * a / PI
        * quad::adaptive(
            &|xi: f64| (-0.5 * t * spec.eval_raw(xi * xi)).exp(),
            om_n,
            x_hi.max(2.0 * om_n),
            Tol::new(1e-11, 1e-14),
        )?
        .value;
    Ok(TraceCheck {
        t,
        lhs,
        tail_bound,
        rhs,
        margin: rhs - lhs,
        ok: lhs <= rhs,
    })
}

/// One row of the asymptotics-vs-oracle comparison.
#[derive(Debug, Clone, Copy)]
pub struct CompareRow {
    pub n: u32,
    pub lambda_ritz: f64,
    pub lambda_tilde: f64,
    /// λ̃_n − λ_n^{(N)}
    pub gap: f64,
    pub n_times_gap: f64,
    /// unconditional lower bound ½ψ((nπ/2a)²) ≤ λ_n^{(N)}
    pub cs_lower_ok: bool,
    /// λ_n^{(N)} / ψ((nπ/2a)²); ≤ 1 + Ritz slack
    pub cs_upper_ratio: f64,
    /// ‖A_Dφ̃ − λ̃φ̃‖/‖φ̃‖ when residual data was supplied
    pub dist_bound: Option<f64>,
    /// nearest same-parity Ritz eigenvalue lies within `dist_bound`
    pub dist_ok: Option<bool>,
}

/// Compare a Ritz spectrum with a mode table; `resid_norm[n-1]`, when given,
/// carries (residual bound, lower norm bound) for the distance test of the
/// approximate eigenvalues.
pub fn compare(
    spec: &BernsteinSpec,
    spectrum: &RitzSpectrum,
    modes: &[ModeSolution],
    resid_norm: Option<&[(f64, f64)]>,
) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::with_capacity(modes.len());
    for (idx, m) in modes.iter().enumerate() {
        let n = m.n;
        if n as usize > spectrum.len() {
            break;
        }
        let lam = spectrum.lambda(n as usize);
        let om = n as f64 * PI / (2.0 * spectrum.a);
        let psi_om = spec.eval(om * om)?;
        let gap = m.lambda - lam;
        let (dist_bound, dist_ok) = match resid_norm.and_then(|r| r.get(idx)) {
            Some(&(resid, norm_lo)) if norm_lo > 0.0 => {
                let bound = resid / norm_lo.sqrt();
                let want = if n % 2 == 1 { Parity::Even } else { Parity::Odd };
                let nearest = spectrum
                    .pairs
                    .iter()
                    .filter(|p| p.parity == want)
                    .map(|p| (p.lambda - m.lambda).abs())
                    .fold(f64::INFINITY, f64::min);
                (Some(bound), Some(nearest <= bound))
            }
            _ => (None, None),
        };
        rows.push(CompareRow {
            n,
            lambda_ritz: lam,
            lambda_tilde: m.lambda,
            gap,
            n_times_gap: n as f64 * gap,
            cs_lower_ok: lam >= 0.5 * psi_om * (1.0 - 1e-12),
            cs_upper_ratio: lam / psi_om,
            dist_bound,
            dist_ok,
        });
    }
    Ok(rows)
}

/// L² distance between the n-th normalised Ritz function and the limiting
/// shape f_n = ±a^{-1/2}·cos(μ̃_n x) (n odd) or sin(μ̃_n x) (n even), with the
/// sign chosen to maximise the inner product. Closed-form inner products.
pub fn f_n_distance(spectrum: &RitzSpectrum, mode: &ModeSolution) -> Result<f64> {
    let n = mode.n as usize;
    let a = spectrum.a;
    let mu = mode.mu;
    let (parity, js, v) = spectrum
        .coefficients(n)
        .ok_or_else(|| Error::domain(format!("no Ritz vector for n = {n}")))?;
    let expect = if mode.n % 2 == 1 { Parity::Even } else { Parity::Odd };
    if parity != expect {
        // parity mismatch: the distance is at least sqrt(2); report it
        return Ok(std::f64::consts::SQRT_2);
    }
    let (sma, cma) = (mu * a).sin_cos();
    let mut inner = 0.0;
    for (j, c) in js.iter().zip(v) {
        let om = *j as f64 * PI / (2.0 * a);
        let dp = om + mu;
        let dm = om - mu;
        // S1 = ∫₀^{2a} sin(ω y) cos(μ y) dy, S2 = ∫₀^{2a} sin(ω y) sin(μ y) dy,
        // in δ-stable form: (1−cos(2aδ))/δ = 2a·sin(aδ)sinc(aδ),
        //                   sin(2aδ)/δ = 2a·sinc(2aδ)
        let s1 = a * (sma_sq_over(dp, a) + sma_sq_over(dm, a));
        let s2 = a * (sinc(2.0 * a * dm) - sinc(2.0 * a * dp));
        let cj = if mode.n % 2 == 1 {
            (cma * s1 + sma * s2) / a
        } else {
            (cma * s2 - sma * s1) / a
        };
        inner += cj * c;
    }
    let f_norm_sq = if mode.n % 2 == 1 {
        1.0 + (2.0 * mu * a).sin() / (2.0 * mu * a)
    } else {
        1.0 - (2.0 * mu * a).sin() / (2.0 * mu * a)
    };
    let d2 = f_norm_sq + 1.0 - 2.0 * inner.abs();
    Ok(d2.max(0.0).sqrt())
}

/// sin(aδ)·sinc(aδ) = (1 − cos(2aδ))/(2aδ), stable at δ = 0.
fn sma_sq_over(delta: f64, a: f64) -> f64 {
    (a * delta).sin() * sinc(a * delta)
}

/// Richardson extrapolation of Ritz values over doubling basis sizes.
/// Returns (extrapolated value, error bar). The order is fitted from the
/// last consecutive differences; with fewer than three values, or a
/// non-contracting sequence, the last value is returned with a wide bar.
pub fn richardson_extrapolate(values: &[f64]) -> (f64, f64) {
    let len = values.len();
    let last = *values.last().expect("nonempty");
    if len < 3 {
        return (last, values.windows(2).map(|w| (w[0] - w[1]).abs()).sum());
    }
    let d1 = values[len - 3] - values[len - 2];
    let d2 = values[len - 2] - values[len - 1];
    if d2 == 0.0 {
        return (last, d1.abs() * 0.5);
    }
    let r = d1 / d2;
    if !(r > 1.05) {
        return (last, d1.abs() + d2.abs());
    }
    let correction = d2 / (r - 1.0);
    let ext = last - correction;
    let mut bar = 0.05 * correction.abs() + 1e-12;
    if len >= 4 {
        let d0 = values[len - 4] - values[len - 3];
        if d1 != 0.0 && d0 / d1 > 1.05 {
            let ext_prev = values[len - 2] - d1 / (d0 / d1 - 1.0);
            bar = bar.max((ext - ext_prev).abs());
        }
    }
    (ext, bar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn basis_transform_against_numeric_ft() {
        let a = 1.3;
        // deterministic sample of frequencies, including near-resonance ones
        let om3 = 3.0 * PI / (2.0 * a);
        let xis = [
            0.17, 0.9, 2.2, 5.5, om3, om3 + 1e-6, om3 - 0.01, 11.0, -3.3, -om3,
        ];
        for j in [1u32, 2, 3, 6] {
            for &xi in &xis {
                let exact = basis_transform(a, j, xi);
                let omj = j as f64 * PI / (2.0 * a);
                let re = quad::adaptive_breakpoints(
                    &|x: f64| (omj * (x + a)).sin() / a.sqrt() * (xi * x).cos(),
                    &[-a, 0.0, a],
                    Tol::new(1e-12, 1e-14),
                )
                .unwrap()
                .value;
                let im = quad::adaptive_breakpoints(
                    &|x: f64| -(omj * (x + a)).sin() / a.sqrt() * (xi * x).sin(),
                    &[-a, 0.0, a],
                    Tol::new(1e-12, 1e-14),
                )
                .unwrap()
                .value;
                assert!(
                    (exact - Complex64::new(re, im)).norm() < 1e-10,
                    "j={j}, xi={xi}: {exact} vs ({re}, {im})"
                );
            }
        }
    }

    #[test]
    fn basis_transform_symmetries() {
        let a = 0.7;
        for j in [1u32, 2, 5] {
            for xi in [0.3, 1.7, 4.0] {
                let plus = basis_transform(a, j, xi);
                let minus = basis_transform(a, j, -xi);
                assert!((minus - plus.conj()).norm() < 1e-14);
            }
        }
        // zero-frequency value vanishes for odd (in space) modes
        assert!(basis_transform(1.0, 2, 0.0).norm() < 1e-14);
    }

    #[test]
    fn dirichlet_form_matrix_is_diagonal() {
        let spec = BernsteinSpec::power(2.0).unwrap();
        let fm = form_matrix(&spec, 1.0, 4).unwrap();
        let expect = [PI * PI / 4.0, PI * PI, 9.0 * PI * PI / 4.0, 4.0 * PI * PI];
        for j in 1..=4u32 {
            assert_relative_eq!(
                fm.entry(j, j),
                expect[(j - 1) as usize],
                max_relative = 1e-11
            );
        }
        assert_eq!(fm.entry(1, 2), 0.0);
        // same-parity off-diagonal entries vanish for the local operator
        assert!(fm.entry(1, 3).abs() < 1e-9);
        assert!(fm.entry(2, 4).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_quotient_bounds_power1() {
        // M_11 must lie inside the one-eigenvalue sandwich [psi(w^2)/2, psi(w^2)]
        let spec = BernsteinSpec::power(1.0).unwrap();
        let fm = form_matrix(&spec, 1.0, 2).unwrap();
        let m11 = fm.entry(1, 1);
        assert!(m11 >= 0.5 * (PI / 2.0) && m11 <= PI / 2.0, "M11 = {m11}");
    }

    #[test]
    fn dirichlet_spectrum_exact() {
        let spec = BernsteinSpec::power(2.0).unwrap();
        let sp = spectrum(&spec, 1.0, 8).unwrap();
        for n in 1..=8usize {
            let exact = (n as f64 * PI / 2.0).powi(2);
            assert_relative_eq!(sp.lambda(n), exact, max_relative = 1e-10);
            let expect = if n % 2 == 1 { Parity::Even } else { Parity::Odd };
            assert_eq!(sp.pairs[n - 1].parity, expect, "parity at n = {n}");
        }
    }

    #[test]
    fn sandwich_and_nesting_power1() {
        let spec = BernsteinSpec::power(1.0).unwrap();
        let s128 = spectrum_values(&spec, 1.0, 128).unwrap();
        let s256 = spectrum_values(&spec, 1.0, 256).unwrap();
        for n in 1..=64usize {
            let om = n as f64 * PI / 2.0;
            let lam = s256.lambda(n);
            assert!(lam >= 0.5 * om, "CS lower bound at n = {n}");
            // nesting: larger basis can only lower each Ritz value
            assert!(
                s256.lambda(n) <= s128.lambda(n) + 1e-12,
                "nesting at n = {n}"
            );
        }
        // lambda_1 in [pi/4, pi/2]
        let l1 = s256.lambda(1);
        assert!(l1 >= PI / 4.0 && l1 <= PI / 2.0, "lambda_1 = {l1}");
    }

    #[test]
    fn trace_check_dirichlet_closed_form() {
        let spec = BernsteinSpec::power(2.0).unwrap();
        let sp = spectrum_values(&spec, 1.0, 64).unwrap();
        let tc = trace_check(&spec, 1.0, 1.0, &sp).unwrap();
        let exact_lhs: f64 = (1..=64)
            .map(|n| (-(n as f64 * PI / 2.0).powi(2)).exp())
            .sum();
        assert_relative_eq!(tc.lhs, exact_lhs, max_relative = 1e-9);
        // rhs = (2/pi) ∫ e^{-xi^2} = 1/sqrt(pi)
        assert_relative_eq!(tc.rhs, 1.0 / PI.sqrt(), max_relative = 1e-10);
        assert!(tc.ok);
    }

    #[test]
    fn compare_dirichlet_gaps_vanish() {
        let spec = BernsteinSpec::power(2.0).unwrap();
        let sp = spectrum_values(&spec, 1.0, 64).unwrap();
        let modes = crate::modes::mode_table(&spec, 1.0, 32).unwrap();
        let rows = compare(&spec, &sp, &modes, None).unwrap();
        for row in rows {
            assert!(
                row.gap.abs() <= 1e-9 * row.lambda_tilde.max(1.0),
                "n = {}: gap = {}",
                row.n,
                row.gap
            );
            assert!(row.cs_lower_ok);
            assert!(row.cs_upper_ratio <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn f_n_distance_dirichlet_is_zero() {
        // for the local operator f_n IS the basis mode: distance ~ 0
        let spec = BernsteinSpec::power(2.0).unwrap();
        let sp = spectrum(&spec, 1.0, 16).unwrap();
        let modes = crate::modes::mode_table(&spec, 1.0, 6).unwrap();
        for m in &modes {
            let d = f_n_distance(&sp, m).unwrap();
            assert!(d < 1e-7, "n = {}: distance = {d}", m.n);
        }
    }

    #[test]
    fn richardson_on_synthetic_sequence() {
        // lambda_N = 2 + 3/N over N = 512, 1024, 2048, 4096
        let vals: Vec<f64> = [512.0, 1024.0, 2048.0, 4096.0]
            .iter()
            .map(|n| 2.0 + 3.0 / n)
            .collect();
        let (ext, bar) = richardson_extrapolate(&vals);
        assert!((ext - 2.0).abs() < 1e-9, "ext = {ext}");
        assert!(bar < 1e-3);
    }
}
