//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre panel rules.
//!
//! The adaptive driver is the usual QUADPACK scheme: 15-point Kronrod with
//! embedded 7-point Gauss on every segment, bisect the segment with the
//! largest rescaled error until the global tolerance is met. Segments that
//! shrink to machine width are frozen instead of looping forever, which is
//! what makes mild endpoint singularities (z^α, log z) safe to integrate
//! directly.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

/// 15-point Kronrod abscissae on [0, 1] side (QUADPACK `dqk15`).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Embedded 7-point Gauss weights (odd-index abscissae plus centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Relative/absolute tolerance pair for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rel: 1e-10,
            abs: 1e-14,
        }
    }
}

impl Tol {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tol { rel, abs }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// QUADPACK error rescaling: sharpens the raw |K - G| estimate using the
/// deviation-from-mean resolvent `res_asc`.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod evaluation on [a, b]; returns (integral, error).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gk15_full(f, a, b);
    (v, e)
}

/// As [`gk15`], additionally returning ∫|f| for noise-floor bookkeeping.
fn gk15_full<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        resk += WGK[j] * fsum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }

    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let value = resk * half;
    let err = rescale_error((resk - resg) * half, resabs * half.abs(), resasc * half.abs());
    (value, err, resabs * half.abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
    frozen: bool,
}

impl Segment {
    /// Error at the rounding-noise floor: no bisection can improve it.
    fn at_noise_floor(&self) -> bool {
        self.error <= 60.0 * f64::EPSILON * self.resabs
    }
}

const MAX_SEGMENTS: usize = 20_000;

/// Adaptive integration of `f` over [a, b].
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tol) -> Result<Quadrature> {
    adaptive_breakpoints(f, &[a, b], tol)
}

/// Adaptive integration over [pts[0], pts[last]] with forced subdivision at
/// the interior breakpoints.
pub fn adaptive_breakpoints<F: Fn(f64) -> f64>(f: &F, pts: &[f64], tol: Tol) -> Result<Quadrature> {
    assert!(pts.len() >= 2);
    let mut segs: Vec<Segment> = Vec::with_capacity(64);
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e, ra) = gk15_full(f, w[0], w[1]);
        segs.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            resabs: ra,
            frozen: false,
        });
    }
    if segs.is_empty() {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }

    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let toterr: f64 = segs.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * total.abs());
        if toterr <= target {
            return Ok(Quadrature {
                value: total,
                error: toterr,
            });
        }
        // worst refinable segment
        let mut worst: Option<usize> = None;
        let mut werr = 0.0;
        for (i, s) in segs.iter().enumerate() {
            if s.frozen || s.at_noise_floor() {
                continue;
            }
            if s.error > werr {
                werr = s.error;
                worst = Some(i);
            }
        }
        let Some(i) = worst else {
            // every segment is frozen or at the rounding floor
            let floor: f64 = segs.iter().map(|s| 60.0 * f64::EPSILON * s.resabs).sum();
            if toterr <= (100.0 * target).max(4.0 * floor) {
                return Ok(Quadrature {
                    value: total,
                    error: toterr,
                });
            }
            return Err(Error::numeric(
                "quad",
                format!("adaptive quadrature stalled: residual {toterr:.3e} > target {target:.3e}"),
            ));
        };
        let (a_i, b_i) = (segs[i].a, segs[i].b);
        let mid = 0.5 * (a_i + b_i);
        if !(a_i < mid && mid < b_i) || (b_i - a_i) < 4.0 * f64::EPSILON * (a_i.abs() + b_i.abs() + 1e-300) {
            segs[i].frozen = true;
            continue;
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::numeric(
                "quad",
                format!(
                    "adaptive quadrature exceeded {MAX_SEGMENTS} segments: residual {toterr:.3e}"
                ),
            ));
        }
        let (v1, e1, r1) = gk15_full(f, a_i, mid);
        let (v2, e2, r2) = gk15_full(f, mid, b_i);
        segs[i] = Segment {
            a: a_i,
            b: mid,
            value: v1,
            error: e1,
            resabs: r1,
            frozen: false,
        };
        segs.push(Segment {
            a: mid,
            b: b_i,
            value: v2,
            error: e2,
            resabs: r2,
            frozen: false,
        });
    }
}

/// Complex-valued variant of [`adaptive_breakpoints`]; the error metric is the
/// modulus of the Kronrod/Gauss defect.
pub fn adaptive_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    pts: &[f64],
    tol: Tol,
) -> Result<(Complex64, f64)> {
    let re = adaptive_breakpoints(&|x| f(x).re, pts, tol)?;
    let im = adaptive_breakpoints(&|x| f(x).im, pts, tol)?;
    Ok((
        Complex64::new(re.value, im.value),
        re.error.hypot(im.error),
    ))
}

/// The 15 Kronrod nodes and weights mapped onto [a, b], ordered left to
/// right. Used by panel caches that store integrand values for reuse under
/// different exponential weights.
pub(crate) fn gk15_nodes(a: f64, b: f64) -> ([f64; 15], [f64; 15]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut xs = [0.0; 15];
    let mut ws = [0.0; 15];
    for j in 0..7 {
        xs[j] = c - h * XGK[j];
        xs[14 - j] = c + h * XGK[j];
        ws[j] = WGK[j] * h;
        ws[14 - j] = WGK[j] * h;
    }
    xs[7] = c;
    ws[7] = WGK[7] * h;
    (xs, ws)
}

/// Embedded 7-point Gauss weights for the node layout of [`gk15_nodes`];
/// zero at Kronrod-only nodes.
pub(crate) fn g7_weights(a: f64, b: f64) -> [f64; 15] {
    let h = 0.5 * (b - a);
    let mut ws = [0.0; 15];
    for j in 0..7 {
        if j % 2 == 1 {
            ws[j] = WG[j / 2] * h;
            ws[14 - j] = WG[j / 2] * h;
        }
    }
    ws[7] = WG[3] * h;
    ws
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
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
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 15-point Gauss–Legendre rule used by the fixed panel schemes.
pub fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(15))
}

/// Sum of `w_i * f(x_i)` for the GL15 rule mapped onto [a, b].
pub fn gl15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl15();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}
