use std::collections::BinaryHeap;

use jdoi_core::jumps::MixedExpJump;

use crate::{OracleError, Result};

/// Tolerances of the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-11, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(OracleError::InvalidSpec("tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(OracleError::InvalidSpec("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
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
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Gauss–Kronrod (7/15) panel with the QUADPACK error heuristic, which
/// inflates `|K − G|` for rough integrands so kinks are not missed.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    fv[7] = f(c);
    for (i, &x) in XGK.iter().take(7).enumerate() {
        fv[i] = f(c - h * x);
        fv[14 - i] = f(c + h * x);
    }
    let weight = |i: usize| WGK[if i <= 7 { i } else { 14 - i }];
    let kronrod: f64 = (0..15).map(|i| weight(i) * fv[i]).sum();
    let gauss = WG[3] * fv[7] + (0..3).map(|j| WG[j] * (fv[2 * j + 1] + fv[13 - 2 * j])).sum::<f64>();
    let abs: f64 = (0..15).map(|i| weight(i) * fv[i].abs()).sum();
    let mean = 0.5 * kronrod;
    let asc: f64 = (0..15).map(|i| weight(i) * (fv[i] - mean).abs()).sum();

    let h = h.abs();
    let (abs, asc) = (abs * h, asc * h);
    let mut err = ((kronrod - gauss) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs);
    }
    (kronrod * (b - a) * 0.5, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over the finite
/// interval `[a, b]`, bisecting the piece with the largest error estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.check()?;
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::from([Piece { a, b, value, error }]);
    let (mut total, mut total_err) = (value, error);
    let mut subdivisions = 0;
    while !(total_err <= spec.abs_tol.max(spec.rel_tol * total.abs())) {
        if subdivisions >= spec.max_subdivisions || !total_err.is_finite() {
            return Err(OracleError::NoConvergence { estimate: total, error: total_err, subdivisions });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
        // Fresh sums: running updates cancel badly when one piece dominates.
        total = heap.iter().map(|p| p.value).sum();
        total_err = heap.iter().map(|p| p.error).sum();
    }
    Ok(total)
}

/// Mixed-exponential density, written out from the component list.
pub fn mixture_density(jumps: &MixedExpJump, y: f64) -> f64 {
    if y >= 0.0 {
        jumps.p_up * jumps.up.iter().map(|c| c.weight * c.rate * (-c.rate * y).exp()).sum::<f64>()
    } else {
        (1.0 - jumps.p_up) * jumps.down.iter().map(|c| c.weight * c.rate * (c.rate * y).exp()).sum::<f64>()
    }
}

/// Truncation points `(lo, hi)` beyond which the mass of each side of the
/// mixture, bounded by `Σ|w|·e^{-min rate·|y|}`, falls below `abs_tol / 10`.
pub fn tail_cutoffs(jumps: &MixedExpJump, abs_tol: f64) -> (f64, f64) {
    let cut = |branch_mass: f64, comps: &[jdoi_core::jumps::ExpComponent]| {
        let w: f64 = comps.iter().map(|c| c.weight.abs()).sum::<f64>() * branch_mass;
        let rate = comps.iter().map(|c| c.rate).fold(f64::INFINITY, f64::min);
        if w <= 0.0 || !rate.is_finite() {
            return 0.0;
        }
        ((10.0 * w / abs_tol).ln() / rate).max(0.0)
    };
    (-cut(1.0 - jumps.p_up, &jumps.down), cut(jumps.p_up, &jumps.up))
}

/// [`integrate`] over `[a, b]` split at the interior points of `breaks`, with
/// the absolute tolerance shared evenly between the pieces.
pub fn integrate_with_breaks(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.insert(0, a);
    points.push(b);
    let piece = QuadratureSpec { abs_tol: spec.abs_tol / (points.len() - 1) as f64, ..*spec };
    points.windows(2).map(|w| integrate(&f, w[0], w[1], &piece)).sum()
}

/// `∫ valuation(s·e^y) φ(y) dy` by adaptive quadrature, truncated at
/// [`tail_cutoffs`] and split at the density kink `y = 0` and at each spot
/// level in `kinks` where the valuation is not smooth.
pub fn quad_jump_integral(
    valuation: impl Fn(f64) -> f64,
    s: f64,
    kinks: &[f64],
    jumps: &MixedExpJump,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (lo, hi) = tail_cutoffs(jumps, spec.abs_tol);
    let mut breaks: Vec<f64> = kinks.iter().map(|k| (k / s).ln()).collect();
    breaks.push(0.0);
    let f = |y: f64| valuation(s * y.exp()) * mixture_density(jumps, y);
    integrate_with_breaks(f, lo, hi, &breaks, spec)
}

const Z_MAX: f64 = 12.0;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[payoff(S_τ)]` for `S_τ = s·exp((carry − σ²/2)τ + σ√τ Z)`, integrating
/// over `Z ∈ [−12, 12]` split at the spot levels in `kinks`. Discounting is
/// left to the caller.
#[allow(clippy::too_many_arguments)]
pub fn lognormal_expectation(
    payoff: impl Fn(f64) -> f64,
    s: f64,
    carry: f64,
    vol: f64,
    tau: f64,
    kinks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mean = (carry - 0.5 * vol * vol) * tau;
    let sd = vol * tau.sqrt();
    let breaks: Vec<f64> = kinks.iter().map(|k| ((k / s).ln() - mean) / sd).collect();
    let f = |z: f64| payoff(s * (mean + sd * z).exp()) * std_normal_pdf(z);
    integrate_with_breaks(f, -Z_MAX, Z_MAX, &breaks, spec)
}

/// Like [`lognormal_expectation`] but only over paths that never touch the
/// upper barrier `h` during `[0, τ]` under continuous monitoring. Uses the
/// method of images for Brownian motion with drift killed at `ln(h/s)`.
#[allow(clippy::too_many_arguments)]
pub fn killed_lognormal_expectation(
    payoff: impl Fn(f64) -> f64,
    s: f64,
    carry: f64,
    vol: f64,
    tau: f64,
    h: f64,
    kinks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if s >= h {
        return Ok(0.0);
    }
    let mu = carry - 0.5 * vol * vol;
    let mean = mu * tau;
    let sd = vol * tau.sqrt();
    let b = (h / s).ln();
    let image = (2.0 * mu * b / (vol * vol)).exp();
    let density = |x: f64| {
        let z = (x - mean) / sd;
        let zi = (x - 2.0 * b - mean) / sd;
        (std_normal_pdf(z) - image * std_normal_pdf(zi)) / sd
    };
    let breaks: Vec<f64> = kinks.iter().map(|k| (k / s).ln()).collect();
    let lo = mean - Z_MAX * sd;
    integrate_with_breaks(|x| payoff(s * x.exp()) * density(x), lo.min(b), b, &breaks, spec)
}
