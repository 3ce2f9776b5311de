//! Dyadic-density intervals: pieces of the parameter line on which the
//! affine arclength density is nearly constant, graded by density mass in
//! powers of two. These are the localization targets for the chip
//! decomposition.

use crate::curves::{CurveJet, PolynomialCurve};
use crate::error::{Error, Result};

/// Sample count used to certify density comparability on an interval.
pub const COMPARABILITY_SAMPLES: usize = 33;

/// An interval [a, b] with λ_γ ∈ [c/2, 2c] throughout (equivalently
/// max λ / min λ ≤ 4, with c the geometric mean of the extremes) and
/// c·(b−a) ∈ [2^{m−1}, 2^{m+1}], so the λ-mass of the interval is
/// comparable to 2^m.
#[derive(Debug, Clone)]
pub struct DyadicInterval {
    a: f64,
    b: f64,
    level: i32,
    density_constant: f64,
}

/// Min and max of λ_γ over an evenly spaced sample of [a, b].
fn density_extremes(jet: &CurveJet, a: f64, b: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..COMPARABILITY_SAMPLES {
        let t = a + (b - a) * i as f64 / (COMPARABILITY_SAMPLES - 1) as f64;
        let l = jet.density(t);
        lo = lo.min(l);
        hi = hi.max(l);
    }
    (lo, hi)
}

impl DyadicInterval {
    pub fn new(curve: &PolynomialCurve, a: f64, b: f64, level: i32) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::invalid("dyadic interval needs finite a < b"));
        }
        let jet = CurveJet::new(curve);
        let (lo, hi) = density_extremes(&jet, a, b);
        if lo <= 0.0 {
            return Err(Error::invalid(format!(
                "density vanishes on [{a}, {b}]; no comparability constant exists"
            )));
        }
        if hi > 4.0 * lo * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "density varies by {:.3} > 4 on [{a}, {b}]",
                hi / lo
            )));
        }
        let c = (lo * hi).sqrt();
        let mass_scale = c * (b - a);
        let lo_bound = (level - 1) as f64;
        let hi_bound = (level + 1) as f64;
        let log_mass = mass_scale.log2();
        if log_mass < lo_bound - 1e-12 || log_mass > hi_bound + 1e-12 {
            return Err(Error::invalid(format!(
                "c·|I| = {mass_scale:.6e} is outside [2^{}, 2^{}]",
                level - 1,
                level + 1
            )));
        }
        Ok(DyadicInterval {
            a,
            b,
            level,
            density_constant: c,
        })
    }

    /// Same interval re-graded at the dyadic level nearest its actual mass
    /// scale, which always satisfies the level invariant.
    pub fn from_endpoints(curve: &PolynomialCurve, a: f64, b: f64) -> Result<Self> {
        let jet = CurveJet::new(curve);
        let (lo, hi) = density_extremes(&jet, a, b);
        if lo <= 0.0 {
            return Err(Error::invalid("density vanishes on the interval"));
        }
        let c = (lo * hi).sqrt();
        let level = (c * (b - a)).log2().round() as i32;
        DyadicInterval::new(curve, a, b, level)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn density_constant(&self) -> f64 {
        self.density_constant
    }
}

/// Trapezoid value of ∫_a^b λ_γ dt on `samples` nodes.
pub fn lambda_mass(curve: &PolynomialCurve, a: f64, b: f64, samples: usize) -> f64 {
    let jet = CurveJet::new(curve);
    let n = samples.max(2);
    let h = (b - a) / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let t = a + h * i as f64;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += w * jet.density(t);
    }
    acc * h
}

/// All level-`m` intervals found by a deterministic left-to-right sweep over
/// a uniform endpoint lattice: from the current left endpoint, the admissible
/// right endpoint whose mass scale is closest to 2^m (ties toward shorter) is
/// emitted and the sweep continues from it; when no right endpoint is
/// admissible the left endpoint slides one lattice step. An empty result
/// means no interval at this level fits, which is a valid outcome.
pub fn enumerate_intervals(
    curve: &PolynomialCurve,
    domain: (f64, f64),
    level: i32,
    step: f64,
) -> Result<Vec<DyadicInterval>> {
    let (a, b) = domain;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::invalid("interval sweep needs a finite domain"));
    }
    if !(step > 0.0 && step.is_finite() && step <= b - a) {
        return Err(Error::invalid("lattice step must be positive and fit the domain"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    let lattice: Vec<f64> = (0..=count).map(|i| a + step * i as f64).collect();
    let target = level as f64;
    let mut out = Vec::new();
    let mut left = 0usize;
    while left < count {
        let mut best: Option<(usize, f64)> = None;
        for right in left + 1..=count {
            if let Ok(interval) = DyadicInterval::new(curve, lattice[left], lattice[right], level)
            {
                let log_mass = (interval.density_constant() * interval.length()).log2();
                let off = (log_mass - target).abs();
                if best.map_or(true, |(_, b_off)| off < b_off) {
                    best = Some((right, off));
                }
            }
        }
        match best {
            Some((right, _)) => {
                out.push(DyadicInterval::new(
                    curve,
                    lattice[left],
                    lattice[right],
                    level,
                )?);
                left = right;
            }
            None => left += 1,
        }
    }
    Ok(out)
}
