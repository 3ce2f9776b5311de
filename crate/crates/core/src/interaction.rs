//! Two-amplitude interaction functionals.
//!
//! `psi` averages |1 + e^{iθ}t|^q over the circle and normalizes by
//! (1 + t^p)^{q/p}; its maximum over t ∈ [0,1] controls how much two
//! antipodal bumps can reinforce each other. `theta_average` is the same
//! circle average applied pointwise to a pair of fields, the limit object for
//! `drifting_norm`, which evaluates ‖F + e^{i D_λ x·v} G‖_q^q at a finite
//! drift λ. `conc_factor` packages the parity-dependent concentration gain
//! and `equality_case` tests pointwise proportionality of two field moduli.
//!
//! All circle quadratures are periodic trapezoid sums doubled until stable,
//! which converges geometrically for these integrands.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::curves::Parity;
use crate::error::{ensure_finite, Error, Result};
use crate::extension::field::Field;

const CIRCLE_START: usize = 32;
const CIRCLE_CAP: usize = 1 << 16;
const CIRCLE_RTOL: f64 = 1e-13;

/// Periodic trapezoid average (1/2π)∫₀^{2π} f dθ, doubling node counts until
/// two refinements agree to `rtol` relatively.
fn circle_mean(f: impl Fn(f64) -> f64, rtol: f64, what: &str) -> Result<f64> {
    let sum = |n: usize| -> f64 {
        (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).sum::<f64>() / n as f64
    };
    let mut n = CIRCLE_START;
    let mut prev = sum(n);
    while n < CIRCLE_CAP {
        n *= 2;
        let cur = sum(n);
        if (cur - prev).abs() <= rtol * cur.abs().max(1.0) {
            return ensure_finite(cur, what);
        }
        prev = cur;
    }
    Err(Error::invalid(format!(
        "{what}: circle quadrature did not stabilize at {CIRCLE_CAP} nodes"
    )))
}

/// Best-effort variant for inner loops: doubles until `rtol` or the cap and
/// returns the finest sum. Used per grid point where the integrand is an
/// entire function of cos θ and convergence is guaranteed in practice.
fn circle_mean_fast(a: f64, b: f64, half_q: f64) -> f64 {
    let f = |theta: f64| (a + b * theta.cos()).max(0.0).powf(half_q);
    let sum = |n: usize| -> f64 {
        (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).sum::<f64>() / n as f64
    };
    let mut n = CIRCLE_START;
    let mut prev = sum(n);
    while n < 8192 {
        n *= 2;
        let cur = sum(n);
        if (cur - prev).abs() <= 1e-12 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() || !(q > 1.0) || !q.is_finite() {
        return Err(Error::invalid("exponents must satisfy 1 < p, q < infinity"));
    }
    Ok(())
}

/// ψ_{p,q}(t) = [(1/2π)∫₀^{2π} |1 + e^{iθ} t|^q dθ] · (1 + t^p)^{−q/p}.
pub fn psi(p: f64, q: f64, t: f64) -> Result<f64> {
    check_exponents(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!(
            "psi amplitude ratio t = {t} outside [0,1]"
        )));
    }
    let avg = circle_mean(
        |theta| (1.0 + 2.0 * t * theta.cos() + t * t).max(0.0).powf(0.5 * q),
        CIRCLE_RTOL,
        "psi",
    )?;
    Ok(avg * (1.0 + t.powf(p)).powf(-q / p))
}

/// Maximum of ψ_{p,q} over [0,1] with its maximizer.
#[derive(Debug, Clone, Copy)]
pub struct InteractionResult {
    /// ψ evaluated at the reported maximizer.
    pub psi_value: f64,
    /// Maximizing amplitude ratio α ∈ [0,1], ties broken toward larger t.
    pub argmax_alpha: f64,
    /// Ψ_{p,q} = sup over [0,1]; equals `psi_value` up to refinement error.
    pub psi_max: f64,
}

pub fn psi_max(p: f64, q: f64) -> Result<InteractionResult> {
    psi_max_with_grid(p, q, 2001)
}

/// Dense grid scan followed by golden-section refinement around the grid
/// argmax. A `>=` comparison during the scan breaks exact ties toward the
/// larger t, as does the final comparison against the bracket endpoints.
pub fn psi_max_with_grid(p: f64, q: f64, grid_points: usize) -> Result<InteractionResult> {
    check_exponents(p, q)?;
    if grid_points < 3 {
        return Err(Error::invalid("psi_max needs at least 3 grid points"));
    }
    let n = grid_points;
    let t_at = |i: usize| i as f64 / (n - 1) as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let v = psi(p, q, t_at(i))?;
        if v >= best_v {
            best_v = v;
            best_i = i;
        }
        values.push(v);
    }
    let lo = t_at(best_i.saturating_sub(1));
    let hi = t_at((best_i + 1).min(n - 1));

    // Golden-section search for the maximum on [lo, hi].
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = psi(p, q, c)?;
    let mut fd = psi(p, q, d)?;
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = psi(p, q, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = psi(p, q, d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let fmid = psi(p, q, mid)?;
    // Ascending candidate order plus >= keeps ties on the larger t.
    let mut alpha = lo;
    let mut value = values[best_i.saturating_sub(1)];
    for (t, v) in [(mid, fmid), (hi, psi(p, q, hi)?)] {
        if v >= value {
            value = v;
            alpha = t;
        }
    }
    let psi_max = value.max(best_v);
    Ok(InteractionResult {
        psi_value: value,
        argmax_alpha: alpha,
        psi_max,
    })
}

fn require_same_grid(f: &Field, g: &Field, what: &str) -> Result<()> {
    if f.spec() != g.spec() {
        return Err(Error::GridMismatch(format!("{what}: fields on different grids")));
    }
    Ok(())
}

/// (1/2π)∫₀^{2π} ‖F + e^{iθ}G‖_{L^q}^q dθ.
///
/// Pointwise |F + e^{iθ}G|^q depends on θ only through (|F|² + |G|² +
/// 2|F||G| cos θ)^{q/2}, so the θ-average reduces to one circle quadrature
/// per grid point.
pub fn theta_average(f: &Field, g: &Field, q: f64) -> Result<f64> {
    require_same_grid(f, g, "theta_average")?;
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::invalid("theta_average requires finite q > 1"));
    }
    let spec = f.spec();
    let means: Vec<f64> = (0..spec.num_points())
        .into_par_iter()
        .map(|i| {
            let fa = f.values()[i].norm();
            let ga = g.values()[i].norm();
            if fa == 0.0 && ga == 0.0 {
                return 0.0;
            }
            circle_mean_fast(fa * fa + ga * ga, 2.0 * fa * ga, 0.5 * q)
        })
        .collect();
    let mut total = 0.0;
    for (i, m) in means.iter().enumerate() {
        total += spec.weight(i) * m;
    }
    ensure_finite(total, "theta_average")
}

/// Fraction of a circle completed per grid cell: π/4 is the default guard.
pub const DRIFT_PHASE_GUARD: f64 = PI / 4.0;

/// Cycles the drift phase must complete across the box before the averaged
/// regime is considered reached.
pub const DRIFT_MIN_CYCLES: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct DriftSample {
    pub lambda: f64,
    /// ‖F + e^{i ξ·x} G‖_q^q with ξ_j = λ^{l_j} v_j.
    pub qth_power: f64,
    /// Phase per grid cell exceeded π/4 somewhere, so the sample aliases.
    pub aliased: bool,
    /// max_j |ξ_j| L_j / 2π, full phase cycles across the box extent.
    pub cycles: f64,
}

/// ‖F(x) + e^{i (D_λ x)·v} G(x)‖_{L^q}^q where (D_λ x)_j = λ^{l_j} x_j.
pub fn drifting_norm(
    f: &Field,
    g: &Field,
    v: &[f64],
    ell: &[f64],
    lambda: f64,
    q: f64,
) -> Result<DriftSample> {
    require_same_grid(f, g, "drifting_norm")?;
    let spec = f.spec();
    let d = spec.dimension();
    if v.len() != d || ell.len() != d {
        return Err(Error::invalid("drift velocity and exponents must match dimension"));
    }
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid("drift velocity must be nonzero"));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("drift scale must be positive and finite"));
    }
    let xi: Vec<f64> = (0..d).map(|j| lambda.powf(ell[j]) * v[j]).collect();

    let mut max_cell_phase = 0.0f64;
    let mut cycles = 0.0f64;
    for j in 0..d {
        let (a, b) = spec.intervals()[j];
        max_cell_phase = max_cell_phase.max(xi[j].abs() * spec.step(j));
        cycles = cycles.max(xi[j].abs() * (b - a) / (2.0 * PI));
    }

    let values: Vec<_> = (0..spec.num_points())
        .into_par_iter()
        .map(|flat| {
            let mut x = [0.0f64; 3];
            spec.point(flat, &mut x[..d]);
            let phase: f64 = (0..d).map(|j| xi[j] * x[j]).sum();
            let (s, c) = phase.sin_cos();
            f.values()[flat] + g.values()[flat] * num_complex::Complex64::new(c, s)
        })
        .collect();
    let field = Field::new(spec.clone(), values)?;
    let report = field.lq_norm(q)?;
    Ok(DriftSample {
        lambda,
        qth_power: report.qth_power,
        aliased: max_cell_phase >= DRIFT_PHASE_GUARD,
        cycles,
    })
}

#[derive(Debug, Clone)]
pub struct DriftReport {
    pub samples: Vec<DriftSample>,
    /// The averaging limit these samples approach.
    pub theta_average: f64,
    /// Mean q-th power over unaliased samples with enough cycles, if any.
    pub settled_mean: Option<f64>,
}

/// Runs λ over a geometric schedule and reports convergence material.
pub fn drift_schedule(
    f: &Field,
    g: &Field,
    v: &[f64],
    ell: &[f64],
    lambda0: f64,
    ratio: f64,
    steps: usize,
    q: f64,
) -> Result<DriftReport> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::invalid("drift schedule ratio must exceed 1"));
    }
    if steps == 0 {
        return Err(Error::invalid("drift schedule needs at least one step"));
    }
    let mut samples = Vec::with_capacity(steps);
    let mut lambda = lambda0;
    for _ in 0..steps {
        samples.push(drifting_norm(f, g, v, ell, lambda, q)?);
        lambda *= ratio;
    }
    let theta = theta_average(f, g, q)?;
    let settled: Vec<f64> = samples
        .iter()
        .filter(|s| !s.aliased && s.cycles >= DRIFT_MIN_CYCLES)
        .map(|s| s.qth_power)
        .collect();
    let settled_mean = if settled.is_empty() {
        None
    } else {
        Some(settled.iter().sum::<f64>() / settled.len() as f64)
    };
    Ok(DriftReport {
        samples,
        theta_average: theta,
        settled_mean,
    })
}

/// Concentration gain over the single-bump constant: Ψ_{p,q}^{1/q} when every
/// exponent is odd, 2^{1/p′} when every exponent is even, 1 otherwise.
pub fn conc_factor(parity: Parity, p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    match parity {
        Parity::Odd => Ok(psi_max(p, q)?.psi_max.powf(1.0 / q)),
        Parity::Even => Ok(2.0f64.powf(1.0 - 1.0 / p)),
        Parity::Neither => Ok(1.0),
    }
}

/// Which modulus is expressed as α times the other (α ∈ [0,1]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProportionalityOrientation {
    /// |G| = α |F|.
    GAlphaF,
    /// |F| = α |G|.
    FAlphaG,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proportionality {
    Proportional {
        alpha: f64,
        orientation: ProportionalityOrientation,
        max_rel_dev: f64,
    },
    NotProportional {
        max_rel_dev: f64,
    },
    /// Both fields vanish identically; proportionality is undefined.
    Indeterminate,
}

/// Floor below which grid values are treated as numerical zeros.
pub const EQUALITY_FLOOR: f64 = 1e-9;

/// Tests whether |F| and |G| are pointwise proportional on the grid.
///
/// A least-squares α is fit over points where both moduli exceed
/// `EQUALITY_FLOOR` times the overall scale; the deviation is then measured
/// over every point where either modulus is above the floor, so mass outside
/// the common support counts against proportionality.
pub fn equality_case(f: &Field, g: &Field, alpha_tol: f64) -> Result<Proportionality> {
    require_same_grid(f, g, "equality_case")?;
    if !(alpha_tol > 0.0) || !alpha_tol.is_finite() {
        return Err(Error::invalid("equality tolerance must be positive"));
    }
    let spec = f.spec();
    let n = spec.num_points();
    let fa: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let ga: Vec<f64> = g.values().iter().map(|v| v.norm()).collect();
    let scale = fa
        .iter()
        .chain(ga.iter())
        .fold(0.0f64, |acc, &v| acc.max(v));
    if scale == 0.0 {
        return Ok(Proportionality::Indeterminate);
    }
    let floor = EQUALITY_FLOOR * scale;

    let mut sff = 0.0;
    let mut sgg = 0.0;
    let mut sfg = 0.0;
    let mut any_joint = false;
    for i in 0..n {
        if fa[i] > floor && ga[i] > floor {
            let w = spec.weight(i);
            sff += w * fa[i] * fa[i];
            sgg += w * ga[i] * ga[i];
            sfg += w * fa[i] * ga[i];
            any_joint = true;
        }
    }
    if !any_joint {
        return Ok(Proportionality::NotProportional { max_rel_dev: 1.0 });
    }

    // Orient so the smaller-energy side carries α ∈ [0,1]; Cauchy-Schwarz
    // then guarantees the fitted α stays within [0,1].
    let (orientation, alpha) = if sgg <= sff {
        (ProportionalityOrientation::GAlphaF, sfg / sff)
    } else {
        (ProportionalityOrientation::FAlphaG, sfg / sgg)
    };

    let mut max_dev = 0.0f64;
    let mut dev_scale = 0.0f64;
    for i in 0..n {
        if fa[i] <= floor && ga[i] <= floor {
            continue;
        }
        let (lhs, rhs) = match orientation {
            ProportionalityOrientation::GAlphaF => (ga[i], alpha * fa[i]),
            ProportionalityOrientation::FAlphaG => (fa[i], alpha * ga[i]),
        };
        max_dev = max_dev.max((lhs - rhs).abs());
        dev_scale = dev_scale.max(lhs.max(rhs));
    }
    let max_rel_dev = max_dev / dev_scale.max(f64::MIN_POSITIVE);
    if max_rel_dev <= alpha_tol {
        Ok(Proportionality::Proportional {
            alpha,
            orientation,
            max_rel_dev,
        })
    } else {
        Ok(Proportionality::NotProportional { max_rel_dev })
    }
}
