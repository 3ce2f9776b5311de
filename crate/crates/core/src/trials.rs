//! Concentrating two-bump trial families and their δ-scans.
//!
//! A trial places a bump δ^{−1/p} f((t−1)/δ) at t = 1 and, depending on the
//! curve's parity class, a partner bump at t = −1: the reflected copy for
//! even exponents, α · conj(g)(−(t+1)/δ) for odd exponents, nothing
//! otherwise. As δ → 0 the Rayleigh ratio of the trial approaches a
//! parity-dependent multiple of the moment-curve ratio of f.
//!
//! The scan evaluates each δ-row in the blown-up frame y = D_δ T(1)^t x,
//! where the change of variables is exact: the ratio over a fixed y-box
//! equals the original-frame ratio over the transported box, the bump
//! profiles stay O(1), and all δ-dependence sits in the rescaled curves
//! γ_(±1,δ) and an explicit cross phase 2 y·ξ_δ. Only that cross phase can
//! alias on the grid, so only odd-parity rows carry an aliasing flag.

use num_complex::Complex64;

use crate::curves::{
    affine_density, moment_dilation, pseudo_rescale, torsion_matrix, MonomialCurve, Parity,
    PolynomialCurve, ScalingPair,
};
use crate::error::{ensure_finite, Error, Result};
use crate::extension::field::{BoxSpec, Field};
use crate::extension::profile::Profile;
use crate::extension::{extend, extend_at_points, lp_lambda_norm, Point};
use crate::interaction::theta_average;

/// Minimum quadrature nodes per bump after truncation.
pub const MIN_BUMP_NODES: usize = 64;

/// Jittered copies of each δ averaged in the odd case: δ·(1 + j/100).
pub const JITTER_COUNT: usize = 4;

/// Cross-phase advance per grid cell beyond which a row is flagged aliased.
/// This is the Nyquist limit; the π/4 guard used for drifting norms would
/// reject every δ small enough to be in the asymptotic regime here.
pub const SCAN_PHASE_GUARD: f64 = std::f64::consts::PI;

/// Ingredients of a concentrating trial at scale δ.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    base_profile: Profile,
    partner_profile: Option<Profile>,
    alpha: f64,
    delta: f64,
    truncation: f64,
}

impl TrialSpec {
    pub fn new(
        base_profile: Profile,
        partner_profile: Option<Profile>,
        alpha: f64,
        delta: f64,
        truncation: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid("trial alpha must lie in [0,1]"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("trial delta must be positive and finite"));
        }
        if !(truncation > 0.0) || !truncation.is_finite() {
            return Err(Error::invalid("trial truncation must be positive and finite"));
        }
        if delta * truncation >= 1.0 {
            return Err(Error::invalid(format!(
                "trial support would leave [-2,2]: delta*truncation = {} >= 1",
                delta * truncation
            )));
        }
        Ok(TrialSpec {
            base_profile,
            partner_profile,
            alpha,
            delta,
            truncation,
        })
    }

    pub fn base_profile(&self) -> &Profile {
        &self.base_profile
    }

    pub fn partner_profile(&self) -> Option<&Profile> {
        self.partner_profile.as_ref()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        TrialSpec::new(
            self.base_profile.clone(),
            self.partner_profile.clone(),
            self.alpha,
            delta,
            self.truncation,
        )
    }

    /// Default bump: e^{−t²} truncated to [−4, 4].
    pub fn default_bump(nodes: usize) -> Result<Profile> {
        Profile::gaussian(-4.0, 4.0, nodes, 1.0)
    }
}

/// Profile restricted to |t| ≤ r (nodes outside are dropped).
fn truncated(f: &Profile, r: f64) -> Result<Profile> {
    let keep: Vec<usize> = (0..f.len())
        .filter(|&i| f.nodes()[i].abs() <= r)
        .collect();
    if keep.len() < MIN_BUMP_NODES {
        return Err(Error::invalid(format!(
            "trial bump needs at least {MIN_BUMP_NODES} nodes inside |t| <= {r}, found {}",
            keep.len()
        )));
    }
    Profile::from_parts(
        keep.iter().map(|&i| f.nodes()[i]).collect(),
        keep.iter().map(|&i| f.weights()[i]).collect(),
        keep.iter().map(|&i| f.values()[i]).collect(),
    )
}

/// Bump at t = 1: nodes 1 + δs ascending, pushforward weights δw,
/// values δ^{−1/p} f(s).
fn positive_bump(f: &Profile, delta: f64, p: f64) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
    let amp = delta.powf(-1.0 / p);
    let nodes = f.nodes().iter().map(|&s| 1.0 + delta * s).collect();
    let weights = f.weights().iter().map(|&w| delta * w).collect();
    let values = f.values().iter().map(|&v| v * amp).collect();
    (nodes, weights, values)
}

/// Bump at t = −1 built from the substitution s = −(t+1)/δ: nodes −1 − δs
/// (reversed to ascend), same pushforward weights, values δ^{−1/p} v(s).
fn negative_bump(
    source: &Profile,
    delta: f64,
    p: f64,
    map: impl Fn(Complex64) -> Complex64,
) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
    let amp = delta.powf(-1.0 / p);
    let n = source.len();
    let idx = (0..n).rev();
    let nodes = idx.clone().map(|i| -1.0 - delta * source.nodes()[i]).collect();
    let weights = idx.clone().map(|i| delta * source.weights()[i]).collect();
    let values = idx.map(|i| map(source.values()[i]) * amp).collect();
    (nodes, weights, values)
}

fn resolution_check(f: &Profile, delta: f64) -> Result<()> {
    let min_gap = f
        .nodes()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    // Image nodes live near |t| = 1; spacing below a few ulps there collapses
    // the grid, which is a resource limit of the representation.
    let floor = 16.0 * f64::EPSILON;
    if delta * min_gap <= floor {
        return Err(Error::Budget {
            what: "trial grid resolution (delta too small for distinct nodes)",
            needed: (1.0 / (delta * min_gap).max(f64::MIN_POSITIVE)) as u64,
            budget: (1.0 / floor) as u64,
        });
    }
    Ok(())
}

/// The parity-appropriate trial profile at the spec's δ, supported on the
/// image grids of the truncated bump profiles.
pub fn build_trial(curve: &MonomialCurve, spec: &TrialSpec, p: f64) -> Result<Profile> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid("trial exponent p must satisfy 1 < p"));
    }
    let f = truncated(&spec.base_profile, spec.truncation)?;
    resolution_check(&f, spec.delta)?;
    let (pn, pw, pv) = positive_bump(&f, spec.delta, p);
    let (mut nodes, mut weights, mut values) = match curve.parity() {
        Parity::Neither => (Vec::new(), Vec::new(), Vec::new()),
        Parity::Even => negative_bump(&f, spec.delta, p, |v| v),
        Parity::Odd => {
            if spec.alpha == 0.0 {
                (Vec::new(), Vec::new(), Vec::new())
            } else {
                let g = spec.partner_profile.as_ref().ok_or_else(|| {
                    Error::invalid("odd-parity trial requires a partner profile")
                })?;
                let g = truncated(g, spec.truncation)?;
                resolution_check(&g, spec.delta)?;
                let alpha = spec.alpha;
                negative_bump(&g, spec.delta, p, |v| v.conj() * alpha)
            }
        }
    };
    nodes.extend(pn);
    weights.extend(pw);
    values.extend(pv);
    Profile::from_parts(nodes, weights, values)
}

#[derive(Debug, Clone, Copy)]
pub struct ScanRow {
    pub delta: f64,
    /// Rayleigh ratio of the trial over the transported box.
    pub ratio: f64,
    /// Cross phase exceeded the Nyquist guard on the grid.
    pub aliased: bool,
    /// Tail diagnostic of the q-norm on this row's field.
    pub tail_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Intercept of the first-order fit through the last unflagged rows.
    pub extrapolated: f64,
    /// Largest absolute residual of that fit.
    pub fit_residual: f64,
    /// Parity-dependent limit computed independently on the moment curve.
    pub target: f64,
    /// (extrapolated − target) / target.
    pub relative_gap: f64,
}

/// Least-squares line v = L + cδ through the points; returns (L, max |resid|).
fn first_order_intercept(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::invalid(
            "extrapolation needs at least two unflagged scan rows",
        ));
    }
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::invalid("degenerate delta list in extrapolation"));
    }
    let c = (n * sxy - sx * sy) / det;
    let l = (sy - c * sx) / n;
    let resid = points
        .iter()
        .map(|&(x, y)| (l + c * x - y).abs())
        .fold(0.0, f64::max);
    Ok((l, resid))
}

/// The δ → 0 limit of the scan, computed from moment-curve quantities only:
/// the plain Rayleigh ratio of f for the neither class, 2^{1/p′} times it for
/// the even class, and the θ-average of (E f, α conj(E g)) for the odd class.
pub fn trial_target(
    curve: &MonomialCurve,
    spec: &TrialSpec,
    pair: &ScalingPair,
    box_spec: &BoxSpec,
) -> Result<f64> {
    let d = curve.dimension();
    let gamma0 = PolynomialCurve::moment(d)?;
    let f = truncated(&spec.base_profile, spec.truncation)?;
    let ff = extend(&gamma0, &f, box_spec)?;
    let nf = f.lp_norm_dt(pair.p());
    if nf == 0.0 {
        return Err(Error::ZeroNorm("trial_target"));
    }
    match curve.parity() {
        Parity::Neither => Ok(ff.lq_norm(pair.q())?.value / nf),
        Parity::Even => {
            let factor = 2.0f64.powf(1.0 / pair.p_prime());
            Ok(factor * ff.lq_norm(pair.q())?.value / nf)
        }
        Parity::Odd => {
            let g = spec
                .partner_profile
                .as_ref()
                .ok_or_else(|| Error::invalid("odd-parity target requires a partner profile"))?;
            let g = truncated(g, spec.truncation)?;
            let gg = extend(&gamma0, &g, box_spec)?;
            let conj_scaled = Field::new(
                box_spec.clone(),
                gg.values()
                    .iter()
                    .map(|v| v.conj() * spec.alpha)
                    .collect(),
            )?;
            let avg = theta_average(&ff, &conj_scaled, pair.q())?;
            let ng = g.lp_norm_dt(pair.p());
            let denom = (nf.powf(pair.p()) + spec.alpha.powf(pair.p()) * ng.powf(pair.p()))
                .powf(1.0 / pair.p());
            Ok(avg.powf(1.0 / pair.q()) / denom)
        }
    }
}

/// Rayleigh ratios of the trial family along a decreasing δ-list, evaluated
/// in the blown-up frame, with first-order extrapolation to δ = 0 and the
/// independent target value.
pub fn lower_bound_scan(
    curve: &MonomialCurve,
    spec: &TrialSpec,
    deltas: &[f64],
    pair: &ScalingPair,
    box_spec: &BoxSpec,
) -> Result<ScanReport> {
    let d = curve.dimension();
    if pair.d() != d {
        return Err(Error::invalid("scaling pair dimension mismatch"));
    }
    if box_spec.dimension() != d {
        return Err(Error::GridMismatch(
            "scan box dimension does not match the curve".to_string(),
        ));
    }
    if deltas.is_empty() {
        return Err(Error::invalid("scan needs a nonempty delta list"));
    }
    if deltas.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::invalid("scan deltas must be positive and finite"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("scan deltas must strictly decrease"));
    }
    let parity = curve.parity();
    let poly = curve.to_polynomial();
    let p = pair.p();
    let q = pair.q();

    let lambda1 = affine_density(&poly, 1.0);
    let scale = Complex64::new(lambda1.powf(1.0 / p), 0.0);
    let f = truncated(&spec.base_profile, spec.truncation)?;
    let u_plus = f.scale_values(scale);
    let u_minus = match parity {
        Parity::Neither => None,
        Parity::Even => Some(u_plus.reflect()),
        Parity::Odd => {
            let g = spec
                .partner_profile
                .as_ref()
                .ok_or_else(|| Error::invalid("odd-parity scan requires a partner profile"))?;
            let g = truncated(g, spec.truncation)?;
            Some(
                g.conjugate_reflect()
                    .scale_values(scale * spec.alpha),
            )
        }
    };

    // Reflection D_{−1} (even) or −D_{−1} (odd) applied to the y-grid; these
    // are the arguments at which the t = −1 bump's field enters.
    let num_points = box_spec.num_points();
    let reflected_points: Option<Vec<Point>> = u_minus.as_ref().map(|_| {
        let sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
        (0..num_points)
            .map(|flat| {
                let mut y = [0.0f64; 3];
                box_spec.point(flat, &mut y[..d]);
                let mut z: Point = [0.0; 3];
                for (j, zj) in z.iter_mut().take(d).enumerate() {
                    let refl = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
                    *zj = sign * refl * y[j];
                }
                z
            })
            .collect()
    });

    // ξ_δ = D_{1/δ} T(1)^{-1} γ(1); only the odd case has a surviving phase.
    let xi_base: Option<Vec<f64>> = if parity == Parity::Odd {
        let t1 = torsion_matrix(&poly, 1.0);
        let u = t1.inverse()? * poly.eval(1.0);
        Some(u.iter().copied().collect())
    } else {
        None
    };

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let rescaled_plus = pseudo_rescale(&poly, 1.0, delta)?;
        let h_plus = extend(&rescaled_plus.curve, &u_plus, box_spec)?;
        let h_minus: Option<Vec<Complex64>> = match (&u_minus, &reflected_points) {
            (Some(um), Some(pts)) => {
                let rescaled_minus = pseudo_rescale(&poly, -1.0, delta)?;
                Some(extend_at_points(&rescaled_minus.curve, um, pts)?)
            }
            _ => None,
        };

        let denominator = lp_lambda_norm(&poly, &build_trial(curve, &spec.with_delta(delta)?, p)?, p)?;
        if denominator == 0.0 {
            return Err(Error::ZeroNorm("lower_bound_scan"));
        }

        let (qth_power, aliased, tail_ok) = match parity {
            Parity::Neither => {
                let report = h_plus.lq_norm(q)?;
                (report.qth_power, false, report.tail_ok)
            }
            Parity::Even => {
                let hm = h_minus.as_ref().expect("even scan has a partner field");
                let values: Vec<Complex64> = (0..num_points)
                    .map(|i| h_plus.values()[i] + hm[i])
                    .collect();
                let report = Field::new(box_spec.clone(), values)?.lq_norm(q)?;
                (report.qth_power, false, report.tail_ok)
            }
            Parity::Odd => {
                let hm = h_minus.as_ref().expect("odd scan has a partner field");
                let u = xi_base.as_ref().expect("odd scan has a drift vector");
                let mut mean_qth = 0.0;
                let mut aliased = false;
                let mut tail_ok = true;
                for j in 0..JITTER_COUNT {
                    let dj = delta * (1.0 + j as f64 / 100.0);
                    let dil = moment_dilation(d, 1.0 / dj)?;
                    let xi: Vec<f64> = (0..d).map(|k| dil[(k, k)] * u[k]).collect();
                    if j == 0 {
                        let max_cell_phase = (0..d)
                            .map(|k| 2.0 * xi[k].abs() * box_spec.step(k))
                            .fold(0.0, f64::max);
                        aliased = max_cell_phase >= SCAN_PHASE_GUARD;
                    }
                    let values: Vec<Complex64> = (0..num_points)
                        .map(|i| {
                            let mut y = [0.0f64; 3];
                            box_spec.point(i, &mut y[..d]);
                            let phase: f64 = (0..d).map(|k| xi[k] * y[k]).sum();
                            let (s, c) = phase.sin_cos();
                            let e = Complex64::new(c, s);
                            h_plus.values()[i] * e + hm[i] * e.conj()
                        })
                        .collect();
                    let report = Field::new(box_spec.clone(), values)?.lq_norm(q)?;
                    mean_qth += report.qth_power;
                    tail_ok &= report.tail_ok;
                }
                (mean_qth / JITTER_COUNT as f64, aliased, tail_ok)
            }
        };
        let ratio = ensure_finite(qth_power.powf(1.0 / q) / denominator, "lower_bound_scan")?;
        rows.push(ScanRow {
            delta,
            ratio,
            aliased,
            tail_ok,
        });
    }

    if let Some(last) = rows.last() {
        if !last.aliased && !last.tail_ok {
            return Err(Error::invalid(
                "scan box fails the tail diagnostic at the smallest delta; widen the box",
            ));
        }
    }

    let unflagged: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.aliased)
        .map(|r| (r.delta, r.ratio))
        .collect();
    let tail_points: Vec<(f64, f64)> = unflagged
        .iter()
        .rev()
        .take(3)
        .rev()
        .copied()
        .collect();
    let (extrapolated, fit_residual) = first_order_intercept(&tail_points)?;
    let target = trial_target(curve, spec, pair, box_spec)?;
    Ok(ScanReport {
        rows,
        extrapolated,
        fit_residual,
        target,
        relative_gap: (extrapolated - target) / target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(nodes: usize) -> Profile {
        Profile::gaussian(-4.0, 4.0, nodes, 1.0).unwrap()
    }

    #[test]
    fn neither_trial_is_a_normalized_rescaled_bump() {
        let curve = MonomialCurve::new(vec![1, 2]).unwrap();
        let f = Profile::indicator(0.0, 1.0, 129).unwrap();
        let spec = TrialSpec::new(f, None, 0.0, 0.1, 1.0).unwrap();
        let trial = build_trial(&curve, &spec, 2.0).unwrap();
        assert!(trial.nodes().iter().all(|&t| (1.0..=1.1 + 1e-12).contains(&t)));
        assert_relative_eq!(trial.lp_norm_dt(2.0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn even_trial_mass_approaches_twice_the_density() {
        // (2,4) has λ(1) = 3^{−1/3}; as δ → 0 the weighted p-mass of the pair
        // of bumps approaches 2·λ(1)·‖f‖_p^p at first order in δ.
        let curve = MonomialCurve::new(vec![2, 4]).unwrap();
        let poly = curve.to_polynomial();
        let f = Profile::indicator(0.0, 1.0, 257).unwrap();
        let spec = TrialSpec::new(f, None, 0.0, 0.01, 1.0).unwrap();
        let limit = 2.0 * 3.0f64.powf(-1.0 / 3.0);
        let mass = |delta: f64| {
            let trial = build_trial(&curve, &spec.with_delta(delta).unwrap(), 2.0).unwrap();
            lp_lambda_norm(&poly, &trial, 2.0).unwrap().powi(2)
        };
        let e1 = (mass(0.01) - limit).abs();
        let e2 = (mass(0.005) - limit).abs();
        assert!(e1 / limit < 0.05, "mass error {e1}");
        let rate = e1 / e2;
        assert!((1.4..=2.8).contains(&rate), "first-order rate, got {rate}");
    }

    #[test]
    fn odd_trial_with_zero_alpha_is_the_single_bump() {
        let curve = MonomialCurve::new(vec![1, 3]).unwrap();
        let f = gaussian(129);
        let with_alpha = TrialSpec::new(f.clone(), Some(f.clone()), 0.0, 0.1, 4.0).unwrap();
        let trial = build_trial(&curve, &with_alpha, 2.0).unwrap();
        assert_eq!(trial.len(), 129);
        assert!(trial.nodes().iter().all(|&t| t > 0.0));
    }

    #[test]
    fn odd_trial_without_partner_is_rejected() {
        let curve = MonomialCurve::new(vec![1, 3]).unwrap();
        let spec = TrialSpec::new(gaussian(129), None, 0.5, 0.1, 4.0).unwrap();
        assert!(build_trial(&curve, &spec, 2.0).is_err());
    }

    #[test]
    fn spec_validation_rejects_wide_support() {
        assert!(TrialSpec::new(gaussian(129), None, 0.0, 0.3, 4.0).is_err());
        assert!(TrialSpec::new(gaussian(129), None, 1.5, 0.1, 4.0).is_err());
    }

    #[test]
    fn tiny_delta_hits_the_resolution_budget() {
        let curve = MonomialCurve::new(vec![1, 2]).unwrap();
        let spec = TrialSpec::new(gaussian(129), None, 0.0, 1e-16, 4.0).unwrap();
        assert!(matches!(
            build_trial(&curve, &spec, 2.0),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn sparse_bumps_are_rejected() {
        let f = Profile::gaussian(-4.0, 4.0, 33, 1.0).unwrap();
        let curve = MonomialCurve::new(vec![1, 2]).unwrap();
        let spec = TrialSpec::new(f, None, 0.0, 0.1, 4.0).unwrap();
        assert!(build_trial(&curve, &spec, 2.0).is_err());
    }

    #[test]
    fn moment_curve_scan_is_flat_at_the_target() {
        // γ_(1,δ) of the moment curve is the moment curve itself and the λ
        // weight is 1, so every row reproduces the target ratio exactly.
        let curve = MonomialCurve::moment(2).unwrap();
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let spec = TrialSpec::new(gaussian(129), None, 0.0, 0.2, 4.0).unwrap();
        let box_spec = BoxSpec::symmetric(2, 16.0, 48).unwrap();
        let report =
            lower_bound_scan(&curve, &spec, &[0.2, 0.1, 0.05], &pair, &box_spec).unwrap();
        for row in &report.rows {
            assert!(
                (row.ratio - report.target).abs() <= 1e-3 * report.target,
                "row {row:?} vs target {}",
                report.target
            );
            assert!(!row.aliased);
        }
        assert!((report.extrapolated - report.target).abs() <= 1e-3 * report.target);
    }

    #[test]
    fn neither_scan_sits_below_the_even_and_odd_targets() {
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let f = gaussian(129);
        let box_spec = BoxSpec::symmetric(2, 8.0, 48).unwrap();
        let neither_spec = TrialSpec::new(f.clone(), None, 0.0, 0.2, 4.0).unwrap();
        let base = trial_target(
            &MonomialCurve::new(vec![1, 2]).unwrap(),
            &neither_spec,
            &pair,
            &box_spec,
        )
        .unwrap();
        let even = trial_target(
            &MonomialCurve::new(vec![2, 4]).unwrap(),
            &neither_spec,
            &pair,
            &box_spec,
        )
        .unwrap();
        let odd_spec = TrialSpec::new(f.clone(), Some(f), 1.0, 0.2, 4.0).unwrap();
        let odd = trial_target(
            &MonomialCurve::new(vec![1, 3]).unwrap(),
            &odd_spec,
            &pair,
            &box_spec,
        )
        .unwrap();
        assert!(base <= even * (1.0 + 1e-12));
        assert!(base <= odd * (1.0 + 1e-12));
        assert_relative_eq!(even / base, 2.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(odd / base, 2.5f64.powf(1.0 / 6.0), max_relative = 1e-3);
    }

    #[test]
    fn scan_rejects_bad_delta_lists() {
        let curve = MonomialCurve::moment(2).unwrap();
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let spec = TrialSpec::new(gaussian(129), None, 0.0, 0.2, 4.0).unwrap();
        let box_spec = BoxSpec::symmetric(2, 6.0, 16).unwrap();
        assert!(lower_bound_scan(&curve, &spec, &[], &pair, &box_spec).is_err());
        assert!(lower_bound_scan(&curve, &spec, &[0.1, 0.2], &pair, &box_spec).is_err());
        assert!(lower_bound_scan(&curve, &spec, &[0.2, -0.1], &pair, &box_spec).is_err());
    }
}
