//! The extension operator E f(x) = ∫ e^{i x·γ(t)} f(t) λ_γ(t) dt and the
//! norms entering the Rayleigh quotient ‖E f‖_{L^q} / ‖f‖_{L^p(λ_γ)}.
//!
//! Everything is a plain quadrature sum over the profile's nodes; fields are
//! evaluated point by point on box grids (embarrassingly parallel, each grid
//! point's node sum runs in a fixed ascending order so results are
//! reproducible regardless of thread count).
//!
//! The blow-up identity relating E on γ to E on the rescaled curve γ_(a,δ) is
//! checked on node-matched grids: the rescaled profile reuses the images of
//! the original nodes, so both sides sum the same values and the comparison
//! isolates the identity itself from interpolation error.

pub mod field;
pub mod profile;

pub use field::{lq_norm_with_tol, BoxSpec, Field, LqReport, DEFAULT_TAIL_TOL};
pub use profile::Profile;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curves::{
    affine_density, moment_dilation, pseudo_rescale, CurveJet, PolynomialCurve, ScalingPair,
};
use crate::error::{Error, Result};

/// Default cap on grid-points × nodes per extension evaluation.
pub const DEFAULT_EXTEND_BUDGET: u64 = 1 << 34;

/// Evaluation points are fixed-size; unused trailing coordinates stay zero.
pub type Point = [f64; 3];

/// Per-node data for the quadrature sum: curve image (zero-padded) and the
/// combined coefficient w_i · λ_γ(t_i) · f(t_i).
fn node_data(curve: &PolynomialCurve, f: &Profile) -> Result<(Vec<Point>, Vec<Complex64>)> {
    let d = curve.dimension();
    if d > 3 {
        return Err(Error::invalid("extension fields support dimension <= 3"));
    }
    let jet = CurveJet::new(curve);
    let mut gamma = Vec::with_capacity(f.len());
    let mut coeff = Vec::with_capacity(f.len());
    for ((&t, &w), &v) in f.nodes().iter().zip(f.weights()).zip(f.values()) {
        let g = curve.eval(t);
        let mut p: Point = [0.0; 3];
        for j in 0..d {
            p[j] = g[j];
        }
        gamma.push(p);
        coeff.push(v * w * jet.density(t));
    }
    Ok((gamma, coeff))
}

#[inline]
fn phase_sum(x: &Point, gamma: &[Point], coeff: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (g, c) in gamma.iter().zip(coeff) {
        let phase = x[0] * g[0] + x[1] * g[1] + x[2] * g[2];
        let (s, cs) = phase.sin_cos();
        acc += c * Complex64::new(cs, s);
    }
    acc
}

/// E f on a box grid. Fails fast when grid-points × nodes exceeds `budget`.
pub fn extend_with_budget(
    curve: &PolynomialCurve,
    f: &Profile,
    spec: &BoxSpec,
    budget: u64,
) -> Result<Field> {
    if spec.dimension() != curve.dimension() {
        return Err(Error::GridMismatch(format!(
            "box dimension {} does not match curve dimension {}",
            spec.dimension(),
            curve.dimension()
        )));
    }
    let work = spec.num_points() as u64 * f.len() as u64;
    if work > budget {
        return Err(Error::Budget {
            what: "extend (grid points x nodes)",
            needed: work,
            budget,
        });
    }
    let (gamma, coeff) = node_data(curve, f)?;
    let d = spec.dimension();
    let values: Vec<Complex64> = (0..spec.num_points())
        .into_par_iter()
        .map(|flat| {
            let mut x: Point = [0.0; 3];
            spec.point(flat, &mut x[..d]);
            phase_sum(&x, &gamma, &coeff)
        })
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite {
            op: "extend".to_string(),
        });
    }
    Field::new(spec.clone(), values)
}

pub fn extend(curve: &PolynomialCurve, f: &Profile, spec: &BoxSpec) -> Result<Field> {
    extend_with_budget(curve, f, spec, DEFAULT_EXTEND_BUDGET)
}

/// E f at an arbitrary list of points.
pub fn extend_at_points(
    curve: &PolynomialCurve,
    f: &Profile,
    points: &[Point],
) -> Result<Vec<Complex64>> {
    let (gamma, coeff) = node_data(curve, f)?;
    let out: Vec<Complex64> = points
        .par_iter()
        .map(|x| phase_sum(x, &gamma, &coeff))
        .collect();
    if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite {
            op: "extend_at_points".to_string(),
        });
    }
    Ok(out)
}

/// ‖f‖_{L^p(λ_γ dt)} with the profile's quadrature weights.
pub fn lp_lambda_norm(curve: &PolynomialCurve, f: &Profile, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid("lp_lambda_norm requires finite p >= 1"));
    }
    let jet = CurveJet::new(curve);
    let mut sum = 0.0;
    for ((&t, &w), v) in f.nodes().iter().zip(f.weights()).zip(f.values()) {
        sum += w * jet.density(t) * v.norm().powf(p);
    }
    crate::error::ensure_finite(sum.powf(1.0 / p), "lp_lambda_norm")
}

/// λ_γ sampled at the profile nodes.
pub fn lambda_samples(curve: &PolynomialCurve, f: &Profile) -> Vec<f64> {
    let jet = CurveJet::new(curve);
    f.nodes().iter().map(|&t| jet.density(t)).collect()
}

/// e^{i x₀·γ(t)} f(t); under E this translates the field by x₀.
pub fn modulate(curve: &PolynomialCurve, f: &Profile, x0: &[f64]) -> Result<Profile> {
    if x0.len() != curve.dimension() {
        return Err(Error::invalid("modulation point dimension mismatch"));
    }
    f.map_values(|t, v| {
        let g = curve.eval(t);
        let phase: f64 = g.iter().zip(x0).map(|(a, b)| a * b).sum();
        let (s, c) = phase.sin_cos();
        v * Complex64::new(c, s)
    })
}

/// The L^p-invariant dilation f_δ(t) = |δ|^{−2|l⃗|/((d²+d)p)} f(t/δ) realized
/// on the image grid δ·nodes, so sample values are reused exactly.
pub fn dilate_profile(
    f: &Profile,
    exponent_sum: u32,
    d: usize,
    p: f64,
    delta: f64,
) -> Result<Profile> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::invalid("profile dilation requires nonzero delta"));
    }
    let amp = delta
        .abs()
        .powf(-2.0 * exponent_sum as f64 / ((d * d + d) as f64 * p));
    let n = f.len();
    let mut idx: Vec<usize> = (0..n).collect();
    if delta < 0.0 {
        idx.reverse();
    }
    let nodes = idx.iter().map(|&i| delta * f.nodes()[i]).collect();
    let weights = idx.iter().map(|&i| delta.abs() * f.weights()[i]).collect();
    let values = idx.iter().map(|&i| f.values()[i] * amp).collect();
    Profile::from_parts(nodes, weights, values)
}

/// Rayleigh quotient ‖E f‖_{L^q(box)} / ‖f‖_{L^p(λ_γ)}.
#[derive(Debug, Clone, Copy)]
pub struct RayleighReport {
    pub ratio: f64,
    pub numerator: LqReport,
    pub denominator: f64,
}

pub fn rayleigh_ratio(
    curve: &PolynomialCurve,
    f: &Profile,
    pair: &ScalingPair,
    spec: &BoxSpec,
) -> Result<RayleighReport> {
    let denominator = lp_lambda_norm(curve, f, pair.p())?;
    if denominator == 0.0 {
        return Err(Error::ZeroNorm("rayleigh_ratio"));
    }
    let field = extend(curve, f, spec)?;
    let numerator = field.lq_norm(pair.q())?;
    Ok(RayleighReport {
        ratio: numerator.value / denominator,
        numerator,
        denominator,
    })
}

/// Both sides of the exact blow-up identity
///   E_γ f(x) = |det(T(a) D_δ)|^{1/q} e^{i x·γ(a)} E_{γ_(a,δ)} g (D_δ T(a)^t x),
///   g(s) = (δ λ_γ(a))^{1/p} f(a + δ s),
/// evaluated on node-matched grids at the given x points, together with the
/// L^p norm identity ‖f‖_{L^p(λ_γ)} = ‖g‖_{L^p(λ_{γ_(a,δ)})}.
#[derive(Debug, Clone, Copy)]
pub struct BlowupReport {
    /// max_x |LHS − RHS| / max_x |LHS|.
    pub max_pointwise_rel: f64,
    /// |‖f‖ − ‖g‖| / ‖f‖ for the L^p(λ) norms.
    pub norm_rel: f64,
    /// max_x |LHS|, the normalization scale of the pointwise comparison.
    pub scale: f64,
}

pub fn blowup_identity_check(
    curve: &PolynomialCurve,
    pair: &ScalingPair,
    a: f64,
    delta: f64,
    f: &Profile,
    points: &[Point],
) -> Result<BlowupReport> {
    let d = curve.dimension();
    if d != pair.d() {
        return Err(Error::invalid("scaling pair dimension mismatch"));
    }
    let rescaled = pseudo_rescale(curve, a, delta)?;

    // Node-matched rescaled profile: nodes s_i = (t_i − a)/δ carry the same
    // sample values, weights are the pushforward w_i/|δ|.
    let n = f.len();
    let mut idx: Vec<usize> = (0..n).collect();
    if delta < 0.0 {
        idx.reverse();
    }
    let lambda_a = affine_density(curve, a);
    let amp = (delta.abs() * lambda_a).powf(1.0 / pair.p());
    let nodes: Vec<f64> = idx.iter().map(|&i| (f.nodes()[i] - a) / delta).collect();
    let weights: Vec<f64> = idx
        .iter()
        .map(|&i| f.weights()[i] / delta.abs())
        .collect();
    let values: Vec<Complex64> = idx.iter().map(|&i| f.values()[i] * amp).collect();
    let g = Profile::from_parts(nodes, weights, values)?;

    let lhs = extend_at_points(curve, f, points)?;

    // Mapped evaluation points y = D_δ T(a)^t x.
    let tt = rescaled.frame.transpose();
    let dil = moment_dilation(d, delta)?;
    let mapped: Vec<Point> = points
        .iter()
        .map(|x| {
            let mut y: Point = [0.0; 3];
            for i in 0..d {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += tt[(i, j)] * x[j];
                }
                y[i] = acc * dil[(i, i)];
            }
            y
        })
        .collect();
    let inner = extend_at_points(&rescaled.curve, &g, &mapped)?;

    let jac = rescaled.jacobian_det().abs().powf(1.0 / pair.q());
    let gamma_a = curve.eval(a);
    let mut max_diff = 0.0f64;
    let mut scale = 0.0f64;
    for (k, x) in points.iter().enumerate() {
        let phase: f64 = (0..d).map(|j| x[j] * gamma_a[j]).sum();
        let (s, c) = phase.sin_cos();
        let rhs = inner[k] * Complex64::new(c, s) * jac;
        max_diff = max_diff.max((lhs[k] - rhs).norm());
        scale = scale.max(lhs[k].norm());
    }
    let nf = lp_lambda_norm(curve, f, pair.p())?;
    if nf == 0.0 {
        return Err(Error::ZeroNorm("blowup_identity_check"));
    }
    let ng = lp_lambda_norm(&rescaled.curve, &g, pair.p())?;

    Ok(BlowupReport {
        max_pointwise_rel: max_diff / scale.max(f64::MIN_POSITIVE),
        norm_rel: (nf - ng).abs() / nf,
        scale,
    })
}

/// Deterministic low-discrepancy points inside a box (generalized golden-ratio
/// lattice), used for pointwise identity checks.
pub fn check_points(spec: &BoxSpec, n: usize) -> Vec<Point> {
    let d = spec.dimension();
    // Root of x^{d+1} = x + 1 (the plastic-number family) via Newton.
    let mut phi = 1.5f64;
    for _ in 0..64 {
        let f = phi.powi(d as i32 + 1) - phi - 1.0;
        let df = (d as f64 + 1.0) * phi.powi(d as i32) - 1.0;
        phi -= f / df;
    }
    let alphas: Vec<f64> = (1..=d).map(|j| phi.powi(-(j as i32)).fract()).collect();
    (1..=n)
        .map(|k| {
            let mut x: Point = [0.0; 3];
            for j in 0..d {
                let frac = (k as f64 * alphas[j]).fract();
                let (a, b) = spec.intervals()[j];
                x[j] = a + frac * (b - a);
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::MonomialCurve;
    use approx::assert_relative_eq;

    fn gaussian_profile() -> Profile {
        Profile::gaussian(-4.0, 4.0, 257, 1.0).unwrap()
    }

    #[test]
    fn line_extension_matches_sinc() {
        // γ(t) = t in d = 1 has λ ≡ 1 and E χ_{[−1,1]}(x) = 2 sin(x)/x.
        let curve = PolynomialCurve::new(vec![vec![0.0, 1.0]]).unwrap();
        let f = Profile::indicator(-1.0, 1.0, 4097).unwrap();
        let pts: Vec<Point> = vec![[0.5, 0.0, 0.0], [1.7, 0.0, 0.0], [3.0, 0.0, 0.0]];
        let vals = extend_at_points(&curve, &f, &pts).unwrap();
        for (v, x) in vals.iter().zip([0.5f64, 1.7, 3.0]) {
            assert_relative_eq!(v.re, 2.0 * x.sin() / x, max_relative = 1e-6);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn extension_is_linear_in_the_profile() {
        let curve = PolynomialCurve::moment(2).unwrap();
        let f = gaussian_profile();
        let g = f
            .map_values(|t, v| v * Complex64::new(t.cos(), 0.3 * t))
            .unwrap();
        let sum = f
            .map_values(|t, v| v + g.values()[f.nodes().iter().position(|&s| s == t).unwrap()])
            .unwrap();
        let pts = vec![[1.0, -2.0, 0.0], [0.3, 0.7, 0.0]];
        let ef = extend_at_points(&curve, &f, &pts).unwrap();
        let eg = extend_at_points(&curve, &g, &pts).unwrap();
        let es = extend_at_points(&curve, &sum, &pts).unwrap();
        for k in 0..pts.len() {
            assert_relative_eq!((ef[k] + eg[k]).re, es[k].re, max_relative = 1e-12);
            assert_relative_eq!((ef[k] + eg[k]).im, es[k].im, max_relative = 1e-12);
        }
    }

    #[test]
    fn modulation_translates_the_field() {
        let curve = PolynomialCurve::moment(2).unwrap();
        let f = gaussian_profile();
        let x0 = [3.0, -2.0];
        let fm = modulate(&curve, &f, &x0).unwrap();
        let pts = vec![[0.2, 0.4, 0.0], [-1.0, 2.5, 0.0]];
        let shifted: Vec<Point> = pts
            .iter()
            .map(|p| [p[0] + x0[0], p[1] + x0[1], 0.0])
            .collect();
        let lhs = extend_at_points(&curve, &fm, &pts).unwrap();
        let rhs = extend_at_points(&curve, &f, &shifted).unwrap();
        for k in 0..pts.len() {
            assert!((lhs[k] - rhs[k]).norm() < 1e-12 * rhs[k].norm().max(1.0));
        }
    }

    #[test]
    fn dilation_symmetry_pointwise_at_matched_nodes() {
        // E f_δ(x) = |δ|^{|l⃗|/q} E f(D_δ x) for monomial curves.
        for exps in [vec![1u32, 2], vec![1, 3]] {
            let mono = MonomialCurve::new(exps.clone()).unwrap();
            let curve = mono.to_polynomial();
            let pair = ScalingPair::new(2.0, 2).unwrap();
            let f = gaussian_profile();
            for &delta in &[2.0, 0.5, -1.0] {
                let fd = dilate_profile(&f, mono.exponent_sum(), 2, pair.p(), delta).unwrap();
                let pts = vec![[0.7, -0.2, 0.0], [1.3, 0.5, 0.0]];
                let mapped: Vec<Point> = pts
                    .iter()
                    .map(|x| {
                        [
                            x[0] * delta.powi(exps[0] as i32),
                            x[1] * delta.powi(exps[1] as i32),
                            0.0,
                        ]
                    })
                    .collect();
                let lhs = extend_at_points(&curve, &fd, &pts).unwrap();
                let rhs = extend_at_points(&curve, &f, &mapped).unwrap();
                let scale = delta.abs().powf(mono.exponent_sum() as f64 / pair.q());
                for k in 0..pts.len() {
                    let want = rhs[k] * scale;
                    assert!(
                        (lhs[k] - want).norm() <= 1e-10 * want.norm().max(1e-6),
                        "delta {delta}: {:?} vs {:?}",
                        lhs[k],
                        want
                    );
                }
            }
        }
    }

    #[test]
    fn conjugate_reflection_identity_for_odd_curves() {
        // For odd γ: E(conj ∘ f ∘ (−·)) = conj(E f).
        let curve = MonomialCurve::new(vec![1, 3]).unwrap().to_polynomial();
        let f = Profile::sample(-3.0, 3.0, 201, |t| Complex64::new((-t * t).exp(), 0.2 * t))
            .unwrap();
        let fr = f.conjugate_reflect();
        let pts = vec![[0.9, 1.1, 0.0], [-0.4, 2.0, 0.0]];
        let lhs = extend_at_points(&curve, &fr, &pts).unwrap();
        let rhs = extend_at_points(&curve, &f, &pts).unwrap();
        for k in 0..pts.len() {
            assert!((lhs[k] - rhs[k].conj()).norm() < 1e-11 * rhs[k].norm().max(1e-9));
        }
    }

    #[test]
    fn blowup_identity_monomial_13() {
        let curve = MonomialCurve::new(vec![1, 3]).unwrap().to_polynomial();
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let f = gaussian_profile();
        let spec = BoxSpec::symmetric(2, 10.0, 8).unwrap();
        let pts = check_points(&spec, 100);
        let report = blowup_identity_check(&curve, &pair, 1.0, 0.25, &f, &pts).unwrap();
        assert!(report.max_pointwise_rel < 1e-6, "{report:?}");
        assert!(report.norm_rel < 1e-12, "{report:?}");
    }

    #[test]
    fn blowup_identity_moment_is_machine_exact() {
        let curve = PolynomialCurve::moment(2).unwrap();
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let f = gaussian_profile();
        let spec = BoxSpec::symmetric(2, 10.0, 8).unwrap();
        let pts = check_points(&spec, 100);
        let report = blowup_identity_check(&curve, &pair, 1.0, 1.0, &f, &pts).unwrap();
        assert!(report.max_pointwise_rel < 1e-10, "{report:?}");
    }

    #[test]
    fn blowup_at_torsion_zero_is_rejected() {
        let curve = MonomialCurve::new(vec![1, 3]).unwrap().to_polynomial();
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let f = gaussian_profile();
        let err = blowup_identity_check(&curve, &pair, 0.0, 0.25, &f, &[[0.0, 0.0, 0.0]]);
        assert!(matches!(err, Err(crate::Error::SingularTorsion { .. })));
    }

    #[test]
    fn budget_guard_fires() {
        let curve = PolynomialCurve::moment(2).unwrap();
        let f = gaussian_profile();
        let spec = BoxSpec::symmetric(2, 1.0, 64).unwrap();
        let err = extend_with_budget(&curve, &f, &spec, 1000);
        assert!(matches!(err, Err(crate::Error::Budget { .. })));
    }

    #[test]
    fn zero_profile_rejected_by_rayleigh() {
        let curve = PolynomialCurve::moment(2).unwrap();
        let f = Profile::sample_real(-1.0, 1.0, 33, |_| 0.0).unwrap();
        let pair = ScalingPair::new(2.0, 2).unwrap();
        let spec = BoxSpec::symmetric(2, 5.0, 16).unwrap();
        assert!(matches!(
            rayleigh_ratio(&curve, &f, &pair, &spec),
            Err(crate::Error::ZeroNorm(_))
        ));
    }
}
