//! The d-fold sum map of a curve and the pointwise geometric inequality
//! relating the velocity determinant to torsion weights and a Vandermonde
//! factor, together with the covering of the line into intervals on which
//! that inequality is uniform.

use nalgebra::DMatrix;

use crate::curves::{torsion_polynomial, torsion_scalar, PolynomialCurve};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Γ(t⃗) = Σ_j γ(t_j), the sum of d curve points.
pub fn curve_sum(curve: &PolynomialCurve, ts: &[f64]) -> Vec<f64> {
    let d = curve.dimension();
    let mut out = vec![0.0; d];
    for &t in ts {
        let g = curve.eval(t);
        for (o, gi) in out.iter_mut().zip(g.iter()) {
            *o += gi;
        }
    }
    out
}

/// |det(γ′(t₁), …, γ′(t_d))| divided by ∏_j |L_γ(t_j)|^{1/d} ∏_{i<j} |t_i − t_j|.
///
/// The inputs must be pairwise distinct with nonvanishing torsion, and should
/// lie in a single interval of [`covering_intervals`] for the ratio to admit
/// a uniform positive floor.
pub fn geom_ineq_ratio(curve: &PolynomialCurve, ts: &[f64]) -> Result<f64> {
    let d = curve.dimension();
    if ts.len() != d {
        return Err(Error::invalid(format!(
            "geometric ratio needs {d} parameters, got {}",
            ts.len()
        )));
    }
    for i in 0..d {
        for j in i + 1..d {
            if ts[i] == ts[j] {
                return Err(Error::invalid(format!(
                    "parameters t[{i}] and t[{j}] coincide at {}",
                    ts[i]
                )));
            }
        }
    }
    let velocity = curve.derivative(1);
    let mut m = DMatrix::zeros(d, d);
    for (col, &t) in ts.iter().enumerate() {
        let v = velocity.eval(t);
        for row in 0..d {
            m[(row, col)] = v[row];
        }
    }
    let det = m.determinant().abs();
    let mut denom = 1.0f64;
    for (i, &t) in ts.iter().enumerate() {
        let l = torsion_scalar(curve, t).abs();
        if l == 0.0 {
            return Err(Error::invalid(format!(
                "torsion vanishes at t[{i}] = {t}"
            )));
        }
        denom *= l.powf(1.0 / d as f64);
    }
    for i in 0..d {
        for j in i + 1..d {
            denom *= (ts[i] - ts[j]).abs();
        }
    }
    Ok(det / denom)
}

/// Sign changes of `poly` inside (a, b), located by dense sampling followed
/// by bisection. An identically-small polynomial contributes none.
fn sign_change_roots(poly: &Poly, a: f64, b: f64) -> Vec<f64> {
    const SAMPLES: usize = 4096;
    let mut roots = Vec::new();
    let h = (b - a) / SAMPLES as f64;
    let mut prev_t = a;
    let mut prev_v = poly.eval(a);
    for i in 1..=SAMPLES {
        let t = a + h * i as f64;
        let v = poly.eval(t);
        if prev_v == 0.0 {
            roots.push(prev_t);
        } else if v != 0.0 && prev_v.signum() != v.signum() {
            let (mut lo, mut hi) = (prev_t, t);
            let mut f_lo = prev_v;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let f_mid = poly.eval(mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if f_lo.signum() == f_mid.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

/// The covering of `domain` into intervals on which the geometric inequality
/// holds with one constant: the domain is split at sign changes of the
/// torsion L_γ and at critical points of L_γ², so |L_γ| is single-signed and
/// monotone on every returned piece.
pub fn covering_intervals(curve: &PolynomialCurve, domain: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (a, b) = domain;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::invalid("covering needs a finite nonempty domain"));
    }
    let torsion = torsion_polynomial(curve);
    if torsion.is_zero() {
        return Err(Error::invalid("curve is degenerate: torsion is identically zero"));
    }
    let mut cuts = sign_change_roots(&torsion, a, b);
    cuts.extend(sign_change_roots(&torsion.derivative(), a, b));
    cuts.retain(|t| *t > a && *t < b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (b - a));
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut left = a;
    for c in cuts {
        out.push((left, c));
        left = c;
    }
    out.push((left, b));
    Ok(out)
}

/// Smallest geometric ratio over a lattice of distinct d-tuples inside one
/// covering interval: an empirical floor for the inequality there.
pub fn geom_ineq_floor(
    curve: &PolynomialCurve,
    interval: (f64, f64),
    points_per_axis: usize,
) -> Result<f64> {
    let d = curve.dimension();
    let (a, b) = interval;
    if !(b > a) || points_per_axis < d {
        return Err(Error::invalid("floor scan needs an interval and at least d lattice points"));
    }
    // Interior lattice: torsion may vanish exactly at covering endpoints.
    let pts: Vec<f64> = (0..points_per_axis)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / points_per_axis as f64)
        .collect();
    let mut indices = vec![0usize; d];
    let mut floor = f64::INFINITY;
    loop {
        let strictly_increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if strictly_increasing {
            let ts: Vec<f64> = indices.iter().map(|&i| pts[i]).collect();
            let r = geom_ineq_ratio(curve, &ts)?;
            floor = floor.min(r);
        }
        let mut axis = d;
        while axis > 0 {
            axis -= 1;
            indices[axis] += 1;
            if indices[axis] < points_per_axis {
                break;
            }
            indices[axis] = 0;
            if axis == 0 {
                if floor.is_finite() {
                    return Ok(floor);
                }
                return Err(Error::invalid("no distinct tuple fits the lattice"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn parabola() -> PolynomialCurve {
        PolynomialCurve::moment(2).expect("moment curve")
    }

    fn odd_cubic() -> PolynomialCurve {
        PolynomialCurve::new(vec![vec![0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]]).expect("curve")
    }

    #[test]
    fn sum_map_adds_and_commutes() {
        let gamma = curve_sum(&parabola(), &[1.0, 1.0]);
        assert_relative_eq!(gamma[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(gamma[1], 1.0, epsilon = 1e-15);
        let ab = curve_sum(&parabola(), &[0.3, 0.9]);
        let ba = curve_sum(&parabola(), &[0.9, 0.3]);
        assert_eq!(ab, ba);
    }

    #[test]
    fn ratio_is_identically_one_on_the_parabola() {
        for ts in [[0.1, 0.7], [-2.0, 5.0], [0.25, 0.26]] {
            let r = geom_ineq_ratio(&parabola(), &ts).expect("distinct parameters");
            assert_relative_eq!(r, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ratio_matches_the_vandermonde_example_in_d3() {
        let curve = PolynomialCurve::moment(3).expect("moment curve");
        let r = geom_ineq_ratio(&curve, &[0.0, 1.0, 2.0]).expect("distinct parameters");
        assert_relative_eq!(r, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn coincident_parameters_are_rejected() {
        let err = geom_ineq_ratio(&parabola(), &[0.5, 0.5]).unwrap_err();
        assert!(err.to_string().contains("coincide"));
        assert!(geom_ineq_ratio(&parabola(), &[0.5]).is_err());
    }

    #[test]
    fn vanishing_torsion_inside_the_tuple_is_rejected() {
        let err = geom_ineq_ratio(&odd_cubic(), &[0.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("torsion"));
    }

    #[test]
    fn covering_splits_where_torsion_changes_sign() {
        let cover = covering_intervals(&odd_cubic(), (-1.0, 1.0)).expect("covering");
        assert_eq!(cover.len(), 2);
        assert_relative_eq!(cover[0].0, -1.0, epsilon = 1e-12);
        assert!(cover[0].1.abs() < 1e-9);
        assert_relative_eq!(cover[1].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn covering_splits_at_torsion_magnitude_extremes() {
        // γ = (t, t⁴): torsion 12t² stays nonnegative but has a critical
        // point at 0, so |L| fails to be monotone through it.
        let quartic =
            PolynomialCurve::new(vec![vec![0.0, 1.0], vec![0.0, 0.0, 0.0, 0.0, 1.0]])
                .expect("curve");
        let cover = covering_intervals(&quartic, (-1.0, 1.0)).expect("covering");
        assert_eq!(cover.len(), 2);
        assert!(cover[0].1.abs() < 1e-9);
    }

    #[test]
    fn degenerate_torsion_is_rejected() {
        let flat = PolynomialCurve::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).expect("curve");
        assert!(covering_intervals(&flat, (0.0, 1.0)).is_err());
    }

    #[test]
    fn floor_on_the_parabola_is_one() {
        let floor = geom_ineq_floor(&parabola(), (0.0, 1.0), 8).expect("floor");
        assert_relative_eq!(floor, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn floor_is_positive_on_a_covering_interval_of_the_cubic() {
        let cover = covering_intervals(&odd_cubic(), (-1.0, 1.0)).expect("covering");
        let floor = geom_ineq_floor(&odd_cubic(), cover[1], 6).expect("floor");
        assert!(floor > 0.0 && floor.is_finite());
    }
}
