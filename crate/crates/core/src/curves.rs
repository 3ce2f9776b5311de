//! Polynomial curves γ: ℝ → ℝ^d, their torsion and affine-arclength density,
//! and the pseudo-dilation frame used to blow curves up near a basepoint.
//!
//! Central objects:
//! * torsion L_γ(t) = det(γ'(t), …, γ^{(d)}(t)) and the torsion matrix
//!   T(a) whose columns are γ'(a), …, γ^{(d)}(a);
//! * affine-arclength density λ_γ(t) = |L_γ(t)|^{2/(d²+d)}, the weight that
//!   makes the extension operator's scaling exponents dimension-free;
//! * anisotropic dilations D^l⃗_δ = diag(δ^{l_1}, …, δ^{l_d});
//! * the rescaled curve γ_(a,δ)(t) = D_{δ⁻¹} T(a)⁻¹ (γ(a + δt) − γ(a)), which
//!   fixes the zero-jet at t = 0 and converges to the moment curve as δ → 0.
//!
//! All curve manipulations are exact coefficient arithmetic; only torsion
//! evaluation, matrix inversion, and density powers are floating point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::{poly_det, Poly};

/// Largest supported ambient dimension.
pub const MAX_DIMENSION: usize = 4;
/// Default guard on polynomial degree; higher degrees are almost certainly
/// a malformed input rather than a deliberate computation.
pub const MAX_DEGREE: usize = 12;
/// Relative singularity threshold for torsion-matrix inversion.
const SINGULARITY_RTOL: f64 = 1e-10;

/// Sign structure of a curve under t ↦ −t.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Every component odd: γ(−t) = −γ(t).
    Odd,
    /// Every component even: γ(−t) = γ(t).
    Even,
    /// Mixed exponents.
    Neither,
}

/// Exponent of |L_γ| in the affine-arclength density: 2/(d² + d).
pub fn density_exponent(d: usize) -> f64 {
    2.0 / ((d * d + d) as f64)
}

/// The moment-curve weight vector l⃗₀ = (1, 2, …, d).
pub fn moment_exponents(d: usize) -> Vec<u32> {
    (1..=d as u32).collect()
}

// ---------------------------------------------------------------------------
// Monomial curves
// ---------------------------------------------------------------------------

/// γ(t) = (t^{l_1}/l_1!, …, t^{l_d}/l_d!) with strictly increasing exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialCurve {
    exponents: Vec<u32>,
}

impl MonomialCurve {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        let d = exponents.len();
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::invalid(format!(
                "monomial curve dimension must be 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        if exponents[0] == 0 {
            return Err(Error::invalid("monomial exponents must be >= 1"));
        }
        if !exponents.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "monomial exponents must be strictly increasing, got {exponents:?}"
            )));
        }
        if *exponents.last().unwrap() as usize > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "monomial exponent exceeds degree guard {MAX_DEGREE}"
            )));
        }
        Ok(MonomialCurve { exponents })
    }

    /// The moment curve (t, t²/2!, …, t^d/d!).
    pub fn moment(d: usize) -> Result<Self> {
        MonomialCurve::new(moment_exponents(d))
    }

    pub fn dimension(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// |l⃗| = l_1 + … + l_d, the homogeneity degree entering the dilation symmetry.
    pub fn exponent_sum(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_moment(&self) -> bool {
        self.exponents == moment_exponents(self.dimension())
    }

    pub fn parity(&self) -> Parity {
        if self.exponents.iter().all(|l| l % 2 == 1) {
            Parity::Odd
        } else if self.exponents.iter().all(|l| l % 2 == 0) {
            Parity::Even
        } else {
            Parity::Neither
        }
    }

    pub fn to_polynomial(&self) -> PolynomialCurve {
        let components = self
            .exponents
            .iter()
            .map(|&l| Poly::monomial(1.0 / factorial(l as usize), l as usize))
            .collect();
        PolynomialCurve::from_components(components).expect("validated exponents")
    }
}

// ---------------------------------------------------------------------------
// Polynomial curves
// ---------------------------------------------------------------------------

/// General polynomial curve with one dense coefficient polynomial per component.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCurve {
    components: Vec<Poly>,
}

impl PolynomialCurve {
    /// Build from coefficient rows, one row per component, lowest degree first.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        PolynomialCurve::from_components(rows.into_iter().map(Poly::new).collect())
    }

    pub fn from_components(components: Vec<Poly>) -> Result<Self> {
        let d = components.len();
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::invalid(format!(
                "curve dimension must be 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if c.degree() > MAX_DEGREE {
                return Err(Error::invalid(format!(
                    "component {i} has degree {} above the guard {MAX_DEGREE}",
                    c.degree()
                )));
            }
            if c.coeffs().iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "component {i} has a non-finite coefficient"
                )));
            }
        }
        Ok(PolynomialCurve { components })
    }

    pub fn moment(d: usize) -> Result<Self> {
        Ok(MonomialCurve::moment(d)?.to_polynomial())
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn degree(&self) -> usize {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(self.dimension(), self.components.iter().map(|c| c.eval(t)))
    }

    /// Componentwise derivative of the given order.
    pub fn derivative(&self, order: usize) -> PolynomialCurve {
        PolynomialCurve {
            components: self
                .components
                .iter()
                .map(|c| c.derivative_n(order))
                .collect(),
        }
    }

    /// Substitute t ← a + b·t in every component.
    pub fn compose_affine(&self, a: f64, b: f64) -> PolynomialCurve {
        PolynomialCurve {
            components: self
                .components
                .iter()
                .map(|c| c.compose_affine(a, b))
                .collect(),
        }
    }

    /// The curve t ↦ γ(−t).
    pub fn reflect_parameter(&self) -> PolynomialCurve {
        self.compose_affine(0.0, -1.0)
    }

    /// The curve −γ.
    pub fn negate(&self) -> PolynomialCurve {
        PolynomialCurve {
            components: self.components.iter().map(|c| c.scale(-1.0)).collect(),
        }
    }

    /// Left-multiply the component vector by a d×d matrix.
    pub fn linear_map(&self, m: &DMatrix<f64>) -> Result<PolynomialCurve> {
        let d = self.dimension();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::invalid(format!(
                "linear map must be {d}x{d}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let components = (0..d)
            .map(|i| {
                let mut acc = Poly::zero();
                for j in 0..d {
                    let mij = m[(i, j)];
                    if mij != 0.0 {
                        acc = acc.add(&self.components[j].scale(mij));
                    }
                }
                acc
            })
            .collect();
        Ok(PolynomialCurve { components })
    }

    /// Scale component i by factors[i].
    pub fn scale_components(&self, factors: &[f64]) -> Result<PolynomialCurve> {
        if factors.len() != self.dimension() {
            return Err(Error::invalid("component scale length mismatch"));
        }
        Ok(PolynomialCurve {
            components: self
                .components
                .iter()
                .zip(factors)
                .map(|(c, &f)| c.scale(f))
                .collect(),
        })
    }

    pub fn sub(&self, other: &PolynomialCurve) -> Result<PolynomialCurve> {
        if other.dimension() != self.dimension() {
            return Err(Error::invalid("curve dimension mismatch in subtraction"));
        }
        Ok(PolynomialCurve {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    /// Parity classification by the sign pattern of nonzero coefficients.
    pub fn parity(&self) -> Parity {
        let mut any_odd = false;
        let mut any_even = false;
        for c in &self.components {
            for (k, &v) in c.coeffs().iter().enumerate() {
                if v != 0.0 {
                    if k % 2 == 1 {
                        any_odd = true;
                    } else {
                        any_even = true;
                    }
                }
            }
        }
        match (any_odd, any_even) {
            (true, false) => Parity::Odd,
            (false, true) => Parity::Even,
            _ => Parity::Neither,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

// ---------------------------------------------------------------------------
// Torsion, density, torsion matrix
// ---------------------------------------------------------------------------

/// Precomputed derivative family γ', …, γ^{(d)} for repeated evaluation.
pub struct CurveJet {
    dimension: usize,
    derivatives: Vec<PolynomialCurve>,
}

impl CurveJet {
    pub fn new(curve: &PolynomialCurve) -> Self {
        let d = curve.dimension();
        let mut derivatives = Vec::with_capacity(d);
        let mut current = curve.clone();
        for _ in 0..d {
            current = current.derivative(1);
            derivatives.push(current.clone());
        }
        CurveJet {
            dimension: d,
            derivatives,
        }
    }

    /// Columns γ^{(1)}(a), …, γ^{(d)}(a).
    pub fn torsion_matrix(&self, a: f64) -> TorsionMatrix {
        let d = self.dimension;
        let mut m = DMatrix::zeros(d, d);
        for (j, deriv) in self.derivatives.iter().enumerate() {
            m.set_column(j, &deriv.eval(a));
        }
        TorsionMatrix { m, basepoint: a }
    }

    pub fn torsion(&self, a: f64) -> f64 {
        self.torsion_matrix(a).determinant()
    }

    pub fn density(&self, a: f64) -> f64 {
        self.torsion(a).abs().powf(density_exponent(self.dimension))
    }

    pub fn velocity(&self, a: f64) -> DVector<f64> {
        self.derivatives[0].eval(a)
    }
}

/// L_γ(t) = det(γ'(t), …, γ^{(d)}(t)).
pub fn torsion_scalar(curve: &PolynomialCurve, t: f64) -> f64 {
    CurveJet::new(curve).torsion(t)
}

/// Symbolic torsion as a polynomial in t (cofactor expansion over the
/// polynomial ring), so monomial-curve torsion exponents can be read off
/// exactly: for exponents l⃗ the torsion is c · t^{|l⃗| − d(d+1)/2}.
pub fn torsion_polynomial(curve: &PolynomialCurve) -> Poly {
    let d = curve.dimension();
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = Vec::with_capacity(d);
        for j in 1..=d {
            row.push(curve.components()[i].derivative_n(j));
        }
        rows.push(row);
    }
    poly_det(&rows)
}

/// λ_γ(t) = |L_γ(t)|^{2/(d²+d)}; vanishes exactly where the torsion does.
pub fn affine_density(curve: &PolynomialCurve, t: f64) -> f64 {
    CurveJet::new(curve).density(t)
}

/// T(a) = (γ'(a), …, γ^{(d)}(a)) with guarded inversion.
#[derive(Debug, Clone)]
pub struct TorsionMatrix {
    m: DMatrix<f64>,
    basepoint: f64,
}

impl TorsionMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn basepoint(&self) -> f64 {
        self.basepoint
    }

    pub fn determinant(&self) -> f64 {
        self.m.clone().lu().determinant()
    }

    /// Inverse, failing fast when |det| is below the relative singularity
    /// threshold (1e-10 times the max-norm of the matrix raised to d).
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let det = self.determinant();
        let scale = self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let threshold = SINGULARITY_RTOL * scale.powi(self.m.nrows() as i32);
        if !(det.abs() > threshold) {
            return Err(Error::SingularTorsion {
                basepoint: self.basepoint,
                det,
                threshold,
            });
        }
        self.m
            .clone()
            .try_inverse()
            .ok_or(Error::SingularTorsion {
                basepoint: self.basepoint,
                det,
                threshold,
            })
    }

    pub fn transpose(&self) -> DMatrix<f64> {
        self.m.transpose()
    }
}

pub fn torsion_matrix(curve: &PolynomialCurve, a: f64) -> TorsionMatrix {
    CurveJet::new(curve).torsion_matrix(a)
}

// ---------------------------------------------------------------------------
// Dilations and the pseudo-dilation frame
// ---------------------------------------------------------------------------

/// D^l⃗_δ = diag(δ^{l_1}, …, δ^{l_d}); δ = 0 is rejected (the matrix must be
/// invertible), negative δ implements time reversal.
pub fn dilation_matrix(exponents: &[u32], delta: f64) -> Result<DMatrix<f64>> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::invalid("dilation parameter must be finite and nonzero"));
    }
    let d = exponents.len();
    let mut m = DMatrix::zeros(d, d);
    for (j, &l) in exponents.iter().enumerate() {
        m[(j, j)] = delta.powi(l as i32);
    }
    Ok(m)
}

/// Moment-curve dilation D_δ = diag(δ, δ², …, δ^d).
pub fn moment_dilation(d: usize, delta: f64) -> Result<DMatrix<f64>> {
    dilation_matrix(&moment_exponents(d), delta)
}

/// γ_(a,δ) together with the frame data needed to invert the rescaling and to
/// track Jacobian factors in the extension identity.
#[derive(Debug, Clone)]
pub struct RescaledCurve {
    pub curve: PolynomialCurve,
    /// T(a) of the original curve.
    pub frame: TorsionMatrix,
    /// γ(a) of the original curve.
    pub base_value: DVector<f64>,
    pub basepoint: f64,
    pub delta: f64,
}

impl RescaledCurve {
    /// det(T(a) · D_δ) = L_γ(a) · δ^{d(d+1)/2}.
    pub fn jacobian_det(&self) -> f64 {
        let d = self.curve.dimension();
        self.frame.determinant() * self.delta.powi((d * (d + 1) / 2) as i32)
    }
}

/// γ_(a,δ)(t) = D_{δ⁻¹} T(a)⁻¹ (γ(a + δt) − γ(a)), exact in coefficients.
///
/// The result has zero constant term, unit leading jet (its torsion matrix at
/// 0 is the identity), and converges coefficientwise to the moment curve at
/// rate O(δ).
pub fn pseudo_rescale(curve: &PolynomialCurve, a: f64, delta: f64) -> Result<RescaledCurve> {
    if delta == 0.0 || !delta.is_finite() || !a.is_finite() {
        return Err(Error::invalid(
            "pseudo_rescale requires finite a and nonzero finite delta",
        ));
    }
    let d = curve.dimension();
    let frame = torsion_matrix(curve, a);
    let inv = frame.inverse()?;
    let base_value = curve.eval(a);

    // γ(a + δt) with the constant term removed; the constant term of the
    // composition is exactly γ(a), so zeroing it performs the subtraction
    // without extra rounding.
    let shifted = curve.compose_affine(a, delta);
    let centered = PolynomialCurve::from_components(
        shifted
            .components()
            .iter()
            .map(|c| {
                let mut coeffs = c.coeffs().to_vec();
                coeffs[0] = 0.0;
                Poly::new(coeffs)
            })
            .collect(),
    )?;

    let framed = centered.linear_map(&inv)?;
    let weights: Vec<f64> = (1..=d).map(|j| delta.powi(-(j as i32))).collect();
    let curve_out = framed.scale_components(&weights)?;

    Ok(RescaledCurve {
        curve: curve_out,
        frame,
        base_value,
        basepoint: a,
        delta,
    })
}

/// Invert `pseudo_rescale`: γ(s) = T(a) D_δ γ_(a,δ)((s − a)/δ) + γ(a).
pub fn pseudo_rescale_inverse(rescaled: &RescaledCurve) -> Result<PolynomialCurve> {
    let d = rescaled.curve.dimension();
    let a = rescaled.basepoint;
    let delta = rescaled.delta;
    let weights: Vec<f64> = (1..=d).map(|j| delta.powi(j as i32)).collect();
    let unweighted = rescaled.curve.scale_components(&weights)?;
    let framed = unweighted.linear_map(rescaled.frame.matrix())?;
    let recomposed = framed.compose_affine(-a / delta, 1.0 / delta);
    let components = recomposed
        .components()
        .iter()
        .zip(rescaled.base_value.iter())
        .map(|(c, &v)| {
            let mut coeffs = c.coeffs().to_vec();
            coeffs[0] += v;
            Poly::new(coeffs)
        })
        .collect();
    PolynomialCurve::from_components(components)
}

// ---------------------------------------------------------------------------
// C^N distance
// ---------------------------------------------------------------------------

/// Upper bound on max_{0≤j≤order} sup_{|t|≤radius} |a^{(j)}(t) − b^{(j)}(t)|
/// (max over components), computed from coefficient differences:
/// each monomial Δc·t^k contributes |Δc| · k!/(k−j)! · radius^{k−j}.
///
/// Zero exactly when the coefficient arrays agree.
pub fn curve_cn_distance(
    a: &PolynomialCurve,
    b: &PolynomialCurve,
    radius: f64,
    order: usize,
) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::invalid("curve dimension mismatch in C^N distance"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("C^N distance radius must be positive"));
    }
    let mut worst = 0.0f64;
    for j in 0..=order {
        for i in 0..a.dimension() {
            let pa = &a.components()[i];
            let pb = &b.components()[i];
            let len = pa.coeffs().len().max(pb.coeffs().len());
            let mut sum = 0.0;
            for k in j..len {
                let dc = (pa.coeff(k) - pb.coeff(k)).abs();
                if dc == 0.0 {
                    continue;
                }
                sum += dc * falling_factorial(k, j) * radius.powi((k - j) as i32);
            }
            worst = worst.max(sum);
        }
    }
    Ok(worst)
}

/// k · (k−1) ⋯ (k−j+1) as f64; equals 1 for j = 0.
fn falling_factorial(k: usize, j: usize) -> f64 {
    ((k - j + 1)..=k).map(|v| v as f64).product()
}

// ---------------------------------------------------------------------------
// Scaling pairs (p, q) on the scaling line
// ---------------------------------------------------------------------------

/// Exponent pair on the scaling line q = (d² + d)/2 · p′ with the validity
/// constraint q > (d² + d + 2)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPair {
    p: f64,
    q: f64,
    d: usize,
}

impl ScalingPair {
    /// The q forced by p on the scaling line in dimension d.
    pub fn scaling_q(p: f64, d: usize) -> f64 {
        let dd = (d * d + d) as f64;
        dd / 2.0 * p / (p - 1.0)
    }

    /// Build the pair from p alone (q derived).
    pub fn new(p: f64, d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::Scaling(format!(
                "dimension must be 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Scaling(format!("p must satisfy p > 1, got {p}")));
        }
        let q = Self::scaling_q(p, d);
        let q_min = ((d * d + d + 2) as f64) / 2.0;
        if !(q > q_min) {
            return Err(Error::Scaling(format!(
                "q = (d²+d)/2·p' = {q} must exceed (d²+d+2)/2 = {q_min} (p too large)"
            )));
        }
        Ok(ScalingPair { p, q, d })
    }

    /// Validate an explicitly supplied (p, q, d) triple.
    pub fn from_parts(p: f64, q: f64, d: usize) -> Result<Self> {
        let pair = Self::new(p, d)?;
        if (q - pair.q).abs() > 1e-9 * pair.q.max(1.0) {
            return Err(Error::Scaling(format!(
                "q = {q} is off the scaling line q = (d²+d)/2·p/(p−1) = {}",
                pair.q
            )));
        }
        Ok(pair)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Hölder conjugate p′ = p/(p − 1).
    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

// ---------------------------------------------------------------------------
// Curve spec text format
// ---------------------------------------------------------------------------

/// Parsed form of the small text format:
/// `monomial: [1, 3]` or `polynomial:` followed by one coefficient row per
/// component (whitespace separated, lowest degree first).
#[derive(Debug, Clone)]
pub enum CurveSpec {
    Monomial(MonomialCurve),
    Polynomial(PolynomialCurve),
}

impl CurveSpec {
    pub fn to_polynomial(&self) -> PolynomialCurve {
        match self {
            CurveSpec::Monomial(m) => m.to_polynomial(),
            CurveSpec::Polynomial(p) => p.clone(),
        }
    }

    pub fn monomial(&self) -> Option<&MonomialCurve> {
        match self {
            CurveSpec::Monomial(m) => Some(m),
            CurveSpec::Polynomial(_) => None,
        }
    }
}

pub fn parse_curve_spec(text: &str) -> Result<CurveSpec> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let head = lines
        .next()
        .ok_or_else(|| Error::invalid("empty curve spec"))?;
    if let Some(rest) = head.strip_prefix("monomial:") {
        let body = rest.trim();
        let body = body
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::invalid("monomial spec must look like: monomial: [1, 3]"))?;
        let exponents = body
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::invalid(format!("bad exponent {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveSpec::Monomial(MonomialCurve::new(exponents)?))
    } else if head.starts_with("polynomial:") {
        let mut rows = Vec::new();
        for line in lines {
            let row = line
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::invalid(format!("bad coefficient {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::invalid("polynomial spec needs coefficient rows"));
        }
        Ok(CurveSpec::Polynomial(PolynomialCurve::new(rows)?))
    } else {
        Err(Error::invalid(
            "curve spec must start with 'monomial:' or 'polynomial:'",
        ))
    }
}
