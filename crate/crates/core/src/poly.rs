//! Dense univariate polynomials over f64.
//!
//! Coefficients are stored lowest degree first with exactly-zero leading
//! coefficients trimmed, so structurally equal polynomials compare equal.
//! Ring operations never round coefficients, so coefficient-level identities
//! such as rescale round-trips can be asserted tightly in tests.

/// Polynomial c₀ + c₁ t + … + c_n tⁿ, coefficients lowest degree first.
///
/// The coefficient vector is never empty; the zero polynomial is `[0.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// Monomial c·t^k.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of t^k (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Degree ignoring exactly-zero leading coefficients (zero polynomial has degree 0).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(coeffs)
    }

    pub fn derivative_n(&self, order: usize) -> Poly {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.derivative();
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// Substitute t ← a + b·t (exact binomial expansion via Horner over the ring).
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly {
        let lin = Poly::new(vec![a, b]);
        let mut acc = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c));
        }
        acc
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion.
///
/// Used for symbolic torsion (matrix entries are derivative components), so
/// sizes stay at most 4×4 and the exponential cofactor cost is irrelevant.
pub fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "square matrix required");
    if n == 0 {
        return Poly::constant(1.0);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Poly::zero();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = entry.mul(&poly_det(&minor));
        det = if j % 2 == 0 { det.add(&term) } else { det.sub(&term) };
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_affine_expands_binomials() {
        // (a + bt)^3 coefficient check against the binomial theorem.
        let p = Poly::monomial(1.0, 3);
        let q = p.compose_affine(2.0, 0.5);
        assert_eq!(q.coeff(0), 8.0);
        assert_eq!(q.coeff(1), 3.0 * 4.0 * 0.5);
        assert_eq!(q.coeff(2), 3.0 * 2.0 * 0.25);
        assert_eq!(q.coeff(3), 0.125);
    }

    #[test]
    fn derivative_and_eval_agree() {
        let p = Poly::new(vec![1.0, -2.0, 0.5, 3.0]);
        let dp = p.derivative();
        let t = 0.7;
        let h = 1e-6;
        let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
        assert!((dp.eval(t) - fd).abs() < 1e-8);
    }

    #[test]
    fn det_of_diagonal_is_product() {
        let m = vec![
            vec![Poly::monomial(1.0, 1), Poly::zero()],
            vec![Poly::zero(), Poly::monomial(2.0, 2)],
        ];
        let d = poly_det(&m);
        assert_eq!(d, Poly::monomial(2.0, 3));
    }
}
