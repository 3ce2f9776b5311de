//! Sampled density profiles f(t) with their quadrature rule.
//!
//! A profile is a triple (nodes, weights, values). The weights are a plain
//! quadrature rule for ∫ f(t) dt over the node range (trapezoid by default),
//! but constructors may assign pushforward weights so that rescaled profiles
//! reproduce the original quadrature sums exactly. The function is understood
//! to vanish outside [nodes.first(), nodes.last()].

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
}

impl Profile {
    /// Validating constructor: strictly increasing finite nodes, strictly
    /// positive finite weights, finite values, equal lengths, at least 2 nodes.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("profile needs at least 2 nodes"));
        }
        if nodes.len() != weights.len() || nodes.len() != values.len() {
            return Err(Error::invalid(format!(
                "profile arrays must share a length: {} nodes, {} weights, {} values",
                nodes.len(),
                weights.len(),
                values.len()
            )));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("profile nodes must be finite"));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("profile nodes must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid("profile weights must be positive and finite"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite {
                op: "profile values".to_string(),
            });
        }
        Ok(Profile {
            nodes,
            weights,
            values,
        })
    }

    /// Uniform grid on [a, b] with m nodes (endpoints included) and trapezoid
    /// weights, sampling the given function.
    pub fn sample(a: f64, b: f64, m: usize, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid("profile interval must satisfy a < b"));
        }
        if m < 2 {
            return Err(Error::invalid("profile needs at least 2 nodes"));
        }
        let h = (b - a) / (m - 1) as f64;
        let nodes: Vec<f64> = (0..m).map(|i| a + h * i as f64).collect();
        let mut weights = vec![h; m];
        weights[0] = h / 2.0;
        weights[m - 1] = h / 2.0;
        let values = nodes.iter().map(|&t| f(t)).collect();
        Profile::from_parts(nodes, weights, values)
    }

    /// Real-valued convenience wrapper around `sample`.
    pub fn sample_real(a: f64, b: f64, m: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Profile::sample(a, b, m, |t| Complex64::new(f(t), 0.0))
    }

    /// Truncated Gaussian e^{−(t/width)²} on [a, b].
    pub fn gaussian(a: f64, b: f64, m: usize, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::invalid("gaussian width must be positive"));
        }
        Profile::sample_real(a, b, m, |t| (-(t / width) * (t / width)).exp())
    }

    /// Characteristic function of [a, b] sampled on its own m-point grid.
    pub fn indicator(a: f64, b: f64, m: usize) -> Result<Self> {
        Profile::sample_real(a, b, m, |_| 1.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Profile> {
        Profile::from_parts(self.nodes.clone(), self.weights.clone(), values)
    }

    /// Same grid, values mapped elementwise.
    pub fn map_values(&self, mut f: impl FnMut(f64, Complex64) -> Complex64) -> Result<Profile> {
        let values = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| f(t, v))
            .collect();
        self.with_values(values)
    }

    pub fn scale_values(&self, c: Complex64) -> Profile {
        Profile {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// ‖f‖_{L^p(dt)} with the profile's own quadrature weights.
    pub fn lp_norm_dt(&self, p: f64) -> f64 {
        let sum: f64 = self
            .weights
            .iter()
            .zip(&self.values)
            .map(|(&w, v)| w * v.norm().powf(p))
            .sum();
        sum.powf(1.0 / p)
    }

    /// Node-reversed profile t ↦ conj(f(−t)); the quadrature weights travel
    /// with their nodes.
    pub fn conjugate_reflect(&self) -> Profile {
        let n = self.len();
        let nodes = self.nodes.iter().rev().map(|&t| -t).collect();
        let weights = self.weights.iter().rev().copied().collect();
        let values = (0..n).map(|i| self.values[n - 1 - i].conj()).collect();
        Profile {
            nodes,
            weights,
            values,
        }
    }

    /// Node-reversed profile t ↦ f(−t) without conjugation.
    pub fn reflect(&self) -> Profile {
        let n = self.len();
        let nodes = self.nodes.iter().rev().map(|&t| -t).collect();
        let weights = self.weights.iter().rev().copied().collect();
        let values = (0..n).map(|i| self.values[n - 1 - i]).collect();
        Profile {
            nodes,
            weights,
            values,
        }
    }

    /// True when all nodes are (relatively) evenly spaced.
    pub fn is_uniform(&self) -> bool {
        let h0 = self.nodes[1] - self.nodes[0];
        self.nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0.abs())
    }
}
