//! Complex fields sampled on tensor-product grids over a box in ℝ^d.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Axis-aligned box with a per-axis resolution; grid points include both
/// endpoints of every axis and are enumerated row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    intervals: Vec<(f64, f64)>,
    resolution: Vec<usize>,
}

impl BoxSpec {
    pub fn new(intervals: Vec<(f64, f64)>, resolution: Vec<usize>) -> Result<Self> {
        let d = intervals.len();
        if d == 0 || d > 3 {
            return Err(Error::invalid(format!("box dimension must be 1..=3, got {d}")));
        }
        if resolution.len() != d {
            return Err(Error::invalid("box resolution length must match dimension"));
        }
        for (&(a, b), &n) in intervals.iter().zip(&resolution) {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::invalid("box intervals must satisfy a < b"));
            }
            if n < 2 {
                return Err(Error::invalid("box resolution must be at least 2 per axis"));
            }
        }
        Ok(BoxSpec {
            intervals,
            resolution,
        })
    }

    /// Cube [−r, r]^d at a common resolution per axis.
    pub fn symmetric(d: usize, r: f64, n: usize) -> Result<Self> {
        BoxSpec::new(vec![(-r, r); d], vec![n; d])
    }

    pub fn dimension(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn num_points(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn step(&self, axis: usize) -> f64 {
        let (a, b) = self.intervals[axis];
        (b - a) / (self.resolution[axis] - 1) as f64
    }

    /// Coordinates of the flat grid index (row-major, last axis fastest).
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let d = self.dimension();
        let mut rem = flat;
        for axis in (0..d).rev() {
            let n = self.resolution[axis];
            let i = rem % n;
            rem /= n;
            out[axis] = self.intervals[axis].0 + self.step(axis) * i as f64;
        }
    }

    /// Tensor trapezoid weight of the flat grid index.
    pub fn weight(&self, flat: usize) -> f64 {
        let d = self.dimension();
        let mut rem = flat;
        let mut w = 1.0;
        for axis in (0..d).rev() {
            let n = self.resolution[axis];
            let i = rem % n;
            rem /= n;
            let h = self.step(axis);
            w *= if i == 0 || i == n - 1 { h / 2.0 } else { h };
        }
        w
    }

    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(|&(a, b)| b - a).product()
    }

    /// The concentric box with half the side length per axis.
    pub fn half_box(&self) -> BoxSpec {
        let intervals = self
            .intervals
            .iter()
            .map(|&(a, b)| {
                let c = 0.5 * (a + b);
                let r = 0.25 * (b - a);
                (c - r, c + r)
            })
            .collect();
        BoxSpec {
            intervals,
            resolution: self.resolution.clone(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.intervals
            .iter()
            .zip(x)
            .all(|(&(a, b), &v)| v >= a && v <= b)
    }

    /// Apply a diagonal map x ↦ (s_1 x_1, …, s_d x_d) to the box. Negative
    /// scales flip the interval, keeping it ordered.
    pub fn scale_axes(&self, scales: &[f64]) -> Result<BoxSpec> {
        if scales.len() != self.dimension() {
            return Err(Error::invalid("axis scale length mismatch"));
        }
        let intervals = self
            .intervals
            .iter()
            .zip(scales)
            .map(|(&(a, b), &s)| {
                let (lo, hi) = (a * s, b * s);
                if s >= 0.0 {
                    (lo, hi)
                } else {
                    (hi, lo)
                }
            })
            .collect();
        BoxSpec::new(intervals, self.resolution.clone())
    }

    /// Translate the box by x0.
    pub fn translate(&self, x0: &[f64]) -> Result<BoxSpec> {
        if x0.len() != self.dimension() {
            return Err(Error::invalid("translation length mismatch"));
        }
        let intervals = self
            .intervals
            .iter()
            .zip(x0)
            .map(|(&(a, b), &v)| (a + v, b + v))
            .collect();
        BoxSpec::new(intervals, self.resolution.clone())
    }
}

/// A complex field on a box grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: BoxSpec,
    values: Vec<Complex64>,
}

/// L^q report with the half-box tail diagnostic: `tail_fraction` is the share
/// of the q-th-power integral carried outside the concentric half-size box.
#[derive(Debug, Clone, Copy)]
pub struct LqReport {
    pub value: f64,
    pub qth_power: f64,
    pub tail_fraction: f64,
    pub tail_ok: bool,
}

/// Tail fractions above this default are flagged in `LqReport::tail_ok`.
pub const DEFAULT_TAIL_TOL: f64 = 0.1;

impl Field {
    pub fn new(spec: BoxSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.num_points() {
            return Err(Error::GridMismatch(format!(
                "field needs {} values, got {}",
                spec.num_points(),
                values.len()
            )));
        }
        Ok(Field { spec, values })
    }

    /// Sample a closure on the grid.
    pub fn sample(spec: BoxSpec, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let d = spec.dimension();
        let mut x = [0.0f64; 3];
        let values = (0..spec.num_points())
            .map(|flat| {
                spec.point(flat, &mut x[..d]);
                f(&x[..d])
            })
            .collect();
        Field::new(spec, values)
    }

    pub fn spec(&self) -> &BoxSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Pointwise linear combination a·F + b·G on a shared grid.
    pub fn linear_combination(&self, other: &Field, a: Complex64, b: Complex64) -> Result<Field> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(
                "field combination requires identical box grids".to_string(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| a * u + b * v)
            .collect();
        Field::new(self.spec.clone(), values)
    }

    /// ∫_box |F|^q via the tensor trapezoid rule, with the half-box tail
    /// diagnostic. Returns an error if any field value is non-finite.
    pub fn lq_norm(&self, q: f64) -> Result<LqReport> {
        lq_norm_with_tol(self, q, DEFAULT_TAIL_TOL)
    }
}

pub fn lq_norm_with_tol(field: &Field, q: f64, tail_tol: f64) -> Result<LqReport> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::invalid("lq_norm requires finite q >= 1"));
    }
    let spec = field.spec();
    let d = spec.dimension();
    let half = spec.half_box();
    let mut x = [0.0f64; 3];
    let mut total = 0.0f64;
    let mut inner = 0.0f64;
    for (flat, v) in field.values().iter().enumerate() {
        let m = v.norm_sqr();
        if !m.is_finite() {
            return Err(Error::NonFinite {
                op: "lq_norm input field".to_string(),
            });
        }
        let contrib = spec.weight(flat) * m.powf(q / 2.0);
        total += contrib;
        spec.point(flat, &mut x[..d]);
        if half.contains(&x[..d]) {
            inner += contrib;
        }
    }
    let tail_fraction = if total > 0.0 { 1.0 - inner / total } else { 0.0 };
    Ok(LqReport {
        value: total.powf(1.0 / q),
        qth_power: total,
        tail_fraction,
        tail_ok: tail_fraction <= tail_tol,
    })
}
