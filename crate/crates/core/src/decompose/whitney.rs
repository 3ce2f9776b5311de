//! Whitney cubes: dyadic cubes of the unit cube whose max-norm distance to
//! the diagonal segment is between 2^K and 4^K side lengths. They tile the
//! unit cube away from the diagonal with boundedly many overlaps.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Enumeration budget: refuse level/dimension combinations that would visit
/// more lattice cubes than this.
const CUBE_BUDGET: u64 = 1 << 26;

/// The dyadic cube 2^{−m}·(i⃗ + [0,1]^d).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WhitneyCube {
    m: u32,
    coords: Vec<u64>,
}

/// Max-norm distance from a point to the diagonal {(t,…,t) : t ∈ [0,1]}.
/// The optimal parameter is the midrange of the coordinates, clamped.
pub fn point_diag_distance(x: &[f64]) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let t = (0.5 * (lo + hi)).clamp(0.0, 1.0);
    x.iter().map(|&c| (c - t).abs()).fold(0.0, f64::max)
}

impl WhitneyCube {
    pub fn new(m: u32, coords: Vec<u64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("cube needs at least one coordinate"));
        }
        let cells = 1u64 << m.min(63);
        if coords.iter().any(|&c| c >= cells) {
            return Err(Error::invalid("cube lattice coordinates exceed the unit cube"));
        }
        Ok(WhitneyCube { m, coords })
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn side(&self) -> f64 {
        (-(self.m as f64)).exp2()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn corner(&self) -> Vec<f64> {
        let s = self.side();
        self.coords.iter().map(|&c| c as f64 * s).collect()
    }

    /// Exact max-norm distance to the diagonal segment. The minimax
    /// parameter binds only the largest and smallest corner coordinates,
    /// so the distance is (max_j a_j − min_j a_j − side)/2, floored at 0.
    pub fn diag_distance(&self) -> f64 {
        let spread = self.coord_spread();
        if spread <= 1 {
            0.0
        } else {
            (spread - 1) as f64 * 0.5 * self.side()
        }
    }

    /// max_j i_j − min_j i_j on the lattice.
    fn coord_spread(&self) -> u64 {
        let lo = *self.coords.iter().min().expect("nonempty");
        let hi = *self.coords.iter().max().expect("nonempty");
        hi - lo
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.coords
            .iter()
            .zip(x)
            .all(|(&c, &xi)| xi >= c as f64 * s && xi <= (c + 1) as f64 * s)
            && x.len() == self.coords.len()
    }
}

/// Whether the lattice spread qualifies a level-m cube for the Whitney
/// family with gap parameter K: 2^{−m+K} ≤ dist ≤ 2^{−m+2K} in exact
/// integer form.
fn spread_admissible(spread: u64, big_k: u32) -> bool {
    let lo = (1u64 << (big_k + 1)) + 1;
    let hi = (1u64 << (2 * big_k + 1)) + 1;
    spread >= lo && spread <= hi
}

/// All dyadic cubes of side 2^{−m}, m ∈ [m_min, m_max], inside the unit
/// cube whose distance to the diagonal is between 2^{−m+K} and 2^{−m+2K}.
pub fn whitney_cubes(big_k: u32, m_min: u32, m_max: u32, d: usize) -> Result<Vec<WhitneyCube>> {
    if d < 2 || d > 3 {
        return Err(Error::invalid("whitney enumeration supports d = 2 or 3"));
    }
    if m_min < big_k {
        return Err(Error::invalid("whitney family needs m_min >= K"));
    }
    if m_max < m_min {
        return Err(Error::invalid("whitney family needs m_max >= m_min"));
    }
    let mut total: u64 = 0;
    for m in m_min..=m_max {
        let per_axis = 1u64 << m.min(63);
        total = total.saturating_add(per_axis.saturating_pow(d as u32));
    }
    if total > CUBE_BUDGET {
        return Err(Error::Budget {
            what: "whitney cube enumeration",
            needed: total,
            budget: CUBE_BUDGET,
        });
    }
    let mut out = Vec::new();
    for m in m_min..=m_max {
        let cells = 1u64 << m;
        let mut coords = vec![0u64; d];
        'outer: loop {
            let lo = *coords.iter().min().expect("nonempty");
            let hi = *coords.iter().max().expect("nonempty");
            if spread_admissible(hi - lo, big_k) {
                out.push(WhitneyCube {
                    m,
                    coords: coords.clone(),
                });
            }
            let mut axis = d;
            while axis > 0 {
                axis -= 1;
                coords[axis] += 1;
                if coords[axis] < cells {
                    continue 'outer;
                }
                coords[axis] = 0;
            }
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageReport {
    /// Sample points whose distance band guarantees an admissible cube at
    /// some level in range.
    pub band_samples: usize,
    /// Band samples not contained in any returned cube; zero when the
    /// family covers its band.
    pub uncovered: usize,
    /// Largest number of returned cubes containing one sample point.
    pub max_overlap: usize,
}

/// Sampling audit of the covering property: on an `samples_per_axis`^d grid
/// of the open unit cube, every point whose diagonal distance lies in the
/// guaranteed band for some level m (lattice quantization margin included)
/// must land in at least one returned cube.
pub fn whitney_coverage(
    cubes: &[WhitneyCube],
    big_k: u32,
    m_min: u32,
    m_max: u32,
    d: usize,
    samples_per_axis: usize,
) -> Result<CoverageReport> {
    if d < 2 || d > 3 {
        return Err(Error::invalid("coverage audit supports d = 2 or 3"));
    }
    if samples_per_axis < 2 {
        return Err(Error::invalid("coverage audit needs at least 2 samples per axis"));
    }
    let index: HashSet<&WhitneyCube> = cubes.iter().collect();
    let mut report = CoverageReport {
        band_samples: 0,
        uncovered: 0,
        max_overlap: 0,
    };
    let n = samples_per_axis;
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) / n as f64).collect();
        let dist = point_diag_distance(&x);
        // A point is guaranteed coverable at level m when its coordinate
        // spread 2·dist, measured in lattice cells, clears the admissibility
        // thresholds with one cell to spare on each side.
        let guaranteed = (m_min..=m_max).any(|m| {
            let cells = (1u64 << m) as f64;
            let spread_cells = 2.0 * dist * cells;
            let lo = ((1u64 << (big_k + 1)) + 2) as f64;
            let hi = ((1u64 << (2 * big_k + 1))) as f64;
            spread_cells >= lo && spread_cells <= hi
        });
        let mut overlap = 0usize;
        for m in m_min..=m_max {
            let cells = (1u64 << m) as f64;
            let coords: Vec<u64> = x.iter().map(|&c| (c * cells).floor() as u64).collect();
            let probe = WhitneyCube { m, coords };
            if index.contains(&probe) {
                overlap += 1;
            }
        }
        report.max_overlap = report.max_overlap.max(overlap);
        if guaranteed {
            report.band_samples += 1;
            if overlap == 0 {
                report.uncovered += 1;
            }
        }
        let mut axis = d;
        let mut done = true;
        while axis > 0 {
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < n {
                done = false;
                break;
            }
            idx[axis] = 0;
        }
        if done {
            return Ok(report);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_distance_uses_the_midrange() {
        assert!((point_diag_distance(&[0.2, 0.8]) - 0.3).abs() < 1e-15);
        assert_eq!(point_diag_distance(&[0.4, 0.4]), 0.0);
        assert!((point_diag_distance(&[0.0, 1.0]) - 0.5).abs() < 1e-15);
        assert!((point_diag_distance(&[0.1, 0.5, 0.9]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn every_returned_cube_sits_in_the_distance_band() {
        let big_k = 2;
        let cubes = whitney_cubes(big_k, 4, 6, 2).expect("enumeration");
        assert!(!cubes.is_empty());
        for cube in &cubes {
            let side = cube.side();
            let lo = (big_k as f64).exp2() * side;
            let hi = (2.0 * big_k as f64).exp2() * side;
            let dist = cube.diag_distance();
            assert!(dist >= lo - 1e-15 && dist <= hi + 1e-15);
        }
    }

    #[test]
    fn cube_distance_is_attained_at_the_inner_corner() {
        let cubes = whitney_cubes(2, 4, 5, 2).expect("enumeration");
        for cube in cubes.iter().take(40) {
            let s = cube.side();
            let c = cube.coords();
            let (lo, hi) = (c.iter().min().unwrap(), c.iter().max().unwrap());
            // Nearest point of the cube to the diagonal: max coordinate at
            // its low face, min coordinate at its high face.
            let corner: Vec<f64> = c
                .iter()
                .map(|&ci| {
                    if ci == *hi {
                        ci as f64 * s
                    } else if ci == *lo {
                        (ci + 1) as f64 * s
                    } else {
                        (ci as f64 + 0.5) * s
                    }
                })
                .collect();
            assert!((point_diag_distance(&corner) - cube.diag_distance()).abs() < 1e-15);
        }
    }

    #[test]
    fn low_levels_admit_no_cubes() {
        // At m < K + 2 the unit cube is too coarse for the required gap.
        assert!(whitney_cubes(2, 2, 3, 2).expect("enumeration").is_empty());
        assert!(!whitney_cubes(2, 4, 4, 2).expect("enumeration").is_empty());
    }

    #[test]
    fn guaranteed_band_is_fully_covered() {
        let (big_k, m_min, m_max) = (2, 4, 7);
        let cubes = whitney_cubes(big_k, m_min, m_max, 2).expect("enumeration");
        let report =
            whitney_coverage(&cubes, big_k, m_min, m_max, 2, 200).expect("coverage audit");
        assert!(report.band_samples > 0);
        assert_eq!(report.uncovered, 0);
        assert!(report.max_overlap >= 1);
        assert!(report.max_overlap <= (m_max - m_min + 1) as usize);
    }

    #[test]
    fn coverage_holds_in_three_dimensions() {
        let (big_k, m_min, m_max) = (1, 3, 4);
        let cubes = whitney_cubes(big_k, m_min, m_max, 3).expect("enumeration");
        assert!(!cubes.is_empty());
        let report =
            whitney_coverage(&cubes, big_k, m_min, m_max, 3, 64).expect("coverage audit");
        assert!(report.band_samples > 0);
        assert_eq!(report.uncovered, 0);
    }

    #[test]
    fn budget_and_parameter_errors() {
        assert!(matches!(
            whitney_cubes(2, 14, 14, 2),
            Err(Error::Budget { .. })
        ));
        assert!(whitney_cubes(2, 1, 4, 2).is_err());
        assert!(whitney_cubes(2, 4, 3, 2).is_err());
        assert!(whitney_cubes(2, 4, 5, 4).is_err());
        assert!(whitney_coverage(&[], 2, 4, 5, 2, 1).is_err());
    }
}
