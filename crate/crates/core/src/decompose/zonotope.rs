//! Convex approximations of the sum map's image over Whitney cubes: each
//! index (m, n⃗, k) gets a zonotope centered at Γ(n⃗ + k⃗) built from torsion
//! frames applied to Taylor boxes, plus the two audits that certify the
//! approximation: containment of the sampled image (with fattening) and
//! pairwise disjointness within overlap classes.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::curves::{torsion_matrix, PolynomialCurve};
use crate::error::{Error, Result};

use super::geometry::curve_sum;

/// Enumeration budget for index families.
const INDEX_BUDGET: u64 = 1 << 24;

/// Relative slack used in membership tests so exact boundary points count
/// as inside.
const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Index triple (m, n⃗, k) on the dyadic lattice: n⃗ = 2^{−m} κ⃗ and
/// k = 2^{−m} κ_k. Cube side is 2^{−m}; one κ coordinate is zero and
/// |κ⃗| ≥ 2^K keeps the cube off the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AIndex {
    pub m: u32,
    pub kappa: Vec<u64>,
    pub kappa_k: u64,
}

impl AIndex {
    pub fn scale(&self) -> f64 {
        (-(self.m as f64)).exp2()
    }

    pub fn n(&self) -> Vec<f64> {
        let s = self.scale();
        self.kappa.iter().map(|&c| c as f64 * s).collect()
    }

    pub fn k(&self) -> f64 {
        self.kappa_k as f64 * self.scale()
    }

    pub fn admissible(&self, big_k: u32) -> bool {
        let cap = 1u64 << (2 * big_k);
        let norm_sq: u128 = self.kappa.iter().map(|&c| (c as u128) * (c as u128)).sum();
        let floor_sq = (1u128 << big_k) * (1u128 << big_k);
        self.m >= big_k
            && self.kappa.contains(&0)
            && self.kappa.iter().all(|&c| c <= cap)
            && norm_sq >= floor_sq
    }
}

/// All admissible indices for levels m ∈ [m_min, m_max]. With `fit_unit`
/// the translated cube 2^{−m}[0,1]^d + n⃗ + k⃗ must stay inside the unit
/// cube, which bounds k; otherwise k ranges over the lattice up to
/// `k_cap` (in units of 2^{−m}; defaults to k ≤ 1).
pub fn enumerate_indices(
    big_k: u32,
    m_min: u32,
    m_max: u32,
    d: usize,
    fit_unit: bool,
    k_cap: Option<u64>,
) -> Result<Vec<AIndex>> {
    if d < 2 || d > 3 {
        return Err(Error::invalid("index enumeration supports d = 2 or 3"));
    }
    if m_min < big_k {
        return Err(Error::invalid("index family needs m_min >= K"));
    }
    if m_max < m_min || m_max > 40 || 2 * big_k > 30 {
        return Err(Error::invalid("index family parameters out of range"));
    }
    let cap = 1u64 << (2 * big_k);
    let mut kappas: Vec<Vec<u64>> = Vec::new();
    if d == 2 {
        for c in 0..=cap {
            kappas.push(vec![0, c]);
            if c != 0 {
                kappas.push(vec![c, 0]);
            }
        }
    } else {
        for a in 0..=cap {
            for b in 0..=cap {
                kappas.push(vec![0, a, b]);
                if a != 0 {
                    kappas.push(vec![a, 0, b]);
                }
                if a != 0 && b != 0 {
                    kappas.push(vec![a, b, 0]);
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut visited: u64 = 0;
    for m in m_min..=m_max {
        let cells = 1u64 << m;
        for kappa in &kappas {
            let probe = AIndex {
                m,
                kappa: kappa.clone(),
                kappa_k: 0,
            };
            if !probe.admissible(big_k) {
                continue;
            }
            let max_coord = *kappa.iter().max().expect("nonempty");
            let k_end = if fit_unit {
                if max_coord + 1 > cells {
                    continue;
                }
                cells - max_coord - 1
            } else {
                k_cap.unwrap_or(cells)
            };
            visited += k_end + 1;
            if visited > INDEX_BUDGET {
                return Err(Error::Budget {
                    what: "index enumeration",
                    needed: visited,
                    budget: INDEX_BUDGET,
                });
            }
            for kappa_k in 0..=k_end {
                out.push(AIndex {
                    m,
                    kappa: kappa.clone(),
                    kappa_k,
                });
            }
        }
    }
    Ok(out)
}

/// Zonotope: Minkowski sum of the segments ±g about the center, realized
/// through its facet half-space representation (perpendiculars of the
/// generators for d = 2, pairwise cross products for d = 3).
#[derive(Debug, Clone)]
pub struct ConvexBody {
    center: Vec<f64>,
    generators: Vec<Vec<f64>>,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return None;
    }
    let mut u: Vec<f64> = v.iter().map(|x| x / norm).collect();
    // Canonical sign: first nonzero component positive.
    for x in u.iter() {
        if x.abs() > 1e-12 {
            if *x < 0.0 {
                for y in u.iter_mut() {
                    *y = -*y;
                }
            }
            break;
        }
    }
    Some(u)
}

fn facet_normals(generators: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut raw: Vec<Vec<f64>> = Vec::new();
    match dim {
        2 => {
            for g in generators {
                raw.push(vec![-g[1], g[0]]);
            }
        }
        3 => {
            for (i, a) in generators.iter().enumerate() {
                for b in generators.iter().skip(i + 1) {
                    raw.push(vec![
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    ]);
                }
            }
        }
        _ => {}
    }
    let mut normals: Vec<Vec<f64>> = Vec::new();
    for r in raw {
        if let Some(u) = unit(&r) {
            let seen = normals.iter().any(|n| {
                n.iter()
                    .zip(&u)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .abs()
                    > 1.0 - 1e-12
            });
            if !seen {
                normals.push(u);
            }
        }
    }
    normals
}

fn support_offset(generators: &[Vec<f64>], normal: &[f64]) -> f64 {
    generators
        .iter()
        .map(|g| g.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>().abs())
        .sum()
}

impl ConvexBody {
    pub fn from_parts(center: Vec<f64>, generators: Vec<Vec<f64>>) -> Result<Self> {
        let dim = center.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid("convex bodies support d = 2 or 3"));
        }
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::invalid("generator dimension mismatch"));
        }
        let normals = facet_normals(&generators, dim);
        if normals.is_empty() {
            return Err(Error::invalid("zonotope is degenerate: no facet normal"));
        }
        let offsets = normals
            .iter()
            .map(|n| support_offset(&generators, n))
            .collect();
        Ok(ConvexBody {
            center,
            generators,
            normals,
            offsets,
        })
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// Smallest slack across the facet inequalities, negative outside.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let u: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, &h)| h - n.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let scale = self.offsets.iter().cloned().fold(0.0f64, f64::max);
        self.margin(x) >= -MEMBERSHIP_SLACK * scale
    }

    /// Support function about the center, h(ν) = Σ |ν·g|.
    pub fn support(&self, direction: &[f64]) -> f64 {
        support_offset(&self.generators, direction)
    }

    /// Exact vertex polygon for d = 2, counterclockwise: parallel generators
    /// merge, the rest sort by angle, and the boundary walks each direction
    /// twice, so 2G directions give at most 2G vertices.
    pub fn vertices(&self) -> Result<Vec<[f64; 2]>> {
        if self.dimension() != 2 {
            return Err(Error::invalid("vertex polygon is only realized for d = 2"));
        }
        // Canonicalize into the upper half plane and merge parallels.
        let mut dirs: Vec<[f64; 2]> = Vec::new();
        for g in &self.generators {
            let mut v = [g[0], g[1]];
            if v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0) {
                v = [-v[0], -v[1]];
            }
            if v[0] == 0.0 && v[1] == 0.0 {
                continue;
            }
            if let Some(existing) = dirs
                .iter_mut()
                .find(|e| (e[0] * v[1] - e[1] * v[0]).abs() < 1e-14 * (v[0].hypot(v[1])))
            {
                existing[0] += v[0];
                existing[1] += v[1];
            } else {
                dirs.push(v);
            }
        }
        if dirs.is_empty() {
            return Err(Error::invalid("zonotope has no nonzero generator"));
        }
        dirs.sort_by(|a, b| {
            a[1].atan2(a[0])
                .partial_cmp(&b[1].atan2(b[0]))
                .expect("finite angles")
        });
        let mut v = [
            self.center[0] - dirs.iter().map(|d| d[0]).sum::<f64>(),
            self.center[1] - dirs.iter().map(|d| d[1]).sum::<f64>(),
        ];
        let mut out = Vec::with_capacity(2 * dirs.len());
        out.push(v);
        for d in &dirs {
            v = [v[0] + 2.0 * d[0], v[1] + 2.0 * d[1]];
            out.push(v);
        }
        for d in &dirs {
            v = [v[0] - 2.0 * d[0], v[1] - 2.0 * d[1]];
            if out.len() < 2 * dirs.len() {
                out.push(v);
            }
        }
        Ok(out)
    }
}

/// Membership of `u` (taken from the center) in the zonotope spanned by
/// `generators`, via the facet representation.
fn zonotope_contains(generators: &[Vec<f64>], u: &[f64], dim: usize) -> bool {
    let normals = facet_normals(generators, dim);
    if normals.is_empty() {
        return false;
    }
    normals.iter().all(|n| {
        let h = support_offset(generators, n);
        let x = n.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().abs();
        x <= h * (1.0 + MEMBERSHIP_SLACK)
    })
}

/// Two centrally symmetric bodies intersect exactly when the difference of
/// centers lies in the Minkowski sum of their generator systems.
pub fn bodies_intersect(a: &ConvexBody, b: &ConvexBody) -> bool {
    let dim = a.dimension();
    if dim != b.dimension() {
        return false;
    }
    let mut gens = a.generators.clone();
    gens.extend_from_slice(&b.generators);
    let delta: Vec<f64> = b
        .center
        .iter()
        .zip(&a.center)
        .map(|(x, y)| x - y)
        .collect();
    zonotope_contains(&gens, &delta, dim)
}

/// The convex approximation for one index: center Γ(n⃗ + k⃗) and, per cube
/// coordinate j, the torsion frame at n_j + k applied to the Taylor box
/// with half-widths λ^i/i!, λ = 2^{−m}.
pub fn convex_body(curve: &PolynomialCurve, m: u32, n: &[f64], k: f64) -> Result<ConvexBody> {
    let d = curve.dimension();
    if n.len() != d {
        return Err(Error::invalid("index dimension does not match the curve"));
    }
    if !(2..=3).contains(&d) {
        return Err(Error::invalid("convex bodies support d = 2 or 3"));
    }
    let lambda = (-(m as f64)).exp2();
    let basepoints: Vec<f64> = n.iter().map(|&nj| nj + k).collect();
    let center = curve_sum(curve, &basepoints);
    let mut generators = Vec::with_capacity(d * d);
    for &a in &basepoints {
        let frame = torsion_matrix(curve, a);
        frame.inverse()?;
        let mat = frame.matrix();
        let mut width = lambda;
        for i in 0..d {
            let g: Vec<f64> = (0..d).map(|row| mat[(row, i)] * width).collect();
            generators.push(g);
            width *= lambda / (i + 2) as f64;
        }
    }
    ConvexBody::from_parts(center, generators)
}

fn body_for_index(curve: &PolynomialCurve, index: &AIndex, shrink: f64) -> Result<ConvexBody> {
    let body = convex_body(curve, index.m, &index.n(), index.k())?;
    if shrink == 1.0 {
        return Ok(body);
    }
    let gens = body
        .generators
        .iter()
        .map(|g| g.iter().map(|x| x * shrink).collect())
        .collect();
    ConvexBody::from_parts(body.center.clone(), gens)
}

/// How far the curve is from the normalized moment form γ₀ + γ̃ with
/// γ̃^{(j)}(0) = 0 for j ≤ d: reports the worst low-order coefficient and
/// the C^N size of the perturbation on [0, 1].
#[derive(Debug, Clone, Copy)]
pub struct NormalizationCheck {
    pub ok: bool,
    /// max_{j ≤ N} sup_{[0,1]} |γ̃^{(j)}|.
    pub perturbation_norm: f64,
    /// Largest |coefficient| of γ̃ below degree d + 1, which must vanish.
    pub low_order_defect: f64,
}

pub fn normalization_check(curve: &PolynomialCurve, epsilon: f64) -> Result<NormalizationCheck> {
    let d = curve.dimension();
    let moment = PolynomialCurve::moment(d)?;
    let tilde = curve.sub(&moment)?;
    let mut low_order_defect = 0.0f64;
    for component in tilde.components() {
        for j in 0..=d {
            low_order_defect = low_order_defect.max(component.coeff(j).abs());
        }
    }
    let mut perturbation_norm = 0.0f64;
    let degree = curve.degree().max(d);
    for order in 0..=degree {
        let deriv = tilde.derivative(order);
        for i in 0..=512 {
            let t = i as f64 / 512.0;
            let v = deriv.eval(t);
            for x in v.iter() {
                perturbation_norm = perturbation_norm.max(x.abs());
            }
        }
    }
    Ok(NormalizationCheck {
        ok: low_order_defect < 1e-12 && perturbation_norm < epsilon,
        perturbation_norm,
        low_order_defect,
    })
}

#[derive(Debug, Clone)]
pub struct ContainmentOptions {
    /// Perturbation budget ε in the moment-form normalization.
    pub epsilon: f64,
    pub big_k: u32,
    /// Lattice points per axis when sampling the child cube.
    pub lattice: usize,
    /// Fattening radius in units of 2^{−m}; defaults to ε·2^{−(K+1)d}.
    pub delta_margin: Option<f64>,
    /// Shrink the bodies to demonstrate that the audit detects failures.
    pub undersized: bool,
}

impl ContainmentOptions {
    pub fn new(big_k: u32) -> Self {
        ContainmentOptions {
            epsilon: 0.05,
            big_k,
            lattice: 20,
            delta_margin: None,
            undersized: false,
        }
    }

    pub fn delta(&self, dimension: usize) -> f64 {
        self.delta_margin.unwrap_or(
            self.epsilon * (-(((self.big_k + 1) as usize * dimension) as f64)).exp2(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ContainmentReport {
    pub normalization: NormalizationCheck,
    pub indices: usize,
    /// Sampled (point, fattening corner) membership tests.
    pub checked: u64,
    pub violations: u64,
    /// Most negative membership margin seen (positive when everything is
    /// comfortably inside).
    pub worst_margin: f64,
    pub first_violation: Option<AIndex>,
}

/// Samples the sum map over each child cube R(m+1, n⃗, k), fattens by the
/// torsion image of the δ-box at k, and verifies membership in the level-m
/// body. Violations are counted, never asserted away.
pub fn containment_audit(
    curve: &PolynomialCurve,
    indices: &[AIndex],
    opts: &ContainmentOptions,
) -> Result<ContainmentReport> {
    let d = curve.dimension();
    if !(2..=3).contains(&d) {
        return Err(Error::invalid("containment audit supports d = 2 or 3"));
    }
    if opts.lattice < 2 {
        return Err(Error::invalid("containment lattice needs at least 2 points per axis"));
    }
    let normalization = normalization_check(curve, opts.epsilon)?;
    let shrink = if opts.undersized { 0.25 } else { 1.0 };
    let delta = opts.delta(d);
    let bodies: Vec<ConvexBody> = indices
        .par_iter()
        .map(|index| body_for_index(curve, index, shrink))
        .collect::<Result<Vec<_>>>()?;
    let per_index: Vec<(u64, u64, f64)> = indices
        .par_iter()
        .zip(bodies.par_iter())
        .map(|(index, body)| {
            let lambda = index.scale();
            let child = 0.5 * lambda;
            let corner: Vec<f64> = index.n().iter().map(|nj| nj + index.k()).collect();
            // Fattening offsets: torsion frame at k applied to the corners
            // of the Taylor box with parameter δ·2^{−m}.
            let frame = torsion_matrix(curve, index.k());
            let mat = frame.matrix();
            let mut offsets: Vec<Vec<f64>> = vec![vec![0.0; d]];
            let mut width = delta * lambda;
            for i in 0..d {
                let col: Vec<f64> = (0..d).map(|row| mat[(row, i)] * width).collect();
                let mut next = Vec::with_capacity(offsets.len() * 2);
                for base in &offsets {
                    let plus: Vec<f64> = base.iter().zip(&col).map(|(a, b)| a + b).collect();
                    let minus: Vec<f64> = base.iter().zip(&col).map(|(a, b)| a - b).collect();
                    next.push(plus);
                    next.push(minus);
                }
                offsets = next;
                width *= delta * lambda / (i + 2) as f64;
            }
            let mut checked = 0u64;
            let mut violations = 0u64;
            let mut worst = f64::INFINITY;
            let mut ts = vec![0usize; d];
            loop {
                let point: Vec<f64> = ts
                    .iter()
                    .zip(&corner)
                    .map(|(&i, &c)| c + child * i as f64 / (opts.lattice - 1) as f64)
                    .collect();
                let gamma = curve_sum(curve, &point);
                for offset in &offsets {
                    let probe: Vec<f64> =
                        gamma.iter().zip(offset).map(|(a, b)| a + b).collect();
                    let margin = body.margin(&probe);
                    worst = worst.min(margin);
                    checked += 1;
                    if !body.contains(&probe) {
                        violations += 1;
                    }
                }
                let mut axis = d;
                let mut done = true;
                while axis > 0 {
                    axis -= 1;
                    ts[axis] += 1;
                    if ts[axis] < opts.lattice {
                        done = false;
                        break;
                    }
                    ts[axis] = 0;
                }
                if done {
                    break;
                }
            }
            (checked, violations, worst)
        })
        .collect();
    let mut report = ContainmentReport {
        normalization,
        indices: indices.len(),
        checked: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        first_violation: None,
    };
    for (index, (checked, violations, worst)) in indices.iter().zip(&per_index) {
        report.checked += checked;
        report.violations += violations;
        report.worst_margin = report.worst_margin.min(*worst);
        if *violations > 0 && report.first_violation.is_none() {
            report.first_violation = Some(index.clone());
        }
    }
    Ok(report)
}

/// Class key from the proof's schedule, refined by the n⃗ pattern: indices
/// share a class only when their levels agree modulo L, their diagonal
/// lattice offsets agree modulo 2^L, and their n⃗ lattice vectors coincide.
/// Within a class this forces distinct indices to differ in m by at least L,
/// or in k by at least 2^{L−m} at equal m, and never to share (m, k).
pub fn class_key(index: &AIndex, l_param: u32) -> (u32, u64, Vec<u64>) {
    (
        index.m % l_param,
        index.kappa_k % (1u64 << l_param),
        index.kappa.clone(),
    )
}

#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub bodies: usize,
    pub classes: usize,
    pub max_class_size: usize,
    pub intra_class_pairs: u64,
    pub violations: u64,
    pub first_violation: Option<(AIndex, AIndex)>,
    /// Largest number of bodies containing a single probe point (taken at
    /// every body center), across the whole family, classes ignored.
    pub overlap_max: usize,
}

/// Partitions the indices into overlap classes and tests every intra-class
/// pair of bodies for intersection. Bounded overlap of the whole family is
/// measured separately by probing each body center.
pub fn overlap_audit(
    curve: &PolynomialCurve,
    indices: &[AIndex],
    l_param: u32,
) -> Result<OverlapReport> {
    if l_param == 0 || l_param > 32 {
        return Err(Error::invalid("overlap class parameter must be in 1..=32"));
    }
    let bodies: Vec<ConvexBody> = indices
        .par_iter()
        .map(|index| body_for_index(curve, index, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let mut classes: HashMap<(u32, u64, Vec<u64>), Vec<usize>> = HashMap::new();
    for (i, index) in indices.iter().enumerate() {
        classes.entry(class_key(index, l_param)).or_default().push(i);
    }
    let mut class_lists: Vec<&Vec<usize>> = classes.values().collect();
    class_lists.sort_by_key(|members| members[0]);
    let max_class_size = class_lists.iter().map(|m| m.len()).max().unwrap_or(0);
    let pair_jobs: Vec<(usize, usize)> = class_lists
        .iter()
        .flat_map(|members| {
            let mut pairs = Vec::with_capacity(members.len().saturating_sub(1));
            for (a, &i) in members.iter().enumerate() {
                for &j in members.iter().skip(a + 1) {
                    // Repeated indices denote the same body; disjointness is
                    // only meaningful for distinct indices.
                    if indices[i] != indices[j] {
                        pairs.push((i, j));
                    }
                }
            }
            pairs
        })
        .collect();
    let hits: Vec<bool> = pair_jobs
        .par_iter()
        .map(|&(i, j)| bodies_intersect(&bodies[i], &bodies[j]))
        .collect();
    let violations = hits.iter().filter(|h| **h).count() as u64;
    let first_violation = pair_jobs
        .iter()
        .zip(&hits)
        .find(|(_, h)| **h)
        .map(|(&(i, j), _)| (indices[i].clone(), indices[j].clone()));
    let overlap_max = probe_overlap_max(&bodies);
    Ok(OverlapReport {
        bodies: bodies.len(),
        classes: classes.len(),
        max_class_size,
        intra_class_pairs: pair_jobs.len() as u64,
        violations,
        first_violation,
        overlap_max,
    })
}

/// Max multiplicity of body membership over the centers, computed with a
/// bounding-box grid so only nearby bodies are tested.
fn probe_overlap_max(bodies: &[ConvexBody]) -> usize {
    if bodies.is_empty() {
        return 0;
    }
    let dim = bodies[0].dimension();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = bodies
        .iter()
        .map(|b| {
            let half: Vec<f64> = (0..dim)
                .map(|axis| b.generators.iter().map(|g| g[axis].abs()).sum::<f64>())
                .collect();
            let lo: Vec<f64> = b.center.iter().zip(&half).map(|(c, h)| c - h).collect();
            let hi: Vec<f64> = b.center.iter().zip(&half).map(|(c, h)| c + h).collect();
            (lo, hi)
        })
        .collect();
    let mut world_lo = boxes[0].0.clone();
    let mut world_hi = boxes[0].1.clone();
    for (lo, hi) in &boxes {
        for a in 0..dim {
            world_lo[a] = world_lo[a].min(lo[a]);
            world_hi[a] = world_hi[a].max(hi[a]);
        }
    }
    let cells_per_axis: usize = 128;
    let cell_of = |x: f64, axis: usize| -> usize {
        let span = (world_hi[axis] - world_lo[axis]).max(1e-300);
        (((x - world_lo[axis]) / span * cells_per_axis as f64) as usize)
            .min(cells_per_axis - 1)
    };
    let flatten = |coords: &[usize]| -> usize {
        coords.iter().fold(0, |acc, &c| acc * cells_per_axis + c)
    };
    let mut grid: HashMap<usize, Vec<usize>> = HashMap::new();
    for (bi, (lo, hi)) in boxes.iter().enumerate() {
        let lo_cells: Vec<usize> = (0..dim).map(|a| cell_of(lo[a], a)).collect();
        let hi_cells: Vec<usize> = (0..dim).map(|a| cell_of(hi[a], a)).collect();
        let mut coords = lo_cells.clone();
        loop {
            grid.entry(flatten(&coords)).or_default().push(bi);
            let mut axis = dim;
            let mut done = true;
            while axis > 0 {
                axis -= 1;
                coords[axis] += 1;
                if coords[axis] <= hi_cells[axis] {
                    done = false;
                    break;
                }
                coords[axis] = lo_cells[axis];
            }
            if done {
                break;
            }
        }
    }
    bodies
        .par_iter()
        .map(|b| {
            let coords: Vec<usize> = (0..dim).map(|a| cell_of(b.center[a], a)).collect();
            grid.get(&flatten(&coords))
                .map(|candidates| {
                    candidates
                        .iter()
                        .filter(|&&ci| bodies[ci].contains(&b.center))
                        .count()
                })
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}
