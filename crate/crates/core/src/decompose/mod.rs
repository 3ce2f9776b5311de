//! Localization machinery: dyadic intervals of comparable density, greedy
//! chip decompositions with height caps, Whitney cubes off the diagonal with
//! their convex zonotope approximations and disjointness audits, and a
//! surrogate profile extraction for curve families.

pub mod chips;
pub mod extract;
pub mod geometry;
pub mod intervals;
pub mod whitney;
pub mod zonotope;

pub use chips::{chip_decompose, Chip, ChipDecomposition, ChipTailBound};
pub use extract::{profile_extract, ExtractOptions, ExtractReport, ExtractStage};
pub use geometry::{covering_intervals, curve_sum, geom_ineq_floor, geom_ineq_ratio};
pub use intervals::{enumerate_intervals, lambda_mass, DyadicInterval};
pub use whitney::{whitney_coverage, whitney_cubes, CoverageReport, WhitneyCube};
pub use zonotope::{
    bodies_intersect, class_key, containment_audit, convex_body, enumerate_indices,
    normalization_check, overlap_audit, AIndex, ContainmentOptions, ContainmentReport,
    ConvexBody, NormalizationCheck, OverlapReport,
};
