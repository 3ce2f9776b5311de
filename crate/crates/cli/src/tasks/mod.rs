//! Command registry: each CLI command is a boxed strategy object selected by
//! name at dispatch time.

pub mod ascent;
pub mod audit;
pub mod decompose;
pub mod drift;
pub mod identity;
pub mod psi;
pub mod scan;

use num_complex::Complex64;

use arcext_core::extension::{BoxSpec, Profile};
use arcext_core::{Error, Result};

use crate::config::{GridParams, ProfileParams, Resolved};
use crate::report::TaskOutput;

pub trait Task: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &Resolved) -> Result<TaskOutput>;
}

pub fn registry() -> Vec<Box<dyn Task>> {
    vec![
        Box::new(psi::PsiTable),
        Box::new(scan::TrialScan),
        Box::new(ascent::Extremize),
        Box::new(decompose::Decompose),
        Box::new(audit::Audit),
        Box::new(drift::Drift),
        Box::new(identity::IdentityCheck),
    ]
}

/// The symmetric evaluation box from the config, sized to the curve dimension.
pub fn box_spec(ctx: &Resolved) -> Result<BoxSpec> {
    BoxSpec::symmetric(
        ctx.poly.dimension(),
        ctx.cfg.box_params.radius,
        ctx.cfg.box_params.resolution,
    )
}

/// Builds the synthetic input profile named by the config on the config grid.
pub fn grid_profile(grid: &GridParams, params: &ProfileParams) -> Result<Profile> {
    let [a, b] = grid.support;
    let base = match params.kind.as_str() {
        "gaussian" => Profile::gaussian(a, b, grid.nodes, params.width)?,
        "indicator" => Profile::indicator(a, b, grid.nodes)?,
        "zero" => Profile::sample(a, b, grid.nodes, |_| Complex64::default())?,
        other => {
            return Err(Error::invalid(format!(
                "config error: unknown profile kind {other:?}; expected gaussian, indicator, or zero"
            )))
        }
    };
    if params.amplitude == 1.0 {
        Ok(base)
    } else {
        Ok(base.scale_values(Complex64::new(params.amplitude, 0.0)))
    }
}
