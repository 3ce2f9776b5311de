use serde_json::{Map, Value};

use arcext_core::extremize::{ascend, default_init, AscentOptions};
use arcext_core::Result;

use crate::config::Resolved;
use crate::report::{diagnostics, num, Cell, Table, TaskOutput};
use crate::tasks::{box_spec, Task};

/// Projected gradient ascent on the Rayleigh quotient, reporting the ratio
/// history and the final profile.
pub struct Extremize;

impl Task for Extremize {
    fn name(&self) -> &'static str {
        "extremize"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        let ap = &ctx.cfg.ascent;
        let [a, b] = ctx.cfg.grid.support;
        let init = default_init(a, b, ap.nodes, ctx.seed)?;
        let options = AscentOptions {
            max_iterations: ap.iterations,
            rel_gain_tol: ap.tol,
            initial_step: ap.step,
            max_backtracks: 40,
        };
        let bx = box_spec(ctx)?;
        let report = ascend(&ctx.poly, &ctx.pair, &init, &bx, &options)?;

        let mut table = Table::new(vec!["iteration", "ratio"]);
        for (i, r) in report.history.iter().enumerate() {
            table.push(vec![Cell::Int(i as i64), Cell::Float(*r)]);
        }

        let mut profile = Table::new(vec!["node", "weight", "re", "im"]);
        let final_profile = &report.state.profile;
        for ((&t, &w), v) in final_profile
            .nodes()
            .iter()
            .zip(final_profile.weights())
            .zip(final_profile.values())
        {
            profile.push(vec![
                Cell::Float(t),
                Cell::Float(w),
                Cell::Float(v.re),
                Cell::Float(v.im),
            ]);
        }

        let mut header = Map::new();
        header.insert(
            "support".to_string(),
            Value::Array(vec![Value::from(a), Value::from(b)]),
        );
        header.insert("nodes".to_string(), Value::from(ap.nodes as u64));
        header.insert("curve".to_string(), Value::from(ctx.cfg.curve.clone()));
        header.insert("p".to_string(), num(ctx.pair.p(), "p")?);
        header.insert("q".to_string(), num(ctx.pair.q(), "q")?);

        let mut summary = Map::new();
        summary.insert(
            "final_ratio".to_string(),
            num(report.state.ratio, "ascent ratio")?,
        );
        summary.insert(
            "residual".to_string(),
            num(report.state.residual, "ascent residual")?,
        );
        summary.insert(
            "iterations".to_string(),
            Value::from(report.state.iteration as u64),
        );
        summary.insert(
            "refined_ratio_drift".to_string(),
            num(report.refined_ratio_drift, "refinement drift")?,
        );
        summary.insert("profile_header".to_string(), Value::Object(header));
        summary.insert(
            "diagnostics".to_string(),
            diagnostics(Some(report.tail_ok), None),
        );
        Ok(TaskOutput {
            table,
            extra: vec![("profile.csv".to_string(), profile)],
            summary,
        })
    }
}
