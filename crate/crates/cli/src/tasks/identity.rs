use serde_json::{Map, Value};

use arcext_core::extension::{blowup_identity_check, check_points, extend_at_points, Profile};
use arcext_core::{Error, Result};

use crate::config::Resolved;
use crate::report::{diagnostics, num, Cell, Table, TaskOutput};
use crate::tasks::{box_spec, Task};

/// Verifies the exact blow-up identity pointwise on a low-discrepancy point
/// set and checks the companion norm identity.
pub struct IdentityCheck;

impl Task for IdentityCheck {
    fn name(&self) -> &'static str {
        "identity-check"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        let ip = &ctx.cfg.identity;
        if ip.points == 0 {
            return Err(Error::invalid(
                "config error: identity.points must be positive",
            ));
        }
        let [a, b] = ctx.cfg.grid.support;
        let f = Profile::gaussian(a, b, ctx.cfg.grid.nodes, ip.width)?;
        let bx = box_spec(ctx)?;
        let points = check_points(&bx, ip.points);
        let report = blowup_identity_check(&ctx.poly, &ctx.pair, ip.a, ip.delta, &f, &points)?;
        let lhs = extend_at_points(&ctx.poly, &f, &points)?;

        let d = ctx.poly.dimension();
        let mut table = Table::new(vec!["x0", "x1", "x2", "re", "im"]);
        for (x, v) in points.iter().zip(&lhs) {
            table.push(vec![
                Cell::Float(x[0]),
                Cell::Float(if d > 1 { x[1] } else { 0.0 }),
                Cell::Float(if d > 2 { x[2] } else { 0.0 }),
                Cell::Float(v.re),
                Cell::Float(v.im),
            ]);
        }

        let mut summary = Map::new();
        summary.insert(
            "max_pointwise_rel".to_string(),
            num(report.max_pointwise_rel, "blow-up pointwise check")?,
        );
        summary.insert(
            "norm_rel".to_string(),
            num(report.norm_rel, "blow-up norm identity")?,
        );
        summary.insert("scale".to_string(), num(report.scale, "blow-up scale")?);
        summary.insert("points".to_string(), Value::from(ip.points as u64));
        summary.insert("basepoint".to_string(), num(ip.a, "basepoint")?);
        summary.insert("delta".to_string(), num(ip.delta, "delta")?);
        summary.insert("diagnostics".to_string(), diagnostics(None, None));
        Ok(TaskOutput {
            table,
            extra: Vec::new(),
            summary,
        })
    }
}
