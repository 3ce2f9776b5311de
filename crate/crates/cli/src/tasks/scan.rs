use serde_json::{Map, Value};

use arcext_core::curves::Parity;
use arcext_core::trials::{lower_bound_scan, TrialSpec};
use arcext_core::{Error, Result};

use crate::config::Resolved;
use crate::report::{diagnostics, num, Cell, Table, TaskOutput};
use crate::tasks::{box_spec, Task};

/// Rayleigh-ratio scan of the concentration trial family along a shrinking
/// delta schedule, with extrapolation to the limit and the independent target.
pub struct TrialScan;

impl Task for TrialScan {
    fn name(&self) -> &'static str {
        "trial-scan"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        let mono = ctx.curve.monomial().ok_or_else(|| {
            Error::invalid("config error: trial-scan requires a monomial curve spec")
        })?;
        let sp = &ctx.cfg.scan;
        if !(sp.shrink > 0.0 && sp.shrink < 1.0) {
            return Err(Error::invalid(
                "config error: scan.shrink must lie strictly between 0 and 1",
            ));
        }
        if sp.count < 2 {
            return Err(Error::invalid(
                "config error: scan.count must be at least 2 for extrapolation",
            ));
        }

        let bump = TrialSpec::default_bump(sp.bump_nodes)?;
        let partner = match mono.parity() {
            Parity::Odd => Some(bump.clone()),
            _ => None,
        };
        let spec = TrialSpec::new(bump, partner, sp.alpha, sp.delta0, sp.truncation)?;
        let deltas: Vec<f64> = (0..sp.count)
            .map(|i| sp.delta0 * sp.shrink.powi(i as i32))
            .collect();
        let bx = box_spec(ctx)?;
        let report = lower_bound_scan(mono, &spec, &deltas, &ctx.pair, &bx)?;

        let mut table = Table::new(vec!["delta", "ratio", "aliased", "tail_ok"]);
        let mut any_aliased = false;
        let mut all_tails = true;
        for row in &report.rows {
            any_aliased |= row.aliased;
            all_tails &= row.tail_ok;
            table.push(vec![
                Cell::Float(row.delta),
                Cell::Float(row.ratio),
                Cell::Int(row.aliased as i64),
                Cell::Int(row.tail_ok as i64),
            ]);
        }

        let mut summary = Map::new();
        summary.insert("target".to_string(), num(report.target, "scan target")?);
        summary.insert(
            "extrapolated".to_string(),
            num(report.extrapolated, "scan extrapolation")?,
        );
        summary.insert(
            "fit_residual".to_string(),
            num(report.fit_residual, "scan fit residual")?,
        );
        summary.insert(
            "relative_gap".to_string(),
            num(report.relative_gap, "scan relative gap")?,
        );
        summary.insert("rows".to_string(), Value::from(report.rows.len() as u64));
        summary.insert(
            "diagnostics".to_string(),
            diagnostics(Some(all_tails), Some(any_aliased)),
        );
        Ok(TaskOutput {
            table,
            extra: Vec::new(),
            summary,
        })
    }
}
