use serde_json::{Map, Value};

use arcext_core::interaction::{psi, psi_max};
use arcext_core::{Error, Result};

use crate::config::Resolved;
use crate::report::{diagnostics, num, Cell, Table, TaskOutput};
use crate::tasks::Task;

/// Tabulates the interaction function on [0, 1] and reports its maximum.
pub struct PsiTable;

impl Task for PsiTable {
    fn name(&self) -> &'static str {
        "psi-table"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        let points = ctx.cfg.psi.points;
        if points < 2 {
            return Err(Error::invalid(
                "config error: psi.points must be at least 2",
            ));
        }
        let (p, q) = (ctx.pair.p(), ctx.pair.q());
        let mut table = Table::new(vec!["t", "psi"]);
        for i in 0..points {
            let t = i as f64 / (points - 1) as f64;
            table.push(vec![Cell::Float(t), Cell::Float(psi(p, q, t)?)]);
        }
        let max = psi_max(p, q)?;
        let mut summary = Map::new();
        summary.insert("psi_max".to_string(), num(max.psi_max, "psi_max")?);
        summary.insert("alpha".to_string(), num(max.argmax_alpha, "psi argmax")?);
        summary.insert("grid_points".to_string(), Value::from(points as u64));
        summary.insert("diagnostics".to_string(), diagnostics(None, None));
        Ok(TaskOutput {
            table,
            extra: Vec::new(),
            summary,
        })
    }
}
