use serde_json::{Map, Value};

use arcext_core::extension::{extend, Profile};
use arcext_core::interaction::{drift_schedule, psi_max};
use arcext_core::{Error, Result};

use crate::config::Resolved;
use crate::report::{diagnostics, num, opt_num, Cell, Table, TaskOutput};
use crate::tasks::{box_spec, Task};

/// Tracks the drifting two-profile norm along a geometric scale schedule and
/// compares it with the circle-averaged limit and its interaction bound.
pub struct Drift;

impl Task for Drift {
    fn name(&self) -> &'static str {
        "drift"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        let mono = ctx.curve.monomial().ok_or_else(|| {
            Error::invalid("config error: drift requires a monomial curve spec")
        })?;
        let dp = &ctx.cfg.drift;
        let d = ctx.poly.dimension();
        let velocity = dp.velocity.clone().unwrap_or_else(|| vec![1.0; d]);
        if velocity.len() != d {
            return Err(Error::invalid(format!(
                "config error: drift.velocity must have {d} components"
            )));
        }
        let ell: Vec<f64> = mono.exponents().iter().map(|&e| e as f64).collect();
        let [a, b] = ctx.cfg.grid.support;
        let nodes = ctx.cfg.grid.nodes;
        let bx = box_spec(ctx)?;
        let q = ctx.pair.q();

        let f = extend(&ctx.poly, &Profile::gaussian(a, b, nodes, dp.width_f)?, &bx)?;
        let g = extend(&ctx.poly, &Profile::gaussian(a, b, nodes, dp.width_g)?, &bx)?;
        let report = drift_schedule(&f, &g, &velocity, &ell, dp.lambda0, dp.growth, dp.steps, q)?;

        let mut table = Table::new(vec!["lambda", "qth_power", "aliased", "cycles"]);
        let mut any_aliased = false;
        for s in &report.samples {
            any_aliased |= s.aliased;
            table.push(vec![
                Cell::Float(s.lambda),
                Cell::Float(s.qth_power),
                Cell::Int(s.aliased as i64),
                Cell::Float(s.cycles),
            ]);
        }

        let nf = f.lq_norm(q)?;
        let ng = g.lq_norm(q)?;
        let psi = psi_max(ctx.pair.p(), q)?.psi_max;
        let bound = psi * (nf.value * nf.value + ng.value * ng.value).powf(q / 2.0);

        let mut summary = Map::new();
        summary.insert(
            "theta_average".to_string(),
            num(report.theta_average, "theta average")?,
        );
        summary.insert("settled_mean".to_string(), opt_num(report.settled_mean));
        summary.insert("psi_bound".to_string(), num(bound, "interaction bound")?);
        summary.insert(
            "within_bound".to_string(),
            report
                .settled_mean
                .map(|s| Value::Bool(s <= bound * 1.01))
                .unwrap_or(Value::Null),
        );
        summary.insert(
            "samples".to_string(),
            Value::from(report.samples.len() as u64),
        );
        summary.insert(
            "diagnostics".to_string(),
            diagnostics(Some(nf.tail_ok && ng.tail_ok), Some(any_aliased)),
        );
        Ok(TaskOutput {
            table,
            extra: Vec::new(),
            summary,
        })
    }
}
