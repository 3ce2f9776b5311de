use serde_json::{Map, Value};

use arcext_core::decompose::{chip_decompose, whitney_coverage, whitney_cubes};
use arcext_core::extension::{extend, lp_lambda_norm, Field};
use arcext_core::{Error, Result};

use crate::config::Resolved;
use crate::report::{diagnostics, num, Cell, Table, TaskOutput};
use crate::tasks::{box_spec, grid_profile, Task};

/// Localization front-end with three modes: greedy chip extraction, Whitney
/// cube enumeration with a coverage audit, and the zonotope audits.
pub struct Decompose;

impl Task for Decompose {
    fn name(&self) -> &'static str {
        "decompose"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        match ctx.cfg.decompose.mode.as_str() {
            "chips" => chips_output(ctx),
            "whitney" => whitney_output(ctx),
            "audit" => super::audit::audit_output(ctx),
            other => Err(Error::invalid(format!(
                "config error: unknown decompose mode {other:?}; expected chips, whitney, or audit"
            ))),
        }
    }
}

fn chips_output(ctx: &Resolved) -> Result<TaskOutput> {
    let dp = &ctx.cfg.decompose;
    let profile = grid_profile(&ctx.cfg.grid, &dp.profile)?;
    let p = ctx.pair.p();
    let dec = chip_decompose(&ctx.poly, &profile, p, dp.k_max)?;

    let mut table = Table::new(vec!["k", "tau_lo", "tau_hi", "level", "height_cap", "mass"]);
    for chip in &dec.chips {
        let (lo, hi) = chip.interval.interval();
        table.push(vec![
            Cell::Int(chip.index as i64),
            Cell::Float(lo),
            Cell::Float(hi),
            Cell::Int(chip.interval.level() as i64),
            Cell::Float(chip.height_cap),
            Cell::Float(chip.mass),
        ]);
    }

    let residual_norm = if dec.norm > 0.0 {
        lp_lambda_norm(&ctx.poly, &dec.residual, p)?
    } else {
        0.0
    };

    // Exploratory commensurability surrogate: normalized overlap of the chip
    // extensions, ‖E_i E_j‖_{q/2} / (‖E_i‖_q ‖E_j‖_q), pairwise.
    let commensurability = if dec.chips.len() >= 2 {
        let bx = box_spec(ctx)?;
        let q = ctx.pair.q();
        let fields = dec
            .chips
            .iter()
            .map(|c| extend(&ctx.poly, &c.piece, &bx))
            .collect::<Result<Vec<_>>>()?;
        let norms = fields
            .iter()
            .map(|f| Ok(f.lq_norm(q)?.value))
            .collect::<Result<Vec<f64>>>()?;
        let mut pairs = Vec::new();
        for i in 0..fields.len() {
            for j in i + 1..fields.len() {
                if norms[i] == 0.0 || norms[j] == 0.0 {
                    continue;
                }
                let product: Vec<_> = fields[i]
                    .values()
                    .iter()
                    .zip(fields[j].values())
                    .map(|(a, b)| a * b)
                    .collect();
                let overlap = Field::new(bx.clone(), product)?.lq_norm(q / 2.0)?.value
                    / (norms[i] * norms[j]);
                let mut m = Map::new();
                m.insert("i".to_string(), Value::from(dec.chips[i].index as u64));
                m.insert("j".to_string(), Value::from(dec.chips[j].index as u64));
                m.insert(
                    "overlap".to_string(),
                    num(overlap, "commensurability probe")?,
                );
                pairs.push(Value::Object(m));
            }
        }
        Value::Array(pairs)
    } else {
        Value::Array(Vec::new())
    };

    let mut tails = Vec::new();
    let mut big_k = 1;
    while 2 * big_k <= dec.chips.len() && big_k <= 5 {
        let t = dec.tail_bound(big_k)?;
        let mut m = Map::new();
        m.insert("K".to_string(), Value::from(t.big_k as u64));
        m.insert(
            "residual_cap_mass".to_string(),
            num(t.residual_cap_mass, "tail bound")?,
        );
        m.insert("mass_bound".to_string(), num(t.mass_bound, "tail bound")?);
        m.insert("chip_floor".to_string(), num(t.chip_floor, "tail bound")?);
        tails.push(Value::Object(m));
        big_k += 1;
    }

    let mut summary = Map::new();
    summary.insert("chips".to_string(), Value::from(dec.chips.len() as u64));
    summary.insert("norm".to_string(), num(dec.norm, "input norm")?);
    summary.insert(
        "residual_norm".to_string(),
        num(residual_norm, "residual norm")?,
    );
    summary.insert(
        "mass_partition_pow".to_string(),
        num(dec.mass_partition_pow(), "mass partition")?,
    );
    summary.insert("tail_bounds".to_string(), Value::Array(tails));
    summary.insert("commensurability".to_string(), commensurability);
    summary.insert("diagnostics".to_string(), diagnostics(None, None));
    Ok(TaskOutput {
        table,
        extra: Vec::new(),
        summary,
    })
}

fn whitney_output(ctx: &Resolved) -> Result<TaskOutput> {
    let au = &ctx.cfg.audit;
    let d = ctx.poly.dimension();
    let cubes = whitney_cubes(au.big_k, au.m_min, au.m_max, d)?;
    let coverage = whitney_coverage(&cubes, au.big_k, au.m_min, au.m_max, d, au.coverage_samples)?;

    let mut table = Table::new(vec!["m", "i0", "i1", "i2", "side", "distance"]);
    for cube in &cubes {
        let c = cube.coords();
        table.push(vec![
            Cell::Int(cube.level() as i64),
            Cell::Int(c[0] as i64),
            Cell::Int(c[1] as i64),
            Cell::Int(if d > 2 { c[2] as i64 } else { 0 }),
            Cell::Float(cube.side()),
            Cell::Float(cube.diag_distance()),
        ]);
    }

    let mut cov = Map::new();
    cov.insert(
        "band_samples".to_string(),
        Value::from(coverage.band_samples as u64),
    );
    cov.insert(
        "uncovered".to_string(),
        Value::from(coverage.uncovered as u64),
    );
    cov.insert(
        "max_overlap".to_string(),
        Value::from(coverage.max_overlap as u64),
    );

    let mut summary = Map::new();
    summary.insert("cubes".to_string(), Value::from(cubes.len() as u64));
    summary.insert("coverage".to_string(), Value::Object(cov));
    summary.insert("diagnostics".to_string(), diagnostics(None, None));
    Ok(TaskOutput {
        table,
        extra: Vec::new(),
        summary,
    })
}
