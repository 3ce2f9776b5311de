use std::collections::HashMap;

use serde_json::{Map, Value};

use arcext_core::decompose::{
    class_key, containment_audit, enumerate_indices, overlap_audit, ContainmentOptions,
};
use arcext_core::Result;

use crate::config::Resolved;
use crate::report::{diagnostics, opt_num, Cell, Table, TaskOutput};
use crate::tasks::Task;

/// Zonotope audits over the admissible index family: child-cube containment
/// with fattening, and intra-class disjointness with an overlap probe.
pub struct Audit;

impl Task for Audit {
    fn name(&self) -> &'static str {
        "audit"
    }

    fn run(&self, ctx: &Resolved) -> Result<TaskOutput> {
        audit_output(ctx)
    }
}

pub fn audit_output(ctx: &Resolved) -> Result<TaskOutput> {
    let au = &ctx.cfg.audit;
    let d = ctx.poly.dimension();
    let indices = enumerate_indices(au.big_k, au.m_min, au.m_max, d, au.fit_unit, au.k_cap)?;

    let mut options = ContainmentOptions::new(au.big_k);
    options.epsilon = au.epsilon;
    options.lattice = au.lattice;
    options.undersized = au.undersized;
    let containment = containment_audit(&ctx.poly, &indices, &options)?;
    let overlap = overlap_audit(&ctx.poly, &indices, au.l_param)?;

    let mut class_sizes: HashMap<(u32, u64, Vec<u64>), u64> = HashMap::new();
    for index in &indices {
        *class_sizes.entry(class_key(index, au.l_param)).or_default() += 1;
    }

    let mut table = Table::new(vec!["m", "kappa0", "kappa1", "kappa2", "kappa_k", "class_size"]);
    for index in &indices {
        let size = class_sizes[&class_key(index, au.l_param)];
        table.push(vec![
            Cell::Int(index.m as i64),
            Cell::Int(index.kappa[0] as i64),
            Cell::Int(index.kappa[1] as i64),
            Cell::Int(if d > 2 { index.kappa[2] as i64 } else { 0 }),
            Cell::Int(index.kappa_k as i64),
            Cell::Int(size as i64),
        ]);
    }

    let mut norm = Map::new();
    norm.insert(
        "ok".to_string(),
        Value::Bool(containment.normalization.ok),
    );
    norm.insert(
        "perturbation_norm".to_string(),
        opt_num(Some(containment.normalization.perturbation_norm)),
    );
    norm.insert(
        "low_order_defect".to_string(),
        opt_num(Some(containment.normalization.low_order_defect)),
    );

    let mut cont = Map::new();
    cont.insert(
        "indices".to_string(),
        Value::from(containment.indices as u64),
    );
    cont.insert("checked".to_string(), Value::from(containment.checked));
    cont.insert(
        "violations".to_string(),
        Value::from(containment.violations),
    );
    cont.insert(
        "worst_margin".to_string(),
        opt_num(Some(containment.worst_margin)),
    );
    cont.insert("normalization".to_string(), Value::Object(norm));

    let mut over = Map::new();
    over.insert("bodies".to_string(), Value::from(overlap.bodies as u64));
    over.insert("classes".to_string(), Value::from(overlap.classes as u64));
    over.insert(
        "max_class_size".to_string(),
        Value::from(overlap.max_class_size as u64),
    );
    over.insert(
        "intra_class_pairs".to_string(),
        Value::from(overlap.intra_class_pairs),
    );
    over.insert("violations".to_string(), Value::from(overlap.violations));

    let mut summary = Map::new();
    summary.insert(
        "violations".to_string(),
        Value::from(containment.violations + overlap.violations),
    );
    summary.insert(
        "overlap_max".to_string(),
        Value::from(overlap.overlap_max as u64),
    );
    summary.insert("classes".to_string(), Value::from(overlap.classes as u64));
    summary.insert("containment".to_string(), Value::Object(cont));
    summary.insert("overlap".to_string(), Value::Object(over));
    summary.insert("diagnostics".to_string(), diagnostics(None, None));
    Ok(TaskOutput {
        table,
        extra: Vec::new(),
        summary,
    })
}
