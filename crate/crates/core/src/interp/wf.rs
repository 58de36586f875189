use std::collections::{BTreeMap, BTreeSet};

use super::Configuration;
use crate::ast::{ObjectId, Program, Value};
use crate::lts::reachable_states;
use crate::model::{class_info, class_usage, expression_violations, objects_of, returns_of};

fn objects_in_values<'v>(values: impl Iterator<Item = &'v Value>) -> Vec<ObjectId> {
    values
        .filter_map(|v| match v {
            Value::Object(o) => Some(*o),
            _ => None,
        })
        .collect()
}

/// Every object occurrence in the expression, the heap fields and the stack
/// parameters.
fn occurrences(cfg: &Configuration) -> Vec<ObjectId> {
    let mut all = objects_of(&cfg.expr);
    all.extend(objects_in_values(cfg.heap.objects.values().flat_map(|o| o.fields.values())));
    all.extend(objects_in_values(cfg.stack.iter().map(|f| &f.param.1)));
    all
}

/// Reasons a configuration is not well formed; empty when it is.
pub fn well_formed_configuration(program: &Program, cfg: &Configuration) -> Vec<String> {
    let mut out = Vec::new();

    let returns = returns_of(&cfg.expr).len();
    if cfg.stack.len() != returns + 1 {
        out.push(format!("stack has {} frames but the expression has {returns} returns", cfg.stack.len()));
    }
    match cfg.stack.first().and_then(|f| cfg.heap.get(f.obj)) {
        Some(obj) if obj.class.name == "Main" => {}
        _ => out.push("the bottom frame does not belong to a `Main` object".into()),
    }

    let mut owners = BTreeSet::new();
    for f in &cfg.stack {
        if !owners.insert(f.obj) {
            out.push(format!("{} owns more than one stack frame", f.obj));
        }
        if cfg.heap.get(f.obj).is_none() {
            out.push(format!("frame owner {} is not in the heap", f.obj));
        }
    }

    out.extend(expression_violations(&cfg.expr));

    let mut seen = BTreeSet::new();
    for o in occurrences(cfg) {
        if !seen.insert(o) {
            out.push(format!("{o} is referenced more than once"));
        }
        if cfg.heap.get(o).is_none() {
            out.push(format!("{o} is referenced but not in the heap"));
        }
    }

    for (o, obj) in &cfg.heap.objects {
        let view = match class_info(program, &obj.class) {
            Ok(v) => v,
            Err(e) => {
                out.push(format!("{o}: {e}"));
                continue;
            }
        };
        if let Ok(initial) = class_usage(program, &obj.class) {
            match reachable_states(&initial) {
                Ok(states) if states.contains(&obj.usage) => {}
                Ok(_) => out.push(format!("{o}: usage `{}` is not reachable from `{initial}`", obj.usage)),
                Err(e) => out.push(format!("{o}: {e}")),
            }
        }
        let declared: BTreeSet<&str> = view.fields.iter().map(|f| f.name.as_str()).collect();
        let stored: BTreeSet<&str> = obj.fields.keys().map(|f| f.as_str()).collect();
        if declared != stored {
            out.push(format!("{o}: stored fields do not match the fields of `{}`", obj.class));
        }
    }
    out
}

/// Linear objects (usage not `end`) that are not referenced exactly once.
pub fn linearity_violations(cfg: &Configuration) -> Vec<(ObjectId, usize)> {
    let mut counts: BTreeMap<ObjectId, usize> = BTreeMap::new();
    for o in occurrences(cfg) {
        *counts.entry(o).or_insert(0) += 1;
    }
    cfg.heap
        .objects
        .iter()
        .filter(|(_, obj)| !obj.usage.is_end())
        .filter_map(|(o, _)| {
            let n = counts.get(o).copied().unwrap_or(0);
            (n != 1).then_some((*o, n))
        })
        .collect()
}
