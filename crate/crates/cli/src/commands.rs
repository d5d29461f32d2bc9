//! Command implementations. Each command builds a JSON report; `--format
//! table` flattens it to aligned `path  value` lines.

use std::collections::{BTreeMap, BTreeSet};

use laxdyn_core::connectivity::{four_structures, ConnectivitySpace};
use laxdyn_core::control::{realization_to_solution, to_control_system, verify_solution, ControlError};
use laxdyn_core::dynamics::parametric_quotient;
use laxdyn_core::fixtures::{self, Payload};
use laxdyn_core::globaldyn::{
    j_intimacy, quotient_transparent, responsible_intimacy, stability_construct_capped, GlobalDynamic, GlobalError,
};
use laxdyn_core::interaction::{classify_relation, classify_request, show_tuple, InteractiveFamily, Intimacy};
use laxdyn_core::iso::{iso_check, verify_iso};
use laxdyn_core::random::{self, Bounds, Shape};
use laxdyn_core::realization::{
    anteriority_closed, brute_force_realizations, enumerate_realizations_capped, SearchBudgetExceeded,
};
use laxdyn_core::{Label, OpenDynamic};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::schema::{fixture_request, section_json, DynamicJson, FamilyJson};
use crate::{load, load_dynamic, load_family, Cli, CliError, Command, Format, GlobalMode, Input, Output};

fn budget(e: SearchBudgetExceeded) -> CliError {
    CliError::Budget(e.to_string())
}

fn global_error(e: GlobalError) -> CliError {
    match e {
        GlobalError::Budget(b) => budget(b),
        GlobalError::BadJ(_) => CliError::Usage(e.to_string()),
        other => CliError::Violation(other.to_string()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let cap = cli.cap;
    let (report, code) = match &cli.command {
        Command::Validate { input } => (validate(load(input, cap)?)?, 0),
        Command::Realize { input } => (realize(&load_dynamic(input, cap)?, cap)?, 0),
        Command::ClassifyRequest { input } => (classify(&load_family(input, cap)?)?, 0),
        Command::Connectivity { input } => (connectivity(&load_family(input, cap)?)?, 0),
        Command::Global { input, mode, j } => {
            if j.is_some() && *mode != GlobalMode::J {
                return Err(CliError::Usage("--j is only meaningful with --mode j".into()));
            }
            let f = load_family(input, cap)?;
            (global(&f, *mode, j.as_deref(), cap)?, 0)
        }
        Command::ControlSystem { input } => (control_system(&load_dynamic(input, cap)?)?, 0),
        Command::Examples { name } => (examples(name.as_deref())?, 0),
        Command::IsoCheck { first, second } => {
            let a = load_dynamic(first, cap)?;
            let b = load_dynamic(second, cap)?;
            iso(&a, &b, cap)?
        }
        Command::Laws { cases } => laws(*cases, cli.seed)?,
    };
    let text = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Table => render_table(&report),
    };
    Ok(Output { text, code })
}

fn strings<'a, I: IntoIterator<Item = &'a Label>>(xs: I) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

fn validate(input: Input) -> Result<Value, CliError> {
    match input {
        Input::Dynamic(a) => validate_dynamic(&a),
        Input::Family(f) => validate_family(&f),
    }
}

fn validate_dynamic(a: &OpenDynamic) -> Result<Value, CliError> {
    let report = a.validate().map_err(|v| CliError::Violation(v.to_string()))?;
    let alpha = a.alpha();
    let offside: BTreeMap<String, Vec<String>> = report
        .offside
        .iter()
        .filter(|(_, ps)| !ps.is_empty())
        .map(|(s, ps)| (s.to_string(), ps.iter().map(|&p| alpha.param_name(p).to_string()).collect()))
        .collect();
    Ok(json!({
        "kind": "dynamic",
        "valid": true,
        "functorial": report.functorial,
        "summary": if report.functorial { "strict" } else { "lax, not strict" },
        "classification": report.classification.to_string(),
        "params": alpha.params().len(),
        "states": alpha.state_count(),
        "offside": offside,
    }))
}

fn validate_family(f: &InteractiveFamily) -> Result<Value, CliError> {
    let fam = f.family();
    let mut members = Map::new();
    for m in fam.members() {
        let r = m.dynamic.validate().map_err(|v| CliError::Violation(format!("member `{}`: {v}", m.index)))?;
        members.insert(
            m.index.to_string(),
            json!({
                "functorial": r.functorial,
                "classification": r.classification.to_string(),
                "realizations": m.realizations.all().len(),
                "outgoing": m.realizations.outgoing().len(),
            }),
        );
    }
    let class = classify_request(fam, f.request()).map_err(|e| CliError::Violation(e.to_string()))?;
    let rigid: BTreeMap<String, bool> = f.sync_report().rigid.iter().map(|(k, &v)| (k.to_string(), v)).collect();
    Ok(json!({
        "kind": "family",
        "valid": true,
        "members": members,
        "request": {
            "size": f.request().len(),
            "coherent_size": f.coherent().len(),
            "normal": class.normal,
            "admissible": class.admissible,
        },
        "sync": {
            "conductor": f.sync().conductor.to_string(),
            "rigid": rigid,
        },
        "m": f.m().len(),
    }))
}

fn realize(a: &OpenDynamic, cap: u64) -> Result<Value, CliError> {
    let set = enumerate_realizations_capped(a, cap).map_err(budget)?;
    let alpha = a.alpha();
    let realizations: Vec<Value> = set
        .all()
        .iter()
        .map(|x| json!({ "param": alpha.param_name(x.param).to_string(), "section": section_json(&x.section) }))
        .collect();
    let outgoing: Vec<_> = set.outgoing().iter().map(section_json).collect();
    Ok(json!({
        "count": realizations.len(),
        "nonempty_outgoing": set.nonempty_count(),
        "efficient": set.is_efficient(),
        "realizations": realizations,
        "outgoing": outgoing,
    }))
}

fn classify(f: &InteractiveFamily) -> Result<Value, CliError> {
    let fam = f.family();
    let q = classify_request(fam, f.request()).map_err(|e| CliError::Violation(e.to_string()))?;
    let r = classify_relation(fam, f.coherent(), Some(f.request())).map_err(|e| CliError::Violation(e.to_string()))?;
    Ok(json!({
        "request": {
            "size": f.request().len(),
            "normal": q.normal,
            "admissible": q.admissible,
            "functional": q.functional,
            "strongly_functional": q.strongly_functional,
        },
        "coherent": {
            "size": f.coherent().len(),
            "normal": r.normal,
            "efficient": r.efficient,
            "functional": r.functional,
            "strongly_functional": r.strongly_functional,
        },
    }))
}

fn space_json(k: &ConnectivitySpace<Label>) -> Value {
    let mut connected: Vec<Vec<String>> = k
        .subsets()
        .into_iter()
        .filter(|s| s.len() > 1)
        .map(|s| strings(&s))
        .collect();
    connected.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    json!({ "classification": k.classify().to_string(), "connected": connected })
}

fn connectivity(f: &InteractiveFamily) -> Result<Value, CliError> {
    let four = four_structures(f).map_err(|e| CliError::Violation(e.to_string()))?;
    let mut out = Map::new();
    out.insert("index".into(), json!(strings(four.request.carrier())));
    for (name, k) in four.named() {
        out.insert(name.into(), space_json(k));
    }
    out.insert("plain".into(), json!(four.plain().classify().to_string()));
    out.insert("manifest".into(), json!(four.manifest().classify().to_string()));
    Ok(Value::Object(out))
}

fn global_dynamic(
    f: &InteractiveFamily,
    mode: GlobalMode,
    j: Option<&[String]>,
    cap: u64,
) -> Result<GlobalDynamic, CliError> {
    let fam = f.family();
    let t = stability_construct_capped(f, cap).map_err(global_error)?;
    let intimacy = match mode {
        GlobalMode::Transparent => return Ok(t),
        GlobalMode::Demanded => f.intimacy().clone(),
        GlobalMode::Responsible => responsible_intimacy(fam, f.request()),
        GlobalMode::Opaque => Intimacy::Total,
        GlobalMode::J => {
            let j: BTreeSet<Label> = j.unwrap_or_default().iter().map(Label::from).collect();
            j_intimacy(fam, &j).map_err(global_error)?
        }
    };
    quotient_transparent(fam, &t, &intimacy).map_err(global_error)
}

fn global(f: &InteractiveFamily, mode: GlobalMode, j: Option<&[String]>, cap: u64) -> Result<Value, CliError> {
    let g = global_dynamic(f, mode, j, cap)?;
    let fam = f.family();
    let m: Vec<String> = g.m().iter().map(|t| show_tuple(fam, t)).collect();
    let params = g.open().alpha().params();
    let blocks: BTreeMap<String, Vec<String>> = g
        .blocks()
        .iter()
        .zip(params)
        .map(|(b, name)| (name.to_string(), b.iter().map(|&k| m[k].clone()).collect()))
        .collect();
    let components: BTreeMap<String, Vec<String>> =
        g.state_components().iter().map(|(s, c)| (s.to_string(), strings(c))).collect();
    let mode_name = match mode {
        GlobalMode::Transparent => "transparent",
        GlobalMode::Demanded => "demanded",
        GlobalMode::Responsible => "responsible",
        GlobalMode::Opaque => "opaque",
        GlobalMode::J => "j",
    };
    Ok(json!({
        "mode": mode_name,
        "members": strings(g.members()),
        "m": m,
        "blocks": blocks,
        "state_components": components,
        "dynamic": DynamicJson::from_core(g.open()),
    }))
}

fn control_system(a: &OpenDynamic) -> Result<Value, CliError> {
    let cs = to_control_system(a).map_err(|e| match e {
        ControlError::Category(c) => CliError::Violation(c.to_string()),
        other => CliError::Violation(other.to_string()),
    })?;
    cs.check().map_err(|v| CliError::Violation(v.to_string()))?;
    let element = |e: &(Label, Label)| format!("({},{})", e.0, e.1);
    let mut f_objects = BTreeMap::new();
    for (o, set) in cs.g.object_ids().zip(&cs.f_objects) {
        f_objects.insert(cs.g.object_name(o).to_string(), set.iter().map(element).collect::<Vec<_>>());
    }
    let mut f_arrows = BTreeMap::new();
    for (d, map) in cs.g.arrow_ids().zip(&cs.f_arrows) {
        if map.is_empty() {
            continue;
        }
        let pairs: Vec<[String; 2]> = map.iter().map(|(x, y)| [element(x), element(y)]).collect();
        f_arrows.insert(cs.g.arrow(d).name.to_string(), pairs);
    }
    let q_objects: BTreeMap<String, String> = cs
        .g
        .object_ids()
        .map(|o| (cs.g.object_name(o).to_string(), cs.h.object_name(cs.q.objects[o.0]).to_string()))
        .collect();
    let mut realizations = 0usize;
    if let Ok(set) = laxdyn_core::realization::enumerate_realizations(a) {
        for x in set.all() {
            let sol = realization_to_solution(a, &cs, x).map_err(|e| CliError::Violation(format!("{e:?}")))?;
            verify_solution(&cs, &sol).map_err(|v| CliError::Violation(v.to_string()))?;
            realizations += 1;
        }
    }
    Ok(json!({
        "h": { "objects": cs.h.objects().len(), "arrows": cs.h.arrows().len() },
        "g": { "objects": cs.g.objects().len(), "arrows": cs.g.arrows().len() },
        "q_objects": q_objects,
        "f_objects": f_objects,
        "f_arrows": f_arrows,
        "realizations_as_solutions": realizations,
    }))
}

fn examples(name: Option<&str>) -> Result<Value, CliError> {
    let Some(name) = name else {
        let list: Vec<Value> = fixtures::NAMES
            .iter()
            .map(|n| {
                let fx = fixtures::fixture(n).expect("listed fixture exists");
                let kind = match fx.payload {
                    Payload::Dynamic(_) => "dynamic",
                    Payload::Family(_) => "family",
                };
                json!({ "name": fx.name, "kind": kind, "note": fx.note })
            })
            .collect();
        return Ok(Value::Array(list));
    };
    let fx = fixtures::fixture(name).map_err(|e| CliError::Usage(e.to_string()))?;
    let doc = match &fx.payload {
        Payload::Dynamic(d) => serde_json::to_value(DynamicJson::from_core(d)),
        Payload::Family(f) => serde_json::to_value(FamilyJson::from_core(f, fixture_request(name))),
    };
    Ok(doc.expect("documents serialize"))
}

fn iso(a: &OpenDynamic, b: &OpenDynamic, cap: u64) -> Result<(Value, i32), CliError> {
    match iso_check(a, b, cap).map_err(budget)? {
        Some(w) => {
            let map = |m: &BTreeMap<Label, Label>| -> BTreeMap<String, String> {
                m.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect()
            };
            Ok((
                json!({
                    "isomorphic": true,
                    "params": map(&w.params),
                    "states": map(&w.states),
                    "instants": map(&w.instants),
                }),
                0,
            ))
        }
        None => Ok((json!({ "isomorphic": false }), 1)),
    }
}

/// Seeded randomized checks: the pruned realization search against brute
/// force, parametric quotients, parameter renaming and the global dynamic
/// construction.
fn laws(cases: usize, seed: u64) -> Result<(Value, i32), CliError> {
    let mut r = random::rng(seed);
    let mut failures: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    let mut fail = |law: &'static str, case: usize, msg: String| {
        failures.entry(law).or_default().push(format!("case {case}: {msg}"));
    };
    let cap = laxdyn_core::DEFAULT_SEARCH_CAP;
    for case in 0..cases {
        let shape = Shape::ALL[r.random_range(0..Shape::ALL.len())];
        let a = random::random_dynamic(&mut r, shape, Bounds::default());
        match (enumerate_realizations_capped(&a, cap), brute_force_realizations(&a, cap)) {
            (Ok(p), Ok(b)) => {
                if p.all() != b.all() {
                    fail("realization_search", case, "pruned and brute-force searches differ".into());
                }
                if !anteriority_closed(&a, &p) {
                    fail("realization_search", case, "realizations are not closed under anteriority".into());
                }
            }
            _ => fail("realization_search", case, "search budget exceeded".into()),
        }
        let blocks = random::random_partition(&mut r, a.alpha().params().len());
        match parametric_quotient(&a, &blocks, None) {
            Ok(q) if q.validate().is_ok() => {}
            Ok(_) => fail("quotient", case, "quotient fails the dynamic laws".into()),
            Err(e) => fail("quotient", case, e.to_string()),
        }
        let names: Vec<Label> = (0..a.alpha().params().len()).rev().map(|k| Label::from(format!("q{k}"))).collect();
        let renamed = a.alpha().with_param_names(names).and_then(|al| a.with_alpha(al));
        match renamed {
            Ok(b) => match iso_check(&a, &b, cap) {
                Ok(Some(w)) if verify_iso(&a, &b, &w).is_ok() => {}
                Ok(_) => fail("renaming_iso", case, "renamed dynamic not recognized as isomorphic".into()),
                Err(e) => fail("renaming_iso", case, e.to_string()),
            },
            Err(e) => fail("renaming_iso", case, e.to_string()),
        }
        if case % 4 == 0 {
            let f = random::random_interactive_family(&mut r);
            match stability_construct_capped(&f, cap) {
                Ok(g) if g.open().validate().is_ok() && g.m().len() == f.m().len() => {}
                Ok(_) => fail("global_dynamic", case, "global dynamic fails the open dynamic laws".into()),
                Err(e) => fail("global_dynamic", case, e.to_string()),
            }
        }
    }
    let code = if failures.is_empty() { 0 } else { 1 };
    Ok((json!({ "seed": seed, "cases": cases, "passed": failures.is_empty(), "failures": failures }), code))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(xs.iter().filter_map(scalar).collect::<Vec<_>>().join(" "))
        }
        Value::Array(xs) if xs.iter().all(|x| x.as_array().is_some_and(|p| p.iter().all(|y| y.is_string()))) => Some(
            xs.iter()
                .map(|x| {
                    let parts: Vec<&str> = x.as_array().unwrap().iter().filter_map(|y| y.as_str()).collect();
                    format!("[{}]", parts.join(" "))
                })
                .collect::<Vec<_>>()
                .join(" "),
        ),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    if let Some(s) = scalar(v) {
        rows.push((prefix.to_string(), s));
        return;
    }
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, rows);
            }
        }
        Value::Array(xs) => {
            for (k, x) in xs.iter().enumerate() {
                flatten(&join(&k.to_string()), x, rows);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}

/// Renders a report as two aligned columns.
pub fn render_table(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, x) in rows {
        out.push_str(&format!("{k:<width$}  {x}\n"));
    }
    out
}
