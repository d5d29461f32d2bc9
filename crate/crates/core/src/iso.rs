//! Isomorphism of open dynamics over a common engine.
//!
//! An isomorphism is a bijection of parameters, a type-preserving bijection
//! of states and a bijection of instants that commute with every action,
//! every tick and the datation. The search colours the states, instants and
//! parameter classes of both dynamics together, refines the colouring until
//! it is stable, then individualizes one vertex at a time and backtracks.
//! Parameters with identical actions are interchangeable, so they are first
//! collapsed into weighted classes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{OpenDynamic, ParamId};
use crate::realization::SearchBudgetExceeded;
use crate::{ArrowId, Label};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    pub params: BTreeMap<Label, Label>,
    pub states: BTreeMap<Label, Label>,
    pub instants: BTreeMap<Label, Label>,
}

impl IsoWitness {
    pub fn identity(a: &OpenDynamic) -> IsoWitness {
        let diag = |xs: BTreeSet<Label>| xs.into_iter().map(|x| (x.clone(), x)).collect();
        IsoWitness {
            params: diag(a.alpha().params().iter().cloned().collect()),
            states: diag(a.alpha().all_states()),
            instants: diag(a.clock().all_instants()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoViolation {
    #[error("the engines differ")]
    Engine,
    #[error("the {0} map is not a bijection")]
    NotBijective(&'static str),
    #[error("state `{0}` changes type")]
    Type(Label),
    #[error("instant `{0}` changes type")]
    InstantType(Label),
    #[error("datation does not commute at `{0}`")]
    Datation(Label),
    #[error("tick along `{arrow}` does not commute at `{instant}`")]
    Tick { arrow: Label, instant: Label },
    #[error("action of `{param}` along `{arrow}` does not commute at `{state}`")]
    Action { arrow: Label, param: Label, state: Label },
}

fn bijective(map: &BTreeMap<Label, Label>, from: &BTreeSet<Label>, to: &BTreeSet<Label>) -> bool {
    map.len() == from.len()
        && map.keys().all(|k| from.contains(k))
        && map.values().collect::<BTreeSet<_>>().len() == to.len()
        && map.values().all(|v| to.contains(v))
}

/// Checks a candidate witness exhaustively.
pub fn verify_iso(a: &OpenDynamic, b: &OpenDynamic, w: &IsoWitness) -> Result<(), IsoViolation> {
    if a.engine() != b.engine() {
        return Err(IsoViolation::Engine);
    }
    let (aa, ba) = (a.alpha(), b.alpha());
    let pa: BTreeSet<Label> = aa.params().iter().cloned().collect();
    let pb: BTreeSet<Label> = ba.params().iter().cloned().collect();
    if !bijective(&w.params, &pa, &pb) {
        return Err(IsoViolation::NotBijective("parameter"));
    }
    if !bijective(&w.states, &aa.all_states(), &ba.all_states()) {
        return Err(IsoViolation::NotBijective("state"));
    }
    if !bijective(&w.instants, &a.clock().all_instants(), &b.clock().all_instants()) {
        return Err(IsoViolation::NotBijective("instant"));
    }
    for (s, t) in &w.states {
        if aa.state_type(s) != ba.state_type(t) {
            return Err(IsoViolation::Type(s.clone()));
        }
        if a.date(s).map(|d| &w.instants[d]) != b.date(t) {
            return Err(IsoViolation::Datation(s.clone()));
        }
    }
    for (s, t) in &w.instants {
        if a.clock().instant_type(s) != b.clock().instant_type(t) {
            return Err(IsoViolation::InstantType(s.clone()));
        }
    }
    let e = a.engine();
    for d in e.arrow_ids() {
        for s in a.clock().instants(e.arrow(d).dom) {
            let lhs = a.clock().tick(d, s).map(|x| &w.instants[x]);
            if lhs != b.clock().tick(d, &w.instants[s]) {
                return Err(IsoViolation::Tick {
                    arrow: e.arrow_name(d).clone(),
                    instant: s.clone(),
                });
            }
        }
        for p in aa.param_ids() {
            let q = ba.param_id(&w.params[aa.param_name(p)]).expect("bijective");
            for s in aa.states(e.arrow(d).dom) {
                let lhs: BTreeSet<&Label> = aa.action(d, p).image_ref(s).into_iter().flatten().map(|x| &w.states[x]).collect();
                let rhs: BTreeSet<&Label> = ba.action(d, q).image_ref(&w.states[s]).into_iter().flatten().collect();
                if lhs != rhs {
                    return Err(IsoViolation::Action {
                        arrow: e.arrow_name(d).clone(),
                        param: aa.param_name(p).clone(),
                        state: s.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// One side of the search: vertices are states, instants and parameter
/// classes; edges are labelled by arrows.
struct Side {
    states: Vec<Label>,
    instants: Vec<Label>,
    classes: Vec<Vec<ParamId>>,
    /// `(arrow, class, src, dst)` over state indices.
    actions: Vec<(usize, usize, usize, usize)>,
    /// `(arrow, src, dst)` over instant indices.
    ticks: Vec<(usize, usize, usize)>,
    /// Instant index per state.
    dates: Vec<usize>,
    state_types: Vec<usize>,
    instant_types: Vec<usize>,
}

impl Side {
    fn new(a: &OpenDynamic) -> Side {
        let alpha = a.alpha();
        let e = a.engine();
        let states: Vec<Label> = alpha.all_states().into_iter().collect();
        let instants: Vec<Label> = a.clock().all_instants().into_iter().collect();
        let s_ix = |x: &Label| states.binary_search(x).expect("known state");
        let t_ix = |x: &Label| instants.binary_search(x).expect("known instant");
        let mut by_action: BTreeMap<Vec<(ArrowId, Vec<(Label, Label)>)>, Vec<ParamId>> = BTreeMap::new();
        for p in alpha.param_ids() {
            let sig = e
                .arrow_ids()
                .map(|d| (d, alpha.action(d, p).pairs().map(|(u, v)| (u.clone(), v.clone())).collect()))
                .collect();
            by_action.entry(sig).or_default().push(p);
        }
        let mut classes: Vec<Vec<ParamId>> = by_action.into_values().collect();
        classes.sort();
        let mut actions = Vec::new();
        for (c, class) in classes.iter().enumerate() {
            for d in e.arrow_ids() {
                for (u, v) in alpha.action(d, class[0]).pairs() {
                    actions.push((d.0, c, s_ix(u), s_ix(v)));
                }
            }
        }
        let mut ticks = Vec::new();
        for d in e.arrow_ids() {
            for t in a.clock().instants(e.arrow(d).dom) {
                if let Some(n) = a.clock().tick(d, t) {
                    ticks.push((d.0, t_ix(t), t_ix(n)));
                }
            }
        }
        Side {
            dates: states.iter().map(|s| t_ix(a.date(s).expect("total datation"))).collect(),
            state_types: states.iter().map(|s| alpha.state_type(s).expect("typed").0).collect(),
            instant_types: instants.iter().map(|t| a.clock().instant_type(t).expect("typed").0).collect(),
            states,
            instants,
            classes,
            actions,
            ticks,
        }
    }

    fn len(&self) -> usize {
        self.states.len() + self.instants.len() + self.classes.len()
    }

    fn class_vertex(&self, c: usize) -> usize {
        self.states.len() + self.instants.len() + c
    }

    fn instant_vertex(&self, t: usize) -> usize {
        self.states.len() + t
    }

    fn initial(&self) -> Vec<(u8, usize, usize)> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.state_types.iter().map(|&t| (0, t, 0)));
        out.extend(self.instant_types.iter().map(|&t| (1, t, 0)));
        out.extend(self.classes.iter().map(|c| (2, 0, c.len())));
        out
    }

    /// Neighbourhood signature of every vertex under `colour`.
    fn signatures(&self, colour: &[u32]) -> Vec<Vec<(u8, usize, u32, u32)>> {
        let mut sig: Vec<Vec<(u8, usize, u32, u32)>> = alloc::vec![Vec::new(); self.len()];
        for &(d, c, u, v) in &self.actions {
            let cc = colour[self.class_vertex(c)];
            sig[u].push((0, d, cc, colour[v]));
            sig[v].push((1, d, cc, colour[u]));
            sig[self.class_vertex(c)].push((2, d, colour[u], colour[v]));
        }
        for &(d, u, v) in &self.ticks {
            let (iu, iv) = (self.instant_vertex(u), self.instant_vertex(v));
            sig[iu].push((3, d, colour[iv], 0));
            sig[iv].push((4, d, colour[iu], 0));
        }
        for (s, &t) in self.dates.iter().enumerate() {
            let it = self.instant_vertex(t);
            sig[s].push((5, 0, colour[it], 0));
            sig[it].push((6, 0, colour[s], 0));
        }
        for s in &mut sig {
            s.sort_unstable();
        }
        sig
    }
}

/// Refines both colourings jointly until the number of colours is stable.
fn refine(a: &Side, b: &Side, ca: &mut Vec<u32>, cb: &mut Vec<u32>) {
    loop {
        let before = ca.iter().chain(cb.iter()).collect::<BTreeSet<_>>().len();
        let (sa, sb) = (a.signatures(ca), b.signatures(cb));
        let mut table: BTreeMap<(u32, &Vec<(u8, usize, u32, u32)>), u32> = BTreeMap::new();
        for (k, s) in sa.iter().enumerate() {
            table.entry((ca[k], s)).or_insert(0);
        }
        for (k, s) in sb.iter().enumerate() {
            table.entry((cb[k], s)).or_insert(0);
        }
        for (n, v) in table.values_mut().enumerate() {
            *v = n as u32;
        }
        let na: Vec<u32> = sa.iter().enumerate().map(|(k, s)| table[&(ca[k], s)]).collect();
        let nb: Vec<u32> = sb.iter().enumerate().map(|(k, s)| table[&(cb[k], s)]).collect();
        *ca = na;
        *cb = nb;
        let after = ca.iter().chain(cb.iter()).collect::<BTreeSet<_>>().len();
        if after == before {
            return;
        }
    }
}

fn histogram(c: &[u32]) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for &x in c {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

struct Search<'a> {
    a: &'a Side,
    b: &'a Side,
    da: &'a OpenDynamic,
    db: &'a OpenDynamic,
    nodes: u64,
    cap: u64,
}

impl Search<'_> {
    fn run(&mut self, mut ca: Vec<u32>, mut cb: Vec<u32>) -> Result<Option<IsoWitness>, SearchBudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(SearchBudgetExceeded { cap: self.cap });
        }
        refine(self.a, self.b, &mut ca, &mut cb);
        let (ha, hb) = (histogram(&ca), histogram(&cb));
        if ha != hb {
            return Ok(None);
        }
        let Some((&cell, _)) = ha.iter().filter(|(_, &n)| n > 1).min_by_key(|(_, &n)| n) else {
            return Ok(self.leaf(&ca, &cb));
        };
        let x = ca.iter().position(|&c| c == cell).expect("cell is populated");
        let fresh = ca.iter().chain(cb.iter()).max().copied().unwrap_or(0) + 1;
        for y in (0..cb.len()).filter(|&y| cb[y] == cell) {
            let (mut na, mut nb) = (ca.clone(), cb.clone());
            na[x] = fresh;
            nb[y] = fresh;
            if let Some(w) = self.run(na, nb)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    fn leaf(&self, ca: &[u32], cb: &[u32]) -> Option<IsoWitness> {
        let of: BTreeMap<u32, usize> = cb.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let image = |k: usize| of[&ca[k]];
        let (a, b) = (self.a, self.b);
        let states = (0..a.states.len()).map(|k| (a.states[k].clone(), b.states[image(k)].clone())).collect();
        let instants = (0..a.instants.len())
            .map(|k| (a.instants[k].clone(), b.instants[image(a.instant_vertex(k)) - b.states.len()].clone()))
            .collect();
        let mut params = BTreeMap::new();
        for (c, class) in a.classes.iter().enumerate() {
            let other = &b.classes[image(a.class_vertex(c)) - b.states.len() - b.instants.len()];
            for (p, q) in class.iter().zip(other) {
                params.insert(
                    self.da.alpha().param_name(*p).clone(),
                    self.db.alpha().param_name(*q).clone(),
                );
            }
        }
        let w = IsoWitness { params, states, instants };
        verify_iso(self.da, self.db, &w).is_ok().then_some(w)
    }
}

/// Searches an isomorphism `a ≅ b`; `Ok(None)` when there is none.
pub fn iso_check(a: &OpenDynamic, b: &OpenDynamic, cap: u64) -> Result<Option<IsoWitness>, SearchBudgetExceeded> {
    if a.engine() != b.engine() {
        return Ok(None);
    }
    let (aa, ba) = (a.alpha(), b.alpha());
    if aa.params().len() != ba.params().len()
        || a.engine().object_ids().any(|o| {
            aa.states(o).len() != ba.states(o).len() || a.clock().instants(o).len() != b.clock().instants(o).len()
        })
    {
        return Ok(None);
    }
    let (sa, sb) = (Side::new(a), Side::new(b));
    if sa.len() != sb.len() {
        return Ok(None);
    }
    let init: BTreeMap<(u8, usize, usize), u32> = sa
        .initial()
        .into_iter()
        .chain(sb.initial())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, x)| (x, k as u32))
        .collect();
    let ca = sa.initial().iter().map(|x| init[x]).collect();
    let cb = sb.initial().iter().map(|x| init[x]).collect();
    let mut search = Search {
        a: &sa,
        b: &sb,
        da: a,
        db: b,
        nodes: 0,
        cap,
    };
    search.run(ca, cb)
}
