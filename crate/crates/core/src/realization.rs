//! Realizations of finite open dynamics.
//!
//! A realization is a parameter value `λ` with a partial section `σ` of the
//! datation, defined on a set of instants closed under anteriority and moving
//! along the transitions `d^α_λ`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::dynamics::{OpenDynamic, ParamId};
use crate::fincat::ArrowId;
use crate::{Label, DEFAULT_SEARCH_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("search budget of {cap} candidates exceeded")]
pub struct SearchBudgetExceeded {
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown state `{0}`")]
pub struct UnknownState(pub Label);

/// The outgoing part `σ` of a realization: a partial map instant → state.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Section(BTreeMap<Label, Label>);

impl Section {
    pub fn empty() -> Self {
        Section(BTreeMap::new())
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<Label>,
        B: Into<Label>,
    {
        Section(pairs.into_iter().map(|(t, s)| (t.into(), s.into())).collect())
    }

    pub fn get(&self, t: &str) -> Option<&Label> {
        self.0.get(t)
    }

    /// `Def_σ`.
    pub fn def(&self) -> BTreeSet<Label> {
        self.0.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Label)> + '_ {
        self.0.iter()
    }

    pub fn as_map(&self) -> &BTreeMap<Label, Label> {
        &self.0
    }

    /// `σ ▷ a`: `σ(ρ(a)) = a`.
    pub fn passes_through(&self, a: &OpenDynamic, state: &str) -> Result<bool, UnknownState> {
        let t = a.date(state).ok_or_else(|| UnknownState(state.into()))?;
        Ok(self.0.get(t).is_some_and(|s| s == state))
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (k, (t, s)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}↦{s}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Realization {
    pub param: ParamId,
    pub section: Section,
}

impl Realization {
    pub fn passes_through(&self, a: &OpenDynamic, state: &str) -> Result<bool, UnknownState> {
        self.section.passes_through(a, state)
    }
}

/// `𝔖_A` together with its outgoing parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationSet {
    all: Vec<Realization>,
    outgoing: Vec<Section>,
    by_param: Vec<BTreeSet<usize>>,
}

impl RealizationSet {
    fn assemble(param_count: usize, mut all: Vec<Realization>) -> Self {
        all.sort();
        all.dedup();
        let outgoing: Vec<Section> = all
            .iter()
            .map(|r| r.section.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut by_param = alloc::vec![BTreeSet::new(); param_count];
        for r in &all {
            let k = outgoing.binary_search(&r.section).expect("present");
            by_param[r.param.0].insert(k);
        }
        RealizationSet { all, outgoing, by_param }
    }

    /// `𝔖_A`, ordered by parameter value then section.
    pub fn all(&self) -> &[Realization] {
        &self.all
    }

    /// `Z_A`, sorted; the empty section comes first.
    pub fn outgoing(&self) -> &[Section] {
        &self.outgoing
    }

    /// `Z*_A`.
    pub fn nonempty(&self) -> impl Iterator<Item = &Section> + '_ {
        self.outgoing.iter().filter(|s| !s.is_empty())
    }

    pub fn nonempty_count(&self) -> usize {
        self.outgoing.iter().filter(|s| !s.is_empty()).count()
    }

    /// Indices into [`RealizationSet::outgoing`] of `Z_{A,λ}`.
    pub fn for_param(&self, p: ParamId) -> &BTreeSet<usize> {
        &self.by_param[p.0]
    }

    pub fn index_of(&self, s: &Section) -> Option<usize> {
        self.outgoing.binary_search(s).ok()
    }

    pub fn contains(&self, p: ParamId, section_index: usize) -> bool {
        self.by_param.get(p.0).is_some_and(|z| z.contains(&section_index))
    }

    pub fn is_efficient(&self) -> bool {
        self.nonempty_count() > 0
    }
}

/// Decision order for instants: a linear extension of anteriority where
/// possible (strict predecessors first), ties broken by label.
fn instant_order(a: &OpenDynamic) -> Vec<Label> {
    let ante = a.clock().anteriority();
    let instants: Vec<Label> = a.clock().all_instants().into_iter().collect();
    let strictly_before = |s: &Label, t: &Label| {
        s != t && ante.contains(&(s.clone(), t.clone())) && !ante.contains(&(t.clone(), s.clone()))
    };
    let mut placed: Vec<Label> = Vec::with_capacity(instants.len());
    let mut left: BTreeSet<Label> = instants.iter().cloned().collect();
    while !left.is_empty() {
        let next = left
            .iter()
            .find(|t| !left.iter().any(|s| strictly_before(s, t)))
            .or_else(|| left.iter().next())
            .cloned()
            .expect("non-empty");
        left.remove(&next);
        placed.push(next);
    }
    placed
}

/// Condition-3 constraints `(arrow, t, d^h(t))`, each attached to the
/// position at which both instants are decided.
fn constraints(a: &OpenDynamic, order: &[Label]) -> Vec<Vec<(ArrowId, usize, usize)>> {
    let pos: BTreeMap<&Label, usize> = order.iter().enumerate().map(|(k, t)| (t, k)).collect();
    let mut out = alloc::vec![Vec::new(); order.len()];
    let e = a.engine();
    for d in e.arrow_ids() {
        for t in a.clock().instants(e.arrow(d).dom) {
            let t2 = a.clock().tick(d, t).expect("clock is total");
            let (i, j) = (pos[t], pos[t2]);
            out[i.max(j)].push((d, i, j));
        }
    }
    out
}

/// Enumerates `𝔖_A` with the default search cap.
pub fn enumerate_realizations(a: &OpenDynamic) -> Result<RealizationSet, SearchBudgetExceeded> {
    enumerate_realizations_capped(a, DEFAULT_SEARCH_CAP)
}

/// Enumerates `𝔖_A`, visiting at most `cap` search nodes.
pub fn enumerate_realizations_capped(a: &OpenDynamic, cap: u64) -> Result<RealizationSet, SearchBudgetExceeded> {
    let order = instant_order(a);
    let checks = constraints(a, &order);
    let choices: Vec<Vec<Label>> = order
        .iter()
        .map(|t| {
            let o = a.clock().instant_type(t).expect("instant");
            a.fiber(t).intersection(a.alpha().states(o)).cloned().collect()
        })
        .collect();
    let mut all = Vec::new();
    let mut nodes = 0u64;
    for p in a.alpha().param_ids() {
        let mut current: Vec<Option<Label>> = Vec::with_capacity(order.len());
        search(a, p, &order, &checks, &choices, &mut current, &mut nodes, cap, &mut all)?;
    }
    Ok(RealizationSet::assemble(a.alpha().params().len(), all))
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &OpenDynamic,
    p: ParamId,
    order: &[Label],
    checks: &[Vec<(ArrowId, usize, usize)>],
    choices: &[Vec<Label>],
    current: &mut Vec<Option<Label>>,
    nodes: &mut u64,
    cap: u64,
    out: &mut Vec<Realization>,
) -> Result<(), SearchBudgetExceeded> {
    let k = current.len();
    if k == order.len() {
        let section = Section(
            order
                .iter()
                .zip(current.iter())
                .filter_map(|(t, s)| s.clone().map(|s| (t.clone(), s)))
                .collect(),
        );
        out.push(Realization { param: p, section });
        return Ok(());
    }
    let options = core::iter::once(None).chain(choices[k].iter().cloned().map(Some));
    for opt in options {
        *nodes += 1;
        if *nodes > cap {
            return Err(SearchBudgetExceeded { cap });
        }
        current.push(opt);
        let ok = checks[k].iter().all(|&(d, i, j)| match (&current[i], &current[j]) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(u), Some(v)) => a.alpha().action(d, p).contains(u, v),
        });
        if ok {
            search(a, p, order, checks, choices, current, nodes, cap, out)?;
        }
        current.pop();
    }
    Ok(())
}

/// Oracle mode: every `(λ, σ)` with `σ` any partial map `st(h) ⇀ st(α)`,
/// filtered by the three realization conditions read literally.
pub fn brute_force_realizations(a: &OpenDynamic, cap: u64) -> Result<RealizationSet, SearchBudgetExceeded> {
    let instants: Vec<Label> = a.clock().all_instants().into_iter().collect();
    let states: Vec<Label> = a.alpha().all_states().into_iter().collect();
    let base = states.len() as u64 + 1;
    let per_param = base.checked_pow(instants.len() as u32).unwrap_or(u64::MAX);
    let total = per_param.saturating_mul(a.alpha().params().len() as u64);
    if total > cap {
        return Err(SearchBudgetExceeded { cap });
    }
    let mut all = Vec::new();
    for p in a.alpha().param_ids() {
        for code in 0..per_param {
            let mut c = code;
            let mut map = BTreeMap::new();
            for t in &instants {
                let digit = (c % base) as usize;
                c /= base;
                if digit > 0 {
                    map.insert(t.clone(), states[digit - 1].clone());
                }
            }
            let section = Section(map);
            if satisfies_conditions(a, p, &section) {
                all.push(Realization { param: p, section });
            }
        }
    }
    Ok(RealizationSet::assemble(a.alpha().params().len(), all))
}

/// Checks realization conditions 1 to 3 for `(p, σ)`.
pub fn satisfies_conditions(a: &OpenDynamic, p: ParamId, s: &Section) -> bool {
    let e = a.engine();
    let alpha = a.alpha();
    let clock = a.clock();
    if s.0.iter().any(|(t, x)| a.date(x) != Some(t)) {
        return false;
    }
    for o in e.object_ids() {
        for t in clock.instants(o) {
            if let Some(x) = s.get(t) {
                if !alpha.states(o).contains(x) {
                    return false;
                }
            }
        }
    }
    for d in e.arrow_ids() {
        for t in clock.instants(e.arrow(d).dom) {
            let t2 = clock.tick(d, t).expect("clock is total");
            if let Some(y) = s.get(t2) {
                match s.get(t) {
                    None => return false,
                    Some(x) if !alpha.action(d, p).contains(x, y) => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Whether every realization's domain is closed under anteriority.
pub fn anteriority_closed(a: &OpenDynamic, set: &RealizationSet) -> bool {
    let ante = a.clock().anteriority();
    set.outgoing().iter().all(|s| {
        ante.iter()
            .all(|(u, v)| s.get(v).is_none() || s.get(u).is_some())
    })
}
