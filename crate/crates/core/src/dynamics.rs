//! Multi-dynamics, clocks, open dynamics and dynamorphisms.
//!
//! A [`MultiDynamic`] assigns a finite state set to every object of its engine
//! and, to every pair (arrow, parameter value), a transition between the state
//! sets of the arrow's ends. It is valid when state sets are pairwise
//! disjoint and the lax identity and lax composition inclusions hold.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::fincat::{ArrowId, FinCategory, Functor, ObjId};
use crate::transition::{Determinism, Transition};
use crate::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub usize);

/// Malformed dynamic data, detected at construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicError {
    #[error("expected one state set per engine object ({expected}), got {got}")]
    StateCount { expected: usize, got: usize },
    #[error("duplicate parameter value `{0}`")]
    DuplicateParam(Label),
    #[error("a multi-dynamic needs at least one parameter value")]
    NoParams,
    #[error("unknown parameter value `{0}`")]
    UnknownParam(Label),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(Label),
    #[error("unknown object `{0}`")]
    UnknownObject(Label),
    #[error("transition of arrow `{arrow}` for `{param}` is not typed by the state sets")]
    IllTyped { arrow: Label, param: Label },
    #[error("action entry refers to arrow or parameter ids out of range")]
    OutOfRange,
    #[error("alpha and the clock do not share the same engine")]
    EngineMismatch,
    #[error("datation is undefined on state `{0}`")]
    RhoNotTotal(Label),
    #[error("datation of `{state}` is `{instant}`, which is not an instant")]
    RhoUnknownInstant { state: Label, instant: Label },
    #[error("datation mentions `{0}`, which is not a state")]
    RhoUnknownState(Label),
    #[error("not a clock: {0}")]
    NotAClock(String),
}

/// First violated multi-dynamic law, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicViolation {
    #[error("disjunctivity: state `{state}` belongs to both `{first}` and `{second}`")]
    Disjunctivity { state: Label, first: Label, second: Label },
    #[error("lax identity: identity of `{object}` for `{param}` sends `{state}` to `{target}`")]
    LaxIdentity { object: Label, param: Label, state: Label, target: Label },
    #[error("lax composition: (`{first}` then `{second}`) for `{param}` sends `{state}` to `{target}` outside the composite transition")]
    LaxComposition { first: Label, second: Label, param: Label, state: Label, target: Label },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicReport {
    pub functorial: bool,
    pub classification: Determinism,
    /// For each state, the parameter values for which it is offside.
    pub offside: BTreeMap<Label, BTreeSet<ParamId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiDynamic {
    engine: FinCategory,
    params: Vec<Label>,
    states: Vec<BTreeSet<Label>>,
    action: BTreeMap<(ArrowId, ParamId), Transition<Label>>,
}

impl MultiDynamic {
    /// Builds a dynamic; missing `(arrow, param)` entries are empty transitions.
    pub fn new(
        engine: FinCategory,
        params: Vec<Label>,
        states: Vec<BTreeSet<Label>>,
        action: BTreeMap<(ArrowId, ParamId), Transition<Label>>,
    ) -> Result<Self, DynamicError> {
        if states.len() != engine.objects().len() {
            return Err(DynamicError::StateCount {
                expected: engine.objects().len(),
                got: states.len(),
            });
        }
        if params.is_empty() {
            return Err(DynamicError::NoParams);
        }
        for (i, p) in params.iter().enumerate() {
            if params[..i].contains(p) {
                return Err(DynamicError::DuplicateParam(p.clone()));
            }
        }
        let mut full = BTreeMap::new();
        for a in engine.arrow_ids() {
            let arrow = engine.arrow(a);
            let dom = &states[arrow.dom.0];
            let cod = &states[arrow.cod.0];
            for p in 0..params.len() {
                let t = match action.get(&(a, ParamId(p))) {
                    Some(t) => {
                        if t.dom() != dom || t.cod() != cod {
                            return Err(DynamicError::IllTyped {
                                arrow: arrow.name.clone(),
                                param: params[p].clone(),
                            });
                        }
                        t.clone()
                    }
                    None => Transition::empty(dom.clone(), cod.clone()),
                };
                full.insert((a, ParamId(p)), t);
            }
        }
        if action
            .keys()
            .any(|(a, p)| a.0 >= engine.arrows().len() || p.0 >= params.len())
        {
            return Err(DynamicError::OutOfRange);
        }
        Ok(MultiDynamic {
            engine,
            params,
            states,
            action: full,
        })
    }

    /// Builds a dynamic from a successor function `f(arrow, param, state)`.
    pub fn from_fn<F>(
        engine: FinCategory,
        params: Vec<Label>,
        states: Vec<BTreeSet<Label>>,
        mut f: F,
    ) -> Result<Self, DynamicError>
    where
        F: FnMut(ArrowId, ParamId, &Label) -> Vec<Label>,
    {
        if states.len() != engine.objects().len() {
            return Err(DynamicError::StateCount {
                expected: engine.objects().len(),
                got: states.len(),
            });
        }
        let mut action = BTreeMap::new();
        for a in engine.arrow_ids() {
            let arrow = engine.arrow(a);
            let dom = &states[arrow.dom.0];
            let cod = &states[arrow.cod.0];
            for p in 0..params.len() {
                let mut t = Transition::empty(dom.clone(), cod.clone());
                for u in dom {
                    for v in f(a, ParamId(p), u) {
                        t.insert(u.clone(), v).map_err(|_| DynamicError::IllTyped {
                            arrow: arrow.name.clone(),
                            param: params[p].clone(),
                        })?;
                    }
                }
                action.insert((a, ParamId(p)), t);
            }
        }
        MultiDynamic::new(engine, params, states, action)
    }

    /// Builds a dynamic from names: states per object and explicit pairs per
    /// `(arrow, param)`.
    pub fn from_pairs(
        engine: FinCategory,
        params: &[&str],
        states: &[(&str, &[&str])],
        action: &[(&str, &str, &[(&str, &str)])],
    ) -> Result<Self, DynamicError> {
        let mut st = alloc::vec![BTreeSet::new(); engine.objects().len()];
        for &(o, ss) in states {
            let id = engine
                .object_id(o)
                .ok_or_else(|| DynamicError::UnknownObject(o.into()))?;
            st[id.0] = ss.iter().map(|&s| Label::from(s)).collect();
        }
        let params: Vec<Label> = params.iter().map(|&p| Label::from(p)).collect();
        let mut table = BTreeMap::new();
        for &(a, p, pairs) in action {
            let aid = engine
                .arrow_id(a)
                .ok_or_else(|| DynamicError::UnknownArrow(a.into()))?;
            let pid = params
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| DynamicError::UnknownParam(p.into()))?;
            let arrow = engine.arrow(aid);
            let t = Transition::new(
                st[arrow.dom.0].clone(),
                st[arrow.cod.0].clone(),
                pairs.iter().map(|&(u, v)| (Label::from(u), Label::from(v))),
            )
            .map_err(|_| DynamicError::IllTyped {
                arrow: a.into(),
                param: p.into(),
            })?;
            table.insert((aid, ParamId(pid)), t);
        }
        MultiDynamic::new(engine, params, st, table)
    }

    pub fn engine(&self) -> &FinCategory {
        &self.engine
    }

    pub fn params(&self) -> &[Label] {
        &self.params
    }

    pub fn param_ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn param_id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p == name).map(ParamId)
    }

    pub fn param_name(&self, p: ParamId) -> &Label {
        &self.params[p.0]
    }

    pub fn states(&self, o: ObjId) -> &BTreeSet<Label> {
        &self.states[o.0]
    }

    pub fn state_sets(&self) -> &[BTreeSet<Label>] {
        &self.states
    }

    /// `st(α)`, the union of all state sets.
    pub fn all_states(&self) -> BTreeSet<Label> {
        self.states.iter().flatten().cloned().collect()
    }

    pub fn state_count(&self) -> usize {
        self.states.iter().map(BTreeSet::len).sum()
    }

    /// The (first) object whose state set contains `s`.
    pub fn state_type(&self, s: &str) -> Option<ObjId> {
        self.states.iter().position(|ss| ss.contains(s)).map(ObjId)
    }

    pub fn action(&self, a: ArrowId, p: ParamId) -> &Transition<Label> {
        &self.action[&(a, p)]
    }

    pub fn actions(&self) -> &BTreeMap<(ArrowId, ParamId), Transition<Label>> {
        &self.action
    }

    pub fn validate(&self) -> Result<DynamicReport, DynamicViolation> {
        self.check_laws()?;
        Ok(DynamicReport {
            functorial: self.strict_unchecked(),
            classification: self.classify_unchecked(),
            offside: self.offside_unchecked(),
        })
    }

    fn check_laws(&self) -> Result<(), DynamicViolation> {
        let mut owner: BTreeMap<&Label, ObjId> = BTreeMap::new();
        for o in self.engine.object_ids() {
            for s in &self.states[o.0] {
                if let Some(&first) = owner.get(s) {
                    return Err(DynamicViolation::Disjunctivity {
                        state: s.clone(),
                        first: self.engine.object_name(first).clone(),
                        second: self.engine.object_name(o).clone(),
                    });
                }
                owner.insert(s, o);
            }
        }
        for o in self.engine.object_ids() {
            let id = self.engine.identity(o);
            for p in self.param_ids() {
                if let Some((u, v)) = self.action(id, p).pairs().find(|(u, v)| u != v) {
                    return Err(DynamicViolation::LaxIdentity {
                        object: self.engine.object_name(o).clone(),
                        param: self.params[p.0].clone(),
                        state: u.clone(),
                        target: v.clone(),
                    });
                }
            }
        }
        for (d, e) in self.engine.composable_pairs() {
            let Some(c) = self.engine.compose(d, e) else { continue };
            for p in self.param_ids() {
                let via = self
                    .action(d, p)
                    .then(self.action(e, p))
                    .expect("typed by construction");
                if let Some((u, v)) = self.action(c, p).pairs().find(|(u, v)| !via.contains(u, v)) {
                    return Err(DynamicViolation::LaxComposition {
                        first: self.engine.arrow_name(d).clone(),
                        second: self.engine.arrow_name(e).clone(),
                        param: self.params[p.0].clone(),
                        state: u.clone(),
                        target: v.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn strict_unchecked(&self) -> bool {
        let ids_ok = self.engine.object_ids().all(|o| {
            let id = Transition::identity(self.states[o.0].clone());
            self.param_ids()
                .all(|p| *self.action(self.engine.identity(o), p) == id)
        });
        ids_ok
            && self.engine.composable_pairs().all(|(d, e)| {
                let c = self.engine.compose(d, e).expect("composable");
                self.param_ids().all(|p| {
                    self.action(d, p).then(self.action(e, p)).as_ref() == Ok(self.action(c, p))
                })
            })
    }

    fn classify_unchecked(&self) -> Determinism {
        self.action
            .values()
            .map(Transition::classify)
            .max()
            .unwrap_or(Determinism::Deterministic)
    }

    fn offside_unchecked(&self) -> BTreeMap<Label, BTreeSet<ParamId>> {
        let mut out = BTreeMap::new();
        for o in self.engine.object_ids() {
            let id = self.engine.identity(o);
            for s in &self.states[o.0] {
                let off = self
                    .param_ids()
                    .filter(|&p| self.action(id, p).image_ref(s).is_none())
                    .collect();
                out.insert(s.clone(), off);
            }
        }
        out
    }

    pub fn is_functorial(&self) -> Result<bool, DynamicViolation> {
        self.check_laws()?;
        Ok(self.strict_unchecked())
    }

    pub fn classify(&self) -> Result<Determinism, DynamicViolation> {
        self.check_laws()?;
        Ok(self.classify_unchecked())
    }

    /// Parameter values for which each state is offside.
    pub fn offside_states(&self) -> BTreeMap<Label, BTreeSet<ParamId>> {
        self.offside_unchecked()
    }

    /// A state is offside (for the dynamic) when it is offside for every parameter value.
    pub fn is_offside(&self, s: &str) -> bool {
        let Some(o) = self.state_type(s) else { return false };
        let id = self.engine.identity(o);
        self.param_ids()
            .all(|p| self.action(id, p).image_ref(&Label::from(s)).is_none())
    }

    /// `β_μ = ⋃_{λ∈μ} α_λ` for every block `μ` of a partition of the parameters.
    pub fn quotient(&self, blocks: &[Vec<ParamId>], names: Vec<Label>) -> Result<MultiDynamic, QuotientError> {
        check_partition(self.params.len(), blocks)?;
        if names.len() != blocks.len() {
            return Err(QuotientError::BadPartition("one name per block is required".into()));
        }
        let mut action = BTreeMap::new();
        for a in self.engine.arrow_ids() {
            for (b, block) in blocks.iter().enumerate() {
                let mut t = self.action(a, block[0]).clone();
                for &p in &block[1..] {
                    t = t.union(self.action(a, p)).expect("same carriers");
                }
                action.insert((a, ParamId(b)), t);
            }
        }
        let beta = MultiDynamic::new(self.engine.clone(), names, self.states.clone(), action)
            .map_err(QuotientError::Malformed)?;
        beta.check_laws().map_err(QuotientError::Invalid)?;
        Ok(beta)
    }

    /// The same dynamic with renamed parameter values.
    pub fn with_param_names(&self, names: Vec<Label>) -> Result<MultiDynamic, DynamicError> {
        if names.len() != self.params.len() {
            return Err(DynamicError::OutOfRange);
        }
        MultiDynamic::new(self.engine.clone(), names, self.states.clone(), self.action.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("quotient data is malformed: {0}")]
    Malformed(DynamicError),
    #[error("quotient fails the dynamic laws: {0}")]
    Invalid(DynamicViolation),
}

fn check_partition(n: usize, blocks: &[Vec<ParamId>]) -> Result<(), QuotientError> {
    let mut seen = alloc::vec![false; n];
    for block in blocks {
        if block.is_empty() {
            return Err(QuotientError::BadPartition("empty block".into()));
        }
        for p in block {
            if p.0 >= n {
                return Err(QuotientError::BadPartition(format!("parameter id {} out of range", p.0)));
            }
            if core::mem::replace(&mut seen[p.0], true) {
                return Err(QuotientError::BadPartition(format!("parameter id {} in two blocks", p.0)));
            }
        }
    }
    if let Some(p) = seen.iter().position(|&s| !s) {
        return Err(QuotientError::BadPartition(format!("parameter id {p} is not covered")));
    }
    Ok(())
}

/// A deterministic mono-dynamic. Its states are instants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clock {
    dynamic: MultiDynamic,
}

impl Clock {
    pub fn from_dynamic(dynamic: MultiDynamic) -> Result<Self, DynamicError> {
        if dynamic.params().len() != 1 {
            return Err(DynamicError::NotAClock("a clock has exactly one parameter value".into()));
        }
        if let Err(v) = dynamic.check_laws() {
            return Err(DynamicError::NotAClock(format!("{v}")));
        }
        if dynamic.classify_unchecked() != Determinism::Deterministic {
            return Err(DynamicError::NotAClock("some duration is not a total function".into()));
        }
        Ok(Clock { dynamic })
    }

    /// Builds a clock from instants per object and a tick function.
    pub fn from_fn<F>(engine: FinCategory, instants: Vec<BTreeSet<Label>>, mut tick: F) -> Result<Self, DynamicError>
    where
        F: FnMut(ArrowId, &Label) -> Label,
    {
        let d = MultiDynamic::from_fn(engine, alloc::vec![Label::from("*")], instants, |a, _, s| {
            alloc::vec![tick(a, s)]
        })?;
        Clock::from_dynamic(d)
    }

    /// The clock with a single instant per object, named as given.
    pub fn essential(engine: FinCategory, names: &[&str]) -> Result<Self, DynamicError> {
        if names.len() != engine.objects().len() {
            return Err(DynamicError::StateCount {
                expected: engine.objects().len(),
                got: names.len(),
            });
        }
        let instants = names.iter().map(|&n| BTreeSet::from([Label::from(n)])).collect();
        let targets: Vec<Label> = names.iter().map(|&n| Label::from(n)).collect();
        let cods: Vec<ObjId> = engine.arrows().iter().map(|a| a.cod).collect();
        Clock::from_fn(engine, instants, |a, _| targets[cods[a.0].0].clone())
    }

    pub fn dynamic(&self) -> &MultiDynamic {
        &self.dynamic
    }

    pub fn engine(&self) -> &FinCategory {
        self.dynamic.engine()
    }

    pub fn instants(&self, o: ObjId) -> &BTreeSet<Label> {
        self.dynamic.states(o)
    }

    pub fn all_instants(&self) -> BTreeSet<Label> {
        self.dynamic.all_states()
    }

    pub fn instant_type(&self, t: &str) -> Option<ObjId> {
        self.dynamic.state_type(t)
    }

    /// `d^h(t)`; `None` if `t` is not an instant of the arrow's domain.
    pub fn tick(&self, a: ArrowId, t: &Label) -> Option<&Label> {
        self.dynamic.action(a, ParamId(0)).apply(t)
    }

    /// All pairs `(s, t)` such that `e^h(s) = t` for some arrow `e`.
    pub fn anteriority(&self) -> BTreeSet<(Label, Label)> {
        let mut out = BTreeSet::new();
        for a in self.engine().arrow_ids() {
            for (s, t) in self.dynamic.action(a, ParamId(0)).pairs() {
                out.insert((s.clone(), t.clone()));
            }
        }
        out
    }
}

/// A multi-dynamic with a clock and a datation `ρ: st(α) → st(h)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenDynamic {
    alpha: MultiDynamic,
    clock: Clock,
    rho: BTreeMap<Label, Label>,
}

/// First violated open-dynamic condition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpenViolation {
    #[error("{0}")]
    Dynamic(DynamicViolation),
    #[error("datation sends `{state}` (type `{object}`) to `{instant}`, an instant of another type")]
    RhoTyping { state: Label, object: Label, instant: Label },
    #[error("datation is not natural: `{state}` -> `{target}` under `{arrow}` for `{param}`")]
    RhoNaturality { arrow: Label, param: Label, state: Label, target: Label },
}

impl OpenDynamic {
    pub fn new(alpha: MultiDynamic, clock: Clock, rho: BTreeMap<Label, Label>) -> Result<Self, DynamicError> {
        if alpha.engine() != clock.engine() {
            return Err(DynamicError::EngineMismatch);
        }
        let states = alpha.all_states();
        let instants = clock.all_instants();
        for s in &states {
            match rho.get(s) {
                None => return Err(DynamicError::RhoNotTotal(s.clone())),
                Some(t) if !instants.contains(t) => {
                    return Err(DynamicError::RhoUnknownInstant {
                        state: s.clone(),
                        instant: t.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        if let Some(s) = rho.keys().find(|s| !states.contains(*s)) {
            return Err(DynamicError::RhoUnknownState(s.clone()));
        }
        Ok(OpenDynamic { alpha, clock, rho })
    }

    /// Builds an open dynamic whose datation is read from each state's type,
    /// for clocks with one instant per object.
    pub fn over_essential_clock(alpha: MultiDynamic, instant_names: &[&str]) -> Result<Self, DynamicError> {
        let clock = Clock::essential(alpha.engine().clone(), instant_names)?;
        let mut rho = BTreeMap::new();
        for o in alpha.engine().object_ids() {
            for s in alpha.states(o) {
                rho.insert(s.clone(), Label::from(instant_names[o.0]));
            }
        }
        OpenDynamic::new(alpha, clock, rho)
    }

    pub fn alpha(&self) -> &MultiDynamic {
        &self.alpha
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn rho(&self) -> &BTreeMap<Label, Label> {
        &self.rho
    }

    pub fn date(&self, s: &str) -> Option<&Label> {
        self.rho.get(s)
    }

    pub fn engine(&self) -> &FinCategory {
        self.alpha.engine()
    }

    /// `ρ⁻¹(t)`.
    pub fn fiber(&self, t: &Label) -> BTreeSet<Label> {
        self.rho
            .iter()
            .filter(|(_, i)| *i == t)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn validate(&self) -> Result<DynamicReport, OpenViolation> {
        let report = self.alpha.validate().map_err(OpenViolation::Dynamic)?;
        let e = self.engine();
        for o in e.object_ids() {
            for s in self.alpha.states(o) {
                let t = &self.rho[s];
                if !self.clock.instants(o).contains(t) {
                    return Err(OpenViolation::RhoTyping {
                        state: s.clone(),
                        object: e.object_name(o).clone(),
                        instant: t.clone(),
                    });
                }
            }
        }
        for a in e.arrow_ids() {
            for p in self.alpha.param_ids() {
                for (u, v) in self.alpha.action(a, p).pairs() {
                    if self.clock.tick(a, &self.rho[u]) != Some(&self.rho[v]) {
                        return Err(OpenViolation::RhoNaturality {
                            arrow: e.arrow_name(a).clone(),
                            param: self.alpha.param_name(p).clone(),
                            state: u.clone(),
                            target: v.clone(),
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    pub fn with_alpha(&self, alpha: MultiDynamic) -> Result<Self, DynamicError> {
        OpenDynamic::new(alpha, self.clock.clone(), self.rho.clone())
    }
}

/// Parametric quotient of an open dynamic. Blocks are named by `names` when
/// given; otherwise singleton blocks keep their label and larger blocks are
/// named `{a,b,...}`.
pub fn parametric_quotient(
    a: &OpenDynamic,
    blocks: &[Vec<ParamId>],
    names: Option<Vec<Label>>,
) -> Result<OpenDynamic, QuotientError> {
    let names = names.unwrap_or_else(|| {
        blocks
            .iter()
            .map(|b| match b.as_slice() {
                [p] if p.0 < a.alpha.params.len() => a.alpha.param_name(*p).clone(),
                _ => {
                    let inner: Vec<&str> = b
                        .iter()
                        .filter(|p| p.0 < a.alpha.params.len())
                        .map(|&p| a.alpha.param_name(p).as_str())
                        .collect();
                    Label::from(format!("{{{}}}", inner.join(",")))
                }
            })
            .collect()
    });
    let beta = a.alpha.quotient(blocks, names)?;
    a.with_alpha(beta).map_err(QuotientError::Malformed)
}

/// Data of a multi-dynamorphism `(θ, Δ, δ)` with explicit ends.
///
/// `delta` is one flat transition `st(α) ⇝ st(β)`; its component at `S` is
/// its restriction to `S^α`. Without a functor the engines must coincide and
/// `Δ` is the identity.
#[derive(Clone, Debug)]
pub struct DynamorphismWitness<'a> {
    pub domain: &'a MultiDynamic,
    pub codomain: &'a MultiDynamic,
    pub theta: Vec<ParamId>,
    pub functor: Option<Functor>,
    pub delta: Transition<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamorphismViolation {
    #[error("parameter map has the wrong shape")]
    ThetaShape,
    #[error("engine functor is invalid: {0}")]
    Functor(crate::fincat::FunctorViolation),
    #[error("no functor given and the engines differ")]
    EngineMismatch,
    #[error("delta carriers are not st(domain) and st(codomain)")]
    DeltaCarriers,
    #[error("delta sends `{state}` outside the state set of the image type")]
    DeltaTyping { state: Label },
    #[error("naturality fails for `{param}` along `{arrow}` at `{state}`")]
    Naturality { param: Label, arrow: Label, state: Label },
}

impl DynamorphismWitness<'_> {
    fn functor(&self) -> Result<Functor, DynamorphismViolation> {
        match &self.functor {
            Some(f) => {
                f.check(self.domain.engine(), self.codomain.engine())
                    .map_err(DynamorphismViolation::Functor)?;
                Ok(f.clone())
            }
            None if self.domain.engine() == self.codomain.engine() => Ok(Functor::identity(self.domain.engine())),
            None => Err(DynamorphismViolation::EngineMismatch),
        }
    }

    /// Checks `δ_T ⊙ d^α_λ ⊆ (Δd)^β_{θ(λ)} ⊙ δ_S` for every arrow and parameter.
    pub fn check(&self) -> Result<(), DynamorphismViolation> {
        let (alpha, beta) = (self.domain, self.codomain);
        if self.theta.len() != alpha.params().len() || self.theta.iter().any(|m| m.0 >= beta.params().len()) {
            return Err(DynamorphismViolation::ThetaShape);
        }
        let f = self.functor()?;
        if *self.delta.dom() != alpha.all_states() || *self.delta.cod() != beta.all_states() {
            return Err(DynamorphismViolation::DeltaCarriers);
        }
        for o in alpha.engine().object_ids() {
            let target = beta.states(f.object(o));
            for s in alpha.states(o) {
                if let Some(img) = self.delta.image_ref(s) {
                    if !img.is_subset(target) {
                        return Err(DynamorphismViolation::DeltaTyping { state: s.clone() });
                    }
                }
            }
        }
        let e = alpha.engine();
        for p in alpha.param_ids() {
            let m = self.theta[p.0];
            for d in e.arrow_ids() {
                let bd = beta.action(f.arrow(d), m);
                for s in alpha.states(e.arrow(d).dom) {
                    let lhs: BTreeSet<Label> = alpha
                        .action(d, p)
                        .image(s)
                        .iter()
                        .flat_map(|b| self.delta.image(b))
                        .collect();
                    let rhs: BTreeSet<Label> = self
                        .delta
                        .image(s)
                        .iter()
                        .flat_map(|x| bd.image(x))
                        .collect();
                    if !lhs.is_subset(&rhs) {
                        return Err(DynamorphismViolation::Naturality {
                            param: alpha.param_name(p).clone(),
                            arrow: e.arrow_name(d).clone(),
                            state: s.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Checks a datation as a dynamorphism from `α` to its clock.
pub fn datation_witness(a: &OpenDynamic) -> Transition<Label> {
    Transition::new(
        a.alpha.all_states(),
        a.clock.all_instants(),
        a.rho.iter().map(|(s, t)| (s.clone(), t.clone())),
    )
    .expect("datation is typed")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpenDynamorphismViolation {
    #[error("not a multi-dynamorphism: {0}")]
    Multi(DynamorphismViolation),
    #[error("epsilon is not a total map between instants")]
    EpsilonShape,
    #[error("synchronization fails at `{state}`: its images are not dated `{expected}`")]
    Synchronization { state: Label, expected: Label },
    #[error("(Delta, epsilon) is not a clock dynamorphism: {0}")]
    Clock(DynamorphismViolation),
}

/// Checks an open dynamorphism `(θ, Δ, δ, ε)` from `from` to `to`: the
/// multi-dynamorphism condition, then the lax synchronization `τ⊙δ ⊆ ε⊙ρ`,
/// then the clock condition on `(Δ, ε)`.
pub fn check_open_dynamorphism(
    from: &OpenDynamic,
    to: &OpenDynamic,
    theta: Vec<ParamId>,
    functor: Option<Functor>,
    delta: Transition<Label>,
    epsilon: &BTreeMap<Label, Label>,
) -> Result<(), OpenDynamorphismViolation> {
    let w = DynamorphismWitness {
        domain: from.alpha(),
        codomain: to.alpha(),
        theta,
        functor: functor.clone(),
        delta,
    };
    w.check().map_err(OpenDynamorphismViolation::Multi)?;
    let instants = from.clock.all_instants();
    let targets = to.clock.all_instants();
    if instants.iter().any(|t| !epsilon.get(t).is_some_and(|e| targets.contains(e)))
        || epsilon.keys().any(|t| !instants.contains(t))
    {
        return Err(OpenDynamorphismViolation::EpsilonShape);
    }
    for (s, ts) in w.delta.pairs() {
        let expected = &epsilon[&from.rho[s]];
        if &to.rho[ts] != expected {
            return Err(OpenDynamorphismViolation::Synchronization {
                state: s.clone(),
                expected: expected.clone(),
            });
        }
    }
    let eps = Transition::new(
        instants,
        targets,
        epsilon.iter().map(|(a, b)| (a.clone(), b.clone())),
    )
    .expect("checked above");
    DynamorphismWitness {
        domain: from.clock.dynamic(),
        codomain: to.clock.dynamic(),
        theta: alloc::vec![ParamId(0)],
        functor,
        delta: eps,
    }
    .check()
    .map_err(OpenDynamorphismViolation::Clock)
}
