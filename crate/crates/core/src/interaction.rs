//! Families of open dynamics and their interactions.
//!
//! An [`InteractionRequest`] is a multiple binary relation whose incoming
//! context at member `i` is `Z_i` (indices into the member's outgoing
//! realizations) and whose outgoing context is `L_i`. Together with a
//! [`Synchronization`] of the members' clocks and an [`Intimacy`] on parameter
//! tuples it forms an [`InteractiveFamily`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{OpenDynamic, OpenViolation, ParamId};
use crate::fincat::{ArrowId, Functor, ObjId};
use crate::multirel::{MultipleBinaryRelation, MultirelError, Tuple};
use crate::realization::{enumerate_realizations_capped, RealizationSet, SearchBudgetExceeded, Section};
use crate::{Label, DEFAULT_SEARCH_CAP, REQUEST_GRID_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("member `{0}` appears twice")]
    DuplicateMember(Label),
    #[error("member `{member}` is invalid: {violation}")]
    InvalidMember { member: Label, violation: OpenViolation },
    #[error(transparent)]
    Budget(#[from] SearchBudgetExceeded),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub index: Label,
    pub dynamic: OpenDynamic,
    pub realizations: RealizationSet,
}

/// An `I`-family of open dynamics, sorted by index, with cached realizations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicsFamily {
    members: Vec<Member>,
}

impl DynamicsFamily {
    pub fn new(members: Vec<(Label, OpenDynamic)>) -> Result<Self, FamilyError> {
        DynamicsFamily::with_cap(members, DEFAULT_SEARCH_CAP)
    }

    pub fn with_cap(mut members: Vec<(Label, OpenDynamic)>, cap: u64) -> Result<Self, FamilyError> {
        members.sort_by(|a, b| a.0.cmp(&b.0));
        for w in members.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(FamilyError::DuplicateMember(w[0].0.clone()));
            }
        }
        let mut out = Vec::with_capacity(members.len());
        for (index, dynamic) in members {
            dynamic.validate().map_err(|violation| FamilyError::InvalidMember {
                member: index.clone(),
                violation,
            })?;
            let realizations = enumerate_realizations_capped(&dynamic, cap)?;
            out.push(Member {
                index,
                dynamic,
                realizations,
            });
        }
        Ok(DynamicsFamily { members: out })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, index: &str) -> Option<usize> {
        self.members.iter().position(|m| m.index == index)
    }

    pub fn member(&self, index: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.index == index)
    }

    pub fn indices(&self) -> BTreeSet<Label> {
        self.members.iter().map(|m| m.index.clone()).collect()
    }

    /// Incoming context `𝒵`: realization indices per member.
    pub fn z_context(&self) -> BTreeMap<Label, BTreeSet<usize>> {
        self.members
            .iter()
            .map(|m| (m.index.clone(), (0..m.realizations.outgoing().len()).collect()))
            .collect()
    }

    /// Outgoing context `ℒ`.
    pub fn l_context(&self) -> BTreeMap<Label, BTreeSet<ParamId>> {
        self.members
            .iter()
            .map(|m| (m.index.clone(), m.dynamic.alpha().param_ids().collect()))
            .collect()
    }

    /// Whether `σ_i ∈ Z_{i,λ_i}` for every member.
    pub fn is_coherent(&self, t: &Tuple<Label, (usize, ParamId)>) -> bool {
        self.members.iter().all(|m| match t.get(&m.index) {
            Some(&(z, p)) => m.realizations.contains(p, z),
            None => false,
        })
    }

    pub fn section(&self, member: usize, z: usize) -> &Section {
        &self.members[member].realizations.outgoing()[z]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequestError {
    #[error("request grid has {0} points, above the cap")]
    GridTooLarge(u128),
    #[error(transparent)]
    Relation(#[from] MultirelError),
    #[error("request contexts differ from the family's")]
    ContextMismatch,
    #[error("relation is not coherent")]
    NotCoherent,
}

pub type RequestTuple = Tuple<Label, (usize, ParamId)>;

/// An interaction request: a multiple binary relation `(𝒵, ℒ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionRequest {
    relation: MultipleBinaryRelation<Label, usize, ParamId>,
}

fn grid_size(family: &DynamicsFamily) -> u128 {
    family
        .members()
        .iter()
        .map(|m| m.realizations.outgoing().len() as u128 * m.dynamic.alpha().params().len() as u128)
        .product()
}

impl InteractionRequest {
    pub fn extensional(
        family: &DynamicsFamily,
        graph: impl IntoIterator<Item = RequestTuple>,
    ) -> Result<Self, RequestError> {
        Ok(InteractionRequest {
            relation: MultipleBinaryRelation::new(family.z_context(), family.l_context(), graph)?,
        })
    }

    /// The request whose graph is every grid point accepted by `pred`. The
    /// predicate sees `(member, σ_i)` and `(member, λ_i)` in member order.
    pub fn from_predicate<F>(family: &DynamicsFamily, mut pred: F) -> Result<Self, RequestError>
    where
        F: FnMut(&[(&Label, &Section)], &[(&Label, &Label)]) -> bool,
    {
        let size = grid_size(family);
        if size > REQUEST_GRID_CAP as u128 {
            return Err(RequestError::GridTooLarge(size));
        }
        let mut graph = Vec::new();
        for_each_grid_point(family, |t| {
            let sigmas: Vec<(&Label, &Section)> = family
                .members()
                .iter()
                .zip(t)
                .map(|(m, &(z, _))| (&m.index, &m.realizations.outgoing()[z]))
                .collect();
            let params: Vec<(&Label, &Label)> = family
                .members()
                .iter()
                .zip(t)
                .map(|(m, &(_, p))| (&m.index, m.dynamic.alpha().param_name(p)))
                .collect();
            if pred(&sigmas, &params) {
                graph.push(to_tuple(family, t));
            }
        });
        InteractionRequest::extensional(family, graph)
    }

    /// `Ω_𝒜`, the maximal coherent request.
    pub fn omega(family: &DynamicsFamily) -> Self {
        let per_member: Vec<Vec<(usize, ParamId)>> = family
            .members()
            .iter()
            .map(|m| {
                m.dynamic
                    .alpha()
                    .param_ids()
                    .flat_map(|p| m.realizations.for_param(p).iter().map(move |&z| (z, p)))
                    .collect()
            })
            .collect();
        let mut graph = Vec::new();
        let mut current = Vec::with_capacity(per_member.len());
        product_rec(&per_member, &mut current, &mut |t| graph.push(to_tuple(family, t)));
        InteractionRequest::extensional(family, graph).expect("typed by construction")
    }

    /// The request whose graph is all of `Π (Z_i × L_i)`.
    pub fn full(family: &DynamicsFamily) -> Result<Self, RequestError> {
        InteractionRequest::from_predicate(family, |_, _| true)
    }

    pub fn relation(&self) -> &MultipleBinaryRelation<Label, usize, ParamId> {
        &self.relation
    }

    pub fn graph(&self) -> &BTreeSet<RequestTuple> {
        self.relation.graph()
    }

    pub fn len(&self) -> usize {
        self.relation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relation.is_empty()
    }

    fn check_context(&self, family: &DynamicsFamily) -> Result<(), RequestError> {
        if *self.relation.incoming() == family.z_context() && *self.relation.outgoing() == family.l_context() {
            Ok(())
        } else {
            Err(RequestError::ContextMismatch)
        }
    }

    /// `Q̌ = Q ∩ Ω_𝒜`.
    pub fn coherent_part(&self, family: &DynamicsFamily) -> Result<Self, RequestError> {
        self.check_context(family)?;
        let graph: Vec<RequestTuple> = self.graph().iter().filter(|t| family.is_coherent(t)).cloned().collect();
        Ok(InteractionRequest {
            relation: self.relation.with_graph(graph)?,
        })
    }

    pub fn is_coherent(&self, family: &DynamicsFamily) -> bool {
        self.graph().iter().all(|t| family.is_coherent(t))
    }

    /// `Im(br(Q))` as positional parameter tuples (member order).
    pub fn param_image(&self) -> BTreeSet<Vec<ParamId>> {
        self.graph().iter().map(|t| t.values().map(|&(_, p)| p).collect()).collect()
    }
}

fn to_tuple(family: &DynamicsFamily, t: &[(usize, ParamId)]) -> RequestTuple {
    family.members().iter().zip(t).map(|(m, &x)| (m.index.clone(), x)).collect()
}

fn product_rec<T: Copy>(per: &[Vec<T>], current: &mut Vec<T>, f: &mut impl FnMut(&[T])) {
    if current.len() == per.len() {
        f(current);
        return;
    }
    for &x in &per[current.len()] {
        current.push(x);
        product_rec(per, current, f);
        current.pop();
    }
}

fn for_each_grid_point(family: &DynamicsFamily, mut f: impl FnMut(&[(usize, ParamId)])) {
    let per: Vec<Vec<(usize, ParamId)>> = family
        .members()
        .iter()
        .map(|m| {
            (0..m.realizations.outgoing().len())
                .flat_map(|z| m.dynamic.alpha().param_ids().map(move |p| (z, p)))
                .collect()
        })
        .collect();
    let mut current = Vec::with_capacity(per.len());
    product_rec(&per, &mut current, &mut f);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RequestClass {
    pub normal: bool,
    pub admissible: bool,
    pub functional: bool,
    pub strongly_functional: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelationClass {
    pub normal: bool,
    pub efficient: bool,
    pub functional: bool,
    pub strongly_functional: bool,
}

fn nonempty_sections(family: &DynamicsFamily) -> Vec<Vec<usize>> {
    family
        .members()
        .iter()
        .map(|m| {
            m.realizations
                .outgoing()
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(k, _)| k)
                .collect()
        })
        .collect()
}

fn sigma_part(t: &RequestTuple) -> Vec<usize> {
    t.values().map(|&(z, _)| z).collect()
}

/// `Def_{br(Q)} ⊇ Π 𝒵*`, with `extra` deciding membership for tuples outside `Def`.
fn covers_nonempty(family: &DynamicsFamily, q: &InteractionRequest, mut extra: impl FnMut(&[usize]) -> bool) -> bool {
    let def: BTreeSet<Vec<usize>> = q.graph().iter().map(sigma_part).collect();
    let per = nonempty_sections(family);
    let mut ok = true;
    let mut current = Vec::with_capacity(per.len());
    product_rec(&per, &mut current, &mut |t: &[usize]| {
        if ok && !def.contains(t) && !extra(t) {
            ok = false;
        }
    });
    ok
}

fn is_functional(q: &InteractionRequest) -> bool {
    let mut seen: BTreeMap<Vec<usize>, Vec<ParamId>> = BTreeMap::new();
    for t in q.graph() {
        let lam: Vec<ParamId> = t.values().map(|&(_, p)| p).collect();
        if let Some(prev) = seen.insert(sigma_part(t), lam.clone()) {
            if prev != lam {
                return false;
            }
        }
    }
    true
}

fn is_strongly_functional(q: &InteractionRequest, n: usize) -> bool {
    for i in 0..n {
        let mut seen: BTreeMap<Vec<usize>, ParamId> = BTreeMap::new();
        for t in q.graph() {
            let vals: Vec<&(usize, ParamId)> = t.values().collect();
            let others: Vec<usize> = vals
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &&(z, _))| z)
                .collect();
            let lam = vals[i].1;
            if let Some(prev) = seen.insert(others, lam) {
                if prev != lam {
                    return false;
                }
            }
        }
    }
    true
}

pub fn classify_request(family: &DynamicsFamily, q: &InteractionRequest) -> Result<RequestClass, RequestError> {
    q.check_context(family)?;
    Ok(RequestClass {
        normal: covers_nonempty(family, q, |_| false),
        admissible: q.graph().iter().any(|t| family.is_coherent(t)),
        functional: is_functional(q),
        strongly_functional: is_strongly_functional(q, family.len()),
    })
}

/// Classifies an interaction relation (a coherent request).
///
/// A relation `R` is normal when some normal request has `R` as coherent
/// part. Every such request lies inside `R ∪ (Π ℰ ∖ Ω)`, and normality only
/// grows with the graph, so `R` is normal exactly when that completion is:
/// every `σ ∈ Π 𝒵*` outside `Def_{br(R)}` must admit an incoherent parameter
/// tuple, that is some `σ_i` missing from some `Z_{i,λ}`.
pub fn classify_relation(
    family: &DynamicsFamily,
    r: &InteractionRequest,
    witness: Option<&InteractionRequest>,
) -> Result<RelationClass, RequestError> {
    r.check_context(family)?;
    if !r.is_coherent(family) {
        return Err(RequestError::NotCoherent);
    }
    let witnessed = match witness {
        Some(q) => q.coherent_part(family)? == *r && classify_request(family, q)?.normal,
        None => false,
    };
    let partial: Vec<BTreeSet<usize>> = family
        .members()
        .iter()
        .map(|m| {
            (0..m.realizations.outgoing().len())
                .filter(|&z| m.dynamic.alpha().param_ids().any(|p| !m.realizations.contains(p, z)))
                .collect()
        })
        .collect();
    let normal = witnessed || covers_nonempty(family, r, |t| t.iter().zip(&partial).any(|(z, s)| s.contains(z)));
    let def_size = r.graph().iter().map(sigma_part).collect::<BTreeSet<_>>().len() as u128;
    let total: u128 = family
        .members()
        .iter()
        .map(|m| m.realizations.outgoing().len() as u128)
        .product();
    Ok(RelationClass {
        normal,
        efficient: def_size < total,
        functional: is_functional(r),
        strongly_functional: is_strongly_functional(r, family.len()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// The synchronization data `(Δ_i, δ_i)` of one member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncComponent {
    /// `Δ_i` on objects, indexed by the conductor's object ids.
    pub objects: Vec<ObjId>,
    /// `δ_i` from the conductor's instants to the member's instants.
    pub instants: BTreeMap<Label, Label>,
    pub monotonicity: Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synchronization {
    pub conductor: Label,
    pub components: BTreeMap<Label, SyncComponent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyncViolation {
    #[error("conductor `{0}` is not a member")]
    UnknownConductor(Label),
    #[error("member `{0}` has no synchronization component")]
    MissingComponent(Label),
    #[error("component for `{0}`, which is not a member")]
    UnknownMember(Label),
    #[error("the conductor's own component is not the identity")]
    ConductorNotIdentity,
    #[error("object map of `{0}` has the wrong shape")]
    ObjectMapShape(Label),
    #[error("instant map of `{member}` is undefined at `{instant}`")]
    InstantMapPartial { member: Label, instant: Label },
    #[error("instant map of `{member}` sends `{instant}` outside the instants of the image type")]
    Compatibility { member: Label, instant: Label },
    #[error("instant map of `{member}` is not {tag:?} on ({s}, {t})")]
    Monotonicity { member: Label, tag: Monotonicity, s: Label, t: Label },
    #[error("identity synchronization needs members sharing the conductor's clock; `{0}` does not")]
    NotIdentical(Label),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncReport {
    /// Per member, whether `(Δ_i, δ_i)` extends to a clock dynamorphism.
    pub rigid: BTreeMap<Label, bool>,
}

impl SyncReport {
    pub fn is_rigid(&self) -> bool {
        self.rigid.values().all(|&r| r)
    }
}

impl Synchronization {
    /// Identity synchronizations; every member must share the conductor's clock.
    pub fn identity(family: &DynamicsFamily, conductor: &str) -> Result<Self, SyncViolation> {
        let lead = family
            .member(conductor)
            .ok_or_else(|| SyncViolation::UnknownConductor(conductor.into()))?;
        let clock = lead.dynamic.clock();
        let mut components = BTreeMap::new();
        for m in family.members() {
            if m.dynamic.clock() != clock {
                return Err(SyncViolation::NotIdentical(m.index.clone()));
            }
            components.insert(
                m.index.clone(),
                SyncComponent {
                    objects: clock.engine().object_ids().collect(),
                    instants: clock.all_instants().into_iter().map(|t| (t.clone(), t)).collect(),
                    monotonicity: Monotonicity::Increasing,
                },
            );
        }
        Ok(Synchronization {
            conductor: conductor.into(),
            components,
        })
    }

    pub fn check(&self, family: &DynamicsFamily) -> Result<SyncReport, SyncViolation> {
        let lead = family
            .member(&self.conductor)
            .ok_or_else(|| SyncViolation::UnknownConductor(self.conductor.clone()))?;
        if let Some(k) = self.components.keys().find(|k| family.member(k).is_none()) {
            return Err(SyncViolation::UnknownMember(k.clone()));
        }
        let h0 = lead.dynamic.clock();
        let e = h0.engine();
        let before = h0.anteriority();
        let mut rigid = BTreeMap::new();
        for m in family.members() {
            let c = self
                .components
                .get(&m.index)
                .ok_or_else(|| SyncViolation::MissingComponent(m.index.clone()))?;
            let hi = m.dynamic.clock();
            let ei = hi.engine();
            if c.objects.len() != e.objects().len() || c.objects.iter().any(|o| o.0 >= ei.objects().len()) {
                return Err(SyncViolation::ObjectMapShape(m.index.clone()));
            }
            if m.index == self.conductor
                && (c.objects.iter().enumerate().any(|(k, o)| o.0 != k)
                    || c.instants.iter().any(|(s, t)| s != t)
                    || c.instants.len() != h0.all_instants().len())
            {
                return Err(SyncViolation::ConductorNotIdentity);
            }
            for o in e.object_ids() {
                for s in h0.instants(o) {
                    let t = c.instants.get(s).ok_or_else(|| SyncViolation::InstantMapPartial {
                        member: m.index.clone(),
                        instant: s.clone(),
                    })?;
                    if !hi.instants(c.objects[o.0]).contains(t) {
                        return Err(SyncViolation::Compatibility {
                            member: m.index.clone(),
                            instant: s.clone(),
                        });
                    }
                }
            }
            let after = hi.anteriority();
            for (s, t) in &before {
                let (ds, dt) = (&c.instants[s], &c.instants[t]);
                let pair = match c.monotonicity {
                    Monotonicity::Increasing => (ds.clone(), dt.clone()),
                    Monotonicity::Decreasing => (dt.clone(), ds.clone()),
                };
                if !after.contains(&pair) {
                    return Err(SyncViolation::Monotonicity {
                        member: m.index.clone(),
                        tag: c.monotonicity,
                        s: s.clone(),
                        t: t.clone(),
                    });
                }
            }
            rigid.insert(m.index.clone(), find_rigid_functor(lead, m, c).is_some());
        }
        Ok(SyncReport { rigid })
    }
}

/// Searches an arrow map making `(Δ, δ)` a functor and a clock dynamorphism.
fn find_rigid_functor(lead: &Member, m: &Member, c: &SyncComponent) -> Option<Functor> {
    let h0 = lead.dynamic.clock();
    let hi = m.dynamic.clock();
    let e = h0.engine();
    let ei = hi.engine();
    let mut candidates: Vec<Vec<ArrowId>> = Vec::new();
    for d in e.arrow_ids() {
        let arrow = e.arrow(d);
        let (src, dst) = (c.objects[arrow.dom.0], c.objects[arrow.cod.0]);
        let options: Vec<ArrowId> = ei
            .arrow_ids()
            .filter(|&a| ei.arrow(a).dom == src && ei.arrow(a).cod == dst)
            .filter(|&a| {
                h0.instants(arrow.dom).iter().all(|s| {
                    let next = h0.tick(d, s).expect("total");
                    hi.tick(a, &c.instants[s]) == Some(&c.instants[next])
                })
            })
            .collect();
        if options.is_empty() {
            return None;
        }
        candidates.push(options);
    }
    let mut chosen = Vec::with_capacity(candidates.len());
    let mut found = None;
    product_rec(&candidates, &mut chosen, &mut |arrows: &[ArrowId]| {
        if found.is_none() {
            let f = Functor {
                objects: c.objects.clone(),
                arrows: arrows.to_vec(),
            };
            if f.check(e, ei).is_ok() {
                found = Some(f);
            }
        }
    });
    found
}

pub type ParamTuple = Vec<ParamId>;

/// An intimacy (social mode): an equivalence relation on parameter tuples,
/// given by a key function or by explicit blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intimacy {
    Equality,
    Total,
    /// Tuples are intimate when member `member`'s transition along `arrow`
    /// sends `state` to the same set.
    ActionKey { member: Label, arrow: Label, state: Label },
    /// Explicit blocks of positional parameter tuples.
    Blocks(Vec<BTreeSet<ParamTuple>>),
    /// `μ ~ λ` iff for every member, `μ_i = λ_i` or both lie in `N_i`.
    Coordinatewise(Vec<BTreeSet<ParamId>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntimacyError {
    #[error("parameter tuple {0} is not covered by the intimacy's blocks")]
    NotCovering(String),
    #[error("parameter tuple {0} lies in two blocks")]
    Overlapping(String),
    #[error("intimacy refers to unknown member, arrow or state `{0}`")]
    Unknown(Label),
    #[error("coordinatewise intimacy needs one set per member")]
    Shape,
}

/// Key of a tuple under an intimacy; equal keys mean intimate tuples.
type Key = Vec<Option<Label>>;

impl Intimacy {
    fn key(&self, family: &DynamicsFamily, t: &[ParamId]) -> Result<Key, IntimacyError> {
        let name = |k: usize, p: ParamId| family.members()[k].dynamic.alpha().param_name(p).clone();
        Ok(match self {
            Intimacy::Equality => t.iter().enumerate().map(|(k, &p)| Some(name(k, p))).collect(),
            Intimacy::Total => Vec::new(),
            Intimacy::ActionKey { member, arrow, state } => {
                let k = family.position(member).ok_or_else(|| IntimacyError::Unknown(member.clone()))?;
                let alpha = family.members()[k].dynamic.alpha();
                let a = alpha
                    .engine()
                    .arrow_id(arrow)
                    .ok_or_else(|| IntimacyError::Unknown(arrow.clone()))?;
                if alpha.state_type(state).is_none() {
                    return Err(IntimacyError::Unknown(state.clone()));
                }
                alpha.action(a, t[k]).image(state).into_iter().map(Some).collect()
            }
            Intimacy::Blocks(blocks) => {
                let mut hits = blocks.iter().enumerate().filter(|(_, b)| b.contains(t));
                let first = hits.next().ok_or_else(|| IntimacyError::NotCovering(show_tuple(family, t)))?;
                if hits.next().is_some() {
                    return Err(IntimacyError::Overlapping(show_tuple(family, t)));
                }
                alloc::vec![Some(Label::from(format!("{}", first.0)))]
            }
            Intimacy::Coordinatewise(n) => {
                if n.len() != t.len() {
                    return Err(IntimacyError::Shape);
                }
                t.iter()
                    .enumerate()
                    .map(|(k, &p)| if n[k].contains(&p) { None } else { Some(name(k, p)) })
                    .collect()
            }
        })
    }

    /// Partition of `m` into intimacy classes, as index blocks ordered by
    /// their first element, with one display name per block.
    pub fn partition(
        &self,
        family: &DynamicsFamily,
        m: &[ParamTuple],
    ) -> Result<(Vec<Vec<usize>>, Vec<Label>), IntimacyError> {
        let mut by_key: BTreeMap<Key, usize> = BTreeMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut keys: Vec<Key> = Vec::new();
        for (k, t) in m.iter().enumerate() {
            let key = self.key(family, t)?;
            match by_key.get(&key) {
                Some(&b) => blocks[b].push(k),
                None => {
                    by_key.insert(key.clone(), blocks.len());
                    blocks.push(alloc::vec![k]);
                    keys.push(key);
                }
            }
        }
        let names = blocks
            .iter()
            .zip(&keys)
            .map(|(b, key)| match self {
                Intimacy::Equality => Label::from(show_tuple(family, &m[b[0]])),
                Intimacy::Total => Label::from("*"),
                _ => {
                    let parts: Vec<&str> = key.iter().map(|x| x.as_ref().map_or("_", Label::as_str)).collect();
                    Label::from(format!("[{}]", parts.join(",")))
                }
            })
            .collect();
        Ok((blocks, names))
    }
}

/// `(λ_1,...,λ_n)` with parameter names, in member order.
pub fn show_tuple(family: &DynamicsFamily, t: &[ParamId]) -> String {
    let parts: Vec<&str> = family
        .members()
        .iter()
        .zip(t)
        .map(|(m, &p)| m.dynamic.alpha().param_name(p).as_str())
        .collect();
    format!("({})", parts.join(","))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InteractiveError {
    #[error("request is not admissible: its coherent part is empty")]
    NotAdmissible,
    #[error(transparent)]
    Request(#[from] RequestError),
    #[error(transparent)]
    Sync(#[from] SyncViolation),
    #[error(transparent)]
    Intimacy(#[from] IntimacyError),
}

/// `(I, 𝒜, R, i₀, (Δ_i, δ_i), ∼)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractiveFamily {
    family: DynamicsFamily,
    request: InteractionRequest,
    coherent: InteractionRequest,
    sync: Synchronization,
    sync_report: SyncReport,
    intimacy: Intimacy,
}

impl InteractiveFamily {
    pub fn new(
        family: DynamicsFamily,
        request: InteractionRequest,
        sync: Synchronization,
        intimacy: Intimacy,
    ) -> Result<Self, InteractiveError> {
        let coherent = request.coherent_part(&family)?;
        if coherent.is_empty() {
            return Err(InteractiveError::NotAdmissible);
        }
        let sync_report = sync.check(&family)?;
        let m: Vec<ParamTuple> = coherent.param_image().into_iter().collect();
        intimacy.partition(&family, &m)?;
        Ok(InteractiveFamily {
            family,
            request,
            coherent,
            sync,
            sync_report,
            intimacy,
        })
    }

    pub fn family(&self) -> &DynamicsFamily {
        &self.family
    }

    pub fn request(&self) -> &InteractionRequest {
        &self.request
    }

    /// `Ř`.
    pub fn coherent(&self) -> &InteractionRequest {
        &self.coherent
    }

    pub fn sync(&self) -> &Synchronization {
        &self.sync
    }

    pub fn sync_report(&self) -> &SyncReport {
        &self.sync_report
    }

    pub fn intimacy(&self) -> &Intimacy {
        &self.intimacy
    }

    /// `M = Im(br(Ř))`, sorted.
    pub fn m(&self) -> Vec<ParamTuple> {
        self.coherent.param_image().into_iter().collect()
    }

    pub fn with_intimacy(&self, intimacy: Intimacy) -> Result<Self, InteractiveError> {
        InteractiveFamily::new(self.family.clone(), self.request.clone(), self.sync.clone(), intimacy)
    }

    pub fn with_request(&self, request: InteractionRequest) -> Result<Self, InteractiveError> {
        InteractiveFamily::new(self.family.clone(), request, self.sync.clone(), self.intimacy.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("families differ in their dynamics or synchronization")]
pub struct FamilyMismatch;

/// Same coherent parts and same intimacy classes on `M`.
pub fn strongly_equivalent(f1: &InteractiveFamily, f2: &InteractiveFamily) -> Result<bool, FamilyMismatch> {
    if f1.family != f2.family || f1.sync != f2.sync {
        return Err(FamilyMismatch);
    }
    if f1.coherent != f2.coherent {
        return Ok(false);
    }
    let m = f1.m();
    let classes = |f: &InteractiveFamily| -> BTreeSet<BTreeSet<usize>> {
        let (blocks, _) = f.intimacy.partition(&f.family, &m).expect("checked at construction");
        blocks.into_iter().map(|b| b.into_iter().collect()).collect()
    };
    Ok(classes(f1) == classes(f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    fn single(a: OpenDynamic) -> DynamicsFamily {
        DynamicsFamily::new(vec![("1".into(), a)]).unwrap()
    }

    #[test]
    fn omega_sizes() {
        assert_eq!(InteractionRequest::omega(&single(fixtures::upsilon())).len(), 20);
        assert_eq!(InteractionRequest::omega(&single(fixtures::phi())).len(), 3);
        let two = DynamicsFamily::new(vec![("1".into(), fixtures::phi()), ("2".into(), fixtures::phi())]).unwrap();
        assert_eq!(InteractionRequest::omega(&two).len(), 9);
    }

    /// Brute force over the grid, filtered by coherence.
    #[test]
    fn omega_matches_filtered_grid() {
        let fam = single(fixtures::upsilon());
        let full = InteractionRequest::full(&fam).unwrap();
        assert_eq!(full.len(), 28);
        let filtered: BTreeSet<RequestTuple> = full.graph().iter().filter(|t| fam.is_coherent(t)).cloned().collect();
        assert_eq!(&filtered, InteractionRequest::omega(&fam).graph());
        assert_eq!(full.coherent_part(&fam).unwrap(), InteractionRequest::omega(&fam));
        let omega = InteractionRequest::omega(&fam);
        assert_eq!(omega.coherent_part(&fam).unwrap(), omega);
    }

    #[test]
    fn borromean_request_classification() {
        let f = fixtures::borromean_family();
        let c = classify_request(f.family(), f.request()).unwrap();
        assert_eq!(
            c,
            RequestClass { normal: true, admissible: true, functional: false, strongly_functional: false }
        );
        // Q̌ keeps exactly the coherent tuples with some λ_i(0) = 1.
        let omega = InteractionRequest::omega(f.family());
        let expected: BTreeSet<RequestTuple> = omega
            .graph()
            .iter()
            .filter(|t| {
                t.iter().any(|(i, &(_, p))| {
                    f.family().member(i).unwrap().dynamic.alpha().param_name(p).as_str().starts_with('1')
                })
            })
            .cloned()
            .collect();
        assert_eq!(f.coherent().graph(), &expected);
        let r = classify_relation(f.family(), f.coherent(), Some(f.request())).unwrap();
        assert!(r.normal);
        assert!(classify_relation(f.family(), f.coherent(), None).unwrap().normal);
    }

    #[test]
    fn omega_is_normal_not_efficient() {
        for fam in [single(fixtures::upsilon()), single(fixtures::gamma())] {
            let omega = InteractionRequest::omega(&fam);
            let c = classify_request(&fam, &omega).unwrap();
            assert!(c.normal && c.admissible);
            let r = classify_relation(&fam, &omega, None).unwrap();
            assert!(r.normal);
            assert!(!r.efficient);
        }
    }

    #[test]
    fn diagonal_relation_is_paranormal() {
        let f = fixtures::diagonal_family();
        let c = classify_request(f.family(), f.request()).unwrap();
        assert!(c.functional && !c.normal && c.admissible);
        let r = classify_relation(f.family(), f.coherent(), None).unwrap();
        assert_eq!(
            r,
            RelationClass { normal: false, efficient: true, functional: true, strongly_functional: true }
        );
    }

    #[test]
    fn incoherent_relation_is_rejected() {
        let f = fixtures::borromean_family();
        assert_eq!(
            classify_relation(f.family(), f.request(), None),
            Err(RequestError::NotCoherent)
        );
    }

    #[test]
    fn borromean_sync_is_rigid() {
        let f = fixtures::borromean_family();
        assert!(f.sync_report().is_rigid());
    }

    fn reversed_sync_family() -> (DynamicsFamily, Synchronization) {
        let fam = DynamicsFamily::new(vec![("1".into(), fixtures::upsilon()), ("2".into(), fixtures::upsilon())]).unwrap();
        let mut sync = Synchronization::identity(&fam, "1").unwrap();
        let c = sync.components.get_mut(&Label::from("2")).unwrap();
        c.objects = vec![ObjId(1), ObjId(0)];
        c.instants = [("t0", "t1"), ("t1", "t0")].iter().map(|&(a, b)| (a.into(), b.into())).collect();
        c.monotonicity = Monotonicity::Decreasing;
        (fam, sync)
    }

    #[test]
    fn reversed_sync_is_flexible() {
        let (fam, sync) = reversed_sync_family();
        let rep = sync.check(&fam).unwrap();
        assert!(rep.rigid[&Label::from("1")]);
        assert!(!rep.rigid[&Label::from("2")]);
        let mut inc = sync.clone();
        inc.components.get_mut(&Label::from("2")).unwrap().monotonicity = Monotonicity::Increasing;
        assert!(matches!(inc.check(&fam), Err(SyncViolation::Monotonicity { .. })));
    }

    #[test]
    fn incompatible_sync_is_rejected() {
        let (fam, mut sync) = reversed_sync_family();
        sync.components.get_mut(&Label::from("2")).unwrap().objects = vec![ObjId(0), ObjId(1)];
        assert!(matches!(sync.check(&fam), Err(SyncViolation::Compatibility { .. })));
        let mut bad = Synchronization::identity(&fam, "1").unwrap();
        bad.components.get_mut(&Label::from("1")).unwrap().instants.insert("t0".into(), "t1".into());
        assert_eq!(bad.check(&fam), Err(SyncViolation::ConductorNotIdentity));
    }

    #[test]
    fn strong_equivalence_examples() {
        let f = fixtures::borromean_family();
        assert_eq!(strongly_equivalent(&f, &f), Ok(true));
        // Enlarge the request with incoherent tuples only.
        let full = InteractionRequest::full(f.family()).unwrap();
        let mut graph: BTreeSet<RequestTuple> = f.request().graph().clone();
        graph.extend(full.graph().iter().filter(|t| !f.family().is_coherent(t)).cloned());
        let bigger = f.with_request(InteractionRequest::extensional(f.family(), graph).unwrap()).unwrap();
        assert_ne!(bigger.request(), f.request());
        assert_eq!(strongly_equivalent(&f, &bigger), Ok(true));
        let other = f.with_intimacy(Intimacy::Equality).unwrap();
        assert_eq!(strongly_equivalent(&f, &other), Ok(false));
        let g = fixtures::diagonal_family();
        assert_eq!(strongly_equivalent(&f, &g), Err(FamilyMismatch));
    }

    #[test]
    fn inadmissible_request_is_rejected() {
        let f = fixtures::borromean_family();
        let empty = InteractionRequest::extensional(f.family(), []).unwrap();
        assert_eq!(f.with_request(empty).unwrap_err(), InteractiveError::NotAdmissible);
    }

    #[test]
    fn explicit_blocks_must_cover_m() {
        let f = fixtures::diagonal_family();
        let err = f.with_intimacy(Intimacy::Blocks(vec![])).unwrap_err();
        assert!(matches!(err, InteractiveError::Intimacy(IntimacyError::NotCovering(_))));
        let block: BTreeSet<ParamTuple> = f.m().into_iter().collect();
        assert!(f.with_intimacy(Intimacy::Blocks(vec![block])).is_ok());
    }
}
