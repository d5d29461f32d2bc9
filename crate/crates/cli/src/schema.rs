//! JSON documents for categories, open dynamics and interactive families,
//! with conversions to and from the core types.
//!
//! A dynamic's `action` map is keyed by `"arrow,param"`; the key is split at
//! the first comma, so arrow names must not contain one. Transitions with no
//! pairs are omitted on export.

use std::collections::{BTreeMap, BTreeSet};

use laxdyn_core::dynamics::{Clock, MultiDynamic, OpenDynamic};
use laxdyn_core::fincat::{Arrow, FinCategory};
use laxdyn_core::interaction::{
    DynamicsFamily, InteractionRequest, InteractiveFamily, Intimacy, Monotonicity, RequestTuple, SyncComponent,
    Synchronization,
};
use laxdyn_core::realization::Section;
use laxdyn_core::transition::Transition;
use laxdyn_core::{fixtures, ArrowId, Label, ObjId, ParamId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("{0}")]
    Malformed(String),
    /// The document is well formed but describes an invalid object.
    #[error("{0}")]
    Invalid(String),
    #[error("search budget of {0} candidates exceeded")]
    Budget(u64),
}

fn malformed(msg: impl std::fmt::Display) -> SchemaError {
    SchemaError::Malformed(msg.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowJson {
    pub id: String,
    pub dom: String,
    pub cod: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryJson {
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowJson>,
    pub identity: BTreeMap<String, String>,
    /// `[f, g, f-then-g]`.
    pub compose: Vec<[String; 3]>,
}

impl CategoryJson {
    pub fn from_core(c: &FinCategory) -> Self {
        CategoryJson {
            objects: c.objects().iter().map(|o| o.to_string()).collect(),
            arrows: c
                .arrows()
                .iter()
                .map(|a| ArrowJson {
                    id: a.name.to_string(),
                    dom: c.object_name(a.dom).to_string(),
                    cod: c.object_name(a.cod).to_string(),
                })
                .collect(),
            identity: c
                .object_ids()
                .map(|o| (c.object_name(o).to_string(), c.arrow_name(c.identity(o)).to_string()))
                .collect(),
            compose: c
                .composition_table()
                .iter()
                .map(|(&(f, g), &fg)| [c.arrow_name(f).to_string(), c.arrow_name(g).to_string(), c.arrow_name(fg).to_string()])
                .collect(),
        }
    }

    pub fn to_core(&self) -> Result<FinCategory, SchemaError> {
        let obj = |name: &str| {
            self.objects
                .iter()
                .position(|o| o == name)
                .map(ObjId)
                .ok_or_else(|| malformed(format!("unknown object `{name}`")))
        };
        let arr = |name: &str| {
            self.arrows
                .iter()
                .position(|a| a.id == name)
                .map(ArrowId)
                .ok_or_else(|| malformed(format!("unknown arrow `{name}`")))
        };
        let arrows = self
            .arrows
            .iter()
            .map(|a| {
                if a.id.contains(',') {
                    return Err(malformed(format!("arrow name `{}` contains a comma", a.id)));
                }
                Ok(Arrow {
                    name: Label::from(&a.id),
                    dom: obj(&a.dom)?,
                    cod: obj(&a.cod)?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(o) = self.identity.keys().find(|o| !self.objects.contains(o)) {
            return Err(malformed(format!("identity given for unknown object `{o}`")));
        }
        let identity = self
            .objects
            .iter()
            .map(|o| {
                let a = self.identity.get(o).ok_or_else(|| malformed(format!("object `{o}` has no identity")))?;
                arr(a)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut compose = BTreeMap::new();
        for [f, g, fg] in &self.compose {
            if compose.insert((arr(f)?, arr(g)?), arr(fg)?).is_some() {
                return Err(malformed(format!("composite of ({f}, {g}) given twice")));
            }
        }
        let c = FinCategory::new(self.objects.iter().map(Label::from).collect(), arrows, identity, compose)
            .map_err(malformed)?;
        c.validate().map_err(|v| SchemaError::Invalid(format!("engine: {v}")))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockJson {
    pub instants: BTreeMap<String, Vec<String>>,
    pub tick: BTreeMap<String, Vec<[String; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicJson {
    pub engine: CategoryJson,
    pub params: Vec<String>,
    pub states: BTreeMap<String, Vec<String>>,
    pub action: BTreeMap<String, Vec<[String; 2]>>,
    pub clock: ClockJson,
    pub rho: BTreeMap<String, String>,
}

fn pairs_of(t: &Transition<Label>) -> Vec<[String; 2]> {
    t.pairs().map(|(u, v)| [u.to_string(), v.to_string()]).collect()
}

fn sets_by_object(c: &FinCategory, sets: &BTreeMap<String, Vec<String>>, what: &str) -> Result<Vec<BTreeSet<Label>>, SchemaError> {
    if let Some(o) = sets.keys().find(|o| c.object_id(o).is_none()) {
        return Err(malformed(format!("{what} given for unknown object `{o}`")));
    }
    Ok(c
        .objects()
        .iter()
        .map(|o| sets.get(o.as_str()).map(|v| v.iter().map(Label::from).collect()).unwrap_or_default())
        .collect())
}

impl DynamicJson {
    pub fn from_core(a: &OpenDynamic) -> Self {
        let alpha = a.alpha();
        let engine = alpha.engine();
        let mut action = BTreeMap::new();
        for (&(d, p), t) in alpha.actions() {
            if !t.is_empty() {
                action.insert(format!("{},{}", engine.arrow_name(d), alpha.param_name(p)), pairs_of(t));
            }
        }
        let clock = a.clock();
        DynamicJson {
            engine: CategoryJson::from_core(engine),
            params: alpha.params().iter().map(|p| p.to_string()).collect(),
            states: engine
                .object_ids()
                .map(|o| (engine.object_name(o).to_string(), alpha.states(o).iter().map(|s| s.to_string()).collect()))
                .collect(),
            action,
            clock: ClockJson {
                instants: engine
                    .object_ids()
                    .map(|o| (engine.object_name(o).to_string(), clock.instants(o).iter().map(|s| s.to_string()).collect()))
                    .collect(),
                tick: engine
                    .arrow_ids()
                    .map(|d| (engine.arrow_name(d).to_string(), pairs_of(clock.dynamic().action(d, ParamId(0)))))
                    .collect(),
            },
            rho: a.rho().iter().map(|(s, t)| (s.to_string(), t.to_string())).collect(),
        }
    }

    pub fn to_core(&self) -> Result<OpenDynamic, SchemaError> {
        let engine = self.engine.to_core()?;
        let states = sets_by_object(&engine, &self.states, "states")?;
        let params: Vec<Label> = self.params.iter().map(Label::from).collect();
        let mut action = BTreeMap::new();
        for (key, pairs) in &self.action {
            let (a, p) = key
                .split_once(',')
                .ok_or_else(|| malformed(format!("action key `{key}` is not `arrow,param`")))?;
            let d = engine.arrow_id(a).ok_or_else(|| malformed(format!("unknown arrow `{a}`")))?;
            let pid = params
                .iter()
                .position(|x| x == p)
                .map(ParamId)
                .ok_or_else(|| malformed(format!("unknown parameter value `{p}`")))?;
            let arrow = engine.arrow(d);
            let t = Transition::new(
                states[arrow.dom.0].clone(),
                states[arrow.cod.0].clone(),
                pairs.iter().map(|[u, v]| (Label::from(u), Label::from(v))),
            )
            .map_err(|_| malformed(format!("transition `{key}` leaves the state sets")))?;
            action.insert((d, pid), t);
        }
        let alpha = MultiDynamic::new(engine.clone(), params, states, action).map_err(malformed)?;

        let instants = sets_by_object(&engine, &self.clock.instants, "instants")?;
        let mut tick = BTreeMap::new();
        for (a, pairs) in &self.clock.tick {
            let d = engine.arrow_id(a).ok_or_else(|| malformed(format!("unknown arrow `{a}` in clock")))?;
            let arrow = engine.arrow(d);
            let t = Transition::new(
                instants[arrow.dom.0].clone(),
                instants[arrow.cod.0].clone(),
                pairs.iter().map(|[u, v]| (Label::from(u), Label::from(v))),
            )
            .map_err(|_| malformed(format!("clock tick of `{a}` leaves the instant sets")))?;
            tick.insert((d, ParamId(0)), t);
        }
        let clock_dynamic = MultiDynamic::new(engine, vec![Label::from("*")], instants, tick).map_err(malformed)?;
        let clock = Clock::from_dynamic(clock_dynamic).map_err(malformed)?;
        let rho = self.rho.iter().map(|(s, t)| (Label::from(s), Label::from(t))).collect();
        OpenDynamic::new(alpha, clock, rho).map_err(malformed)
    }
}

/// One coordinate of a request tuple: an outgoing realization and a parameter value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellJson {
    pub sigma: BTreeMap<String, String>,
    pub lambda: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum RequestJson {
    Extensional { graph: Vec<BTreeMap<String, CellJson>> },
    /// `borromean`, `diagonal`, `omega` or `full`.
    Builtin { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncComponentJson {
    /// `Δ_i` on objects: conductor object to member object.
    pub objects: BTreeMap<String, String>,
    /// `δ_i` on instants.
    pub instants: BTreeMap<String, String>,
    #[serde(default = "increasing")]
    pub monotonicity: String,
}

fn increasing() -> String {
    "increasing".into()
}

/// Without `components`, every member shares the conductor's clock and is
/// synchronized by identities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncJson {
    pub conductor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<BTreeMap<String, SyncComponentJson>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntimacyJson {
    Equality,
    Total,
    ActionKey { member: String, arrow: String, state: String },
    /// Blocks of parameter tuples, each tuple listed in member order.
    Blocks { blocks: Vec<Vec<Vec<String>>> },
    /// `N_i` per member.
    Coordinatewise { sets: BTreeMap<String, Vec<String>> },
}

/// A member is either an inline dynamic or an `examples:<name>` reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemberJson {
    Reference(String),
    Inline(Box<DynamicJson>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub members: BTreeMap<String, MemberJson>,
    pub request: RequestJson,
    pub sync: SyncJson,
    pub intimacy: IntimacyJson,
}

pub fn section_json(s: &Section) -> BTreeMap<String, String> {
    s.iter().map(|(t, x)| (t.to_string(), x.to_string())).collect()
}

fn find_param(f: &DynamicsFamily, k: usize, name: &str) -> Result<ParamId, SchemaError> {
    let m = &f.members()[k];
    m.dynamic
        .alpha()
        .param_id(name)
        .ok_or_else(|| malformed(format!("member `{}` has no parameter value `{name}`", m.index)))
}

pub fn request_from_json(f: &DynamicsFamily, r: &RequestJson) -> Result<InteractionRequest, SchemaError> {
    match r {
        RequestJson::Builtin { name } => match name.as_str() {
            "borromean" => Ok(fixtures::borromean_request(f)),
            "diagonal" => Ok(fixtures::diagonal_request(f)),
            "omega" => Ok(InteractionRequest::omega(f)),
            "full" => InteractionRequest::full(f).map_err(malformed),
            other => Err(malformed(format!("unknown builtin request `{other}`"))),
        },
        RequestJson::Extensional { graph } => {
            let mut tuples = Vec::with_capacity(graph.len());
            for t in graph {
                if t.len() != f.len() || t.keys().any(|i| f.position(i).is_none()) {
                    return Err(malformed("request tuple does not have one cell per member"));
                }
                let mut tuple = RequestTuple::new();
                for (k, m) in f.members().iter().enumerate() {
                    let cell = &t[m.index.as_str()];
                    let section = Section::from_pairs(cell.sigma.iter().map(|(a, b)| (a.as_str(), b.as_str())));
                    let z = m.realizations.index_of(&section).ok_or_else(|| {
                        malformed(format!("{section} is not an outgoing realization of member `{}`", m.index))
                    })?;
                    tuple.insert(m.index.clone(), (z, find_param(f, k, &cell.lambda)?));
                }
                tuples.push(tuple);
            }
            InteractionRequest::extensional(f, tuples).map_err(malformed)
        }
    }
}

pub fn request_to_json(f: &DynamicsFamily, q: &InteractionRequest) -> RequestJson {
    RequestJson::Extensional {
        graph: q
            .graph()
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(i, &(z, p))| {
                        let k = f.position(i).expect("typed by the family");
                        (
                            i.to_string(),
                            CellJson {
                                sigma: section_json(f.section(k, z)),
                                lambda: f.members()[k].dynamic.alpha().param_name(p).to_string(),
                            },
                        )
                    })
                    .collect()
            })
            .collect(),
    }
}

fn sync_from_json(f: &DynamicsFamily, s: &SyncJson) -> Result<Synchronization, SchemaError> {
    let Some(components) = &s.components else {
        return Synchronization::identity(f, &s.conductor).map_err(|e| SchemaError::Invalid(e.to_string()));
    };
    let lead = f
        .member(&s.conductor)
        .ok_or_else(|| malformed(format!("conductor `{}` is not a member", s.conductor)))?;
    let e = lead.dynamic.engine();
    let mut out = BTreeMap::new();
    for (i, c) in components {
        let m = f.member(i).ok_or_else(|| malformed(format!("`{i}` is not a member")))?;
        let ei = m.dynamic.engine();
        let objects = e
            .objects()
            .iter()
            .map(|o| {
                let target = c.objects.get(o.as_str()).ok_or_else(|| malformed(format!("Δ of `{i}` misses `{o}`")))?;
                ei.object_id(target).ok_or_else(|| malformed(format!("unknown object `{target}` of `{i}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let monotonicity = match c.monotonicity.as_str() {
            "increasing" => Monotonicity::Increasing,
            "decreasing" => Monotonicity::Decreasing,
            other => return Err(malformed(format!("unknown monotonicity `{other}`"))),
        };
        out.insert(
            Label::from(i),
            SyncComponent {
                objects,
                instants: c.instants.iter().map(|(a, b)| (Label::from(a), Label::from(b))).collect(),
                monotonicity,
            },
        );
    }
    Ok(Synchronization {
        conductor: Label::from(&s.conductor),
        components: out,
    })
}

fn sync_to_json(f: &DynamicsFamily, s: &Synchronization) -> SyncJson {
    if Synchronization::identity(f, &s.conductor).as_ref() == Ok(s) {
        return SyncJson {
            conductor: s.conductor.to_string(),
            components: None,
        };
    }
    let lead = f.member(&s.conductor).expect("checked at construction");
    let e = lead.dynamic.engine();
    let components = s
        .components
        .iter()
        .map(|(i, c)| {
            let ei = f.member(i).expect("checked at construction").dynamic.engine();
            (
                i.to_string(),
                SyncComponentJson {
                    objects: e
                        .object_ids()
                        .map(|o| (e.object_name(o).to_string(), ei.object_name(c.objects[o.0]).to_string()))
                        .collect(),
                    instants: c.instants.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
                    monotonicity: match c.monotonicity {
                        Monotonicity::Increasing => "increasing".into(),
                        Monotonicity::Decreasing => "decreasing".into(),
                    },
                },
            )
        })
        .collect();
    SyncJson {
        conductor: s.conductor.to_string(),
        components: Some(components),
    }
}

fn intimacy_from_json(f: &DynamicsFamily, i: &IntimacyJson) -> Result<Intimacy, SchemaError> {
    Ok(match i {
        IntimacyJson::Equality => Intimacy::Equality,
        IntimacyJson::Total => Intimacy::Total,
        IntimacyJson::ActionKey { member, arrow, state } => Intimacy::ActionKey {
            member: member.into(),
            arrow: arrow.into(),
            state: state.into(),
        },
        IntimacyJson::Blocks { blocks } => Intimacy::Blocks(
            blocks
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|t| {
                            if t.len() != f.len() {
                                return Err(malformed("intimacy tuple does not have one value per member"));
                            }
                            t.iter().enumerate().map(|(k, p)| find_param(f, k, p)).collect()
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?,
        ),
        IntimacyJson::Coordinatewise { sets } => {
            if let Some(i) = sets.keys().find(|i| f.position(i).is_none()) {
                return Err(malformed(format!("`{i}` is not a member")));
            }
            Intimacy::Coordinatewise(
                f.members()
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        sets.get(m.index.as_str())
                            .map(|ps| ps.iter().map(|p| find_param(f, k, p)).collect())
                            .unwrap_or_else(|| Ok(BTreeSet::new()))
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
    })
}

fn intimacy_to_json(f: &DynamicsFamily, i: &Intimacy) -> IntimacyJson {
    let name = |k: usize, p: ParamId| f.members()[k].dynamic.alpha().param_name(p).to_string();
    match i {
        Intimacy::Equality => IntimacyJson::Equality,
        Intimacy::Total => IntimacyJson::Total,
        Intimacy::ActionKey { member, arrow, state } => IntimacyJson::ActionKey {
            member: member.to_string(),
            arrow: arrow.to_string(),
            state: state.to_string(),
        },
        Intimacy::Blocks(blocks) => IntimacyJson::Blocks {
            blocks: blocks
                .iter()
                .map(|b| b.iter().map(|t| t.iter().enumerate().map(|(k, &p)| name(k, p)).collect()).collect())
                .collect(),
        },
        Intimacy::Coordinatewise(sets) => IntimacyJson::Coordinatewise {
            sets: f
                .members()
                .iter()
                .zip(sets)
                .map(|(m, s)| {
                    let k = f.position(&m.index).expect("member");
                    (m.index.to_string(), s.iter().map(|&p| name(k, p)).collect())
                })
                .collect(),
        },
    }
}

impl FamilyJson {
    /// Exports a family; `request` overrides the extensional request graph.
    pub fn from_core(f: &InteractiveFamily, request: Option<RequestJson>) -> Self {
        let fam = f.family();
        FamilyJson {
            members: fam
                .members()
                .iter()
                .map(|m| (m.index.to_string(), MemberJson::Inline(Box::new(DynamicJson::from_core(&m.dynamic)))))
                .collect(),
            request: request.unwrap_or_else(|| request_to_json(fam, f.request())),
            sync: sync_to_json(fam, f.sync()),
            intimacy: intimacy_to_json(fam, f.intimacy()),
        }
    }

    pub fn to_core(&self, cap: u64) -> Result<InteractiveFamily, SchemaError> {
        let members = self
            .members
            .iter()
            .map(|(i, m)| {
                let dynamic = match m {
                    MemberJson::Inline(d) => d.to_core()?,
                    MemberJson::Reference(r) => resolve_dynamic_reference(r)?,
                };
                Ok((Label::from(i), dynamic))
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        let family = DynamicsFamily::with_cap(members, cap).map_err(|e| match e {
            laxdyn_core::interaction::FamilyError::Budget(b) => SchemaError::Budget(b.cap),
            other => SchemaError::Invalid(other.to_string()),
        })?;
        let request = request_from_json(&family, &self.request)?;
        let sync = sync_from_json(&family, &self.sync)?;
        let intimacy = intimacy_from_json(&family, &self.intimacy)?;
        InteractiveFamily::new(family, request, sync, intimacy).map_err(|e| SchemaError::Invalid(e.to_string()))
    }
}

fn resolve_dynamic_reference(r: &str) -> Result<OpenDynamic, SchemaError> {
    let name = r
        .strip_prefix("examples:")
        .ok_or_else(|| malformed(format!("member reference `{r}` is not of the form examples:<name>")))?;
    match fixtures::fixture(name).map_err(malformed)?.payload {
        fixtures::Payload::Dynamic(d) => Ok(d),
        fixtures::Payload::Family(_) => Err(malformed(format!("`{name}` is a family, not a dynamic"))),
    }
}

/// Builtin request name of a fixture family, if any.
pub fn fixture_request(name: &str) -> Option<RequestJson> {
    match name {
        "borromean_family" => Some(RequestJson::Builtin { name: "borromean".into() }),
        "diagonal_family" => Some(RequestJson::Builtin { name: "diagonal".into() }),
        _ => None,
    }
}
