//! Global dynamics generated by an interactive family.
//!
//! [`stability_construct`] builds the `M`-dynamic `β` over the conductor's
//! engine, where `M` is the parameter image of the coherent part `Ř` of the
//! request. A global state of type `S` is a tuple of member states, one per
//! member, whose dates agree through the synchronization. For `d : S → T`
//! and `μ ∈ M`, `b ∈ d_μ(a)` when some tuple of outgoing realizations
//! requested with `μ` passes through every `a_i` and `b_i`, and `b` is dated
//! at the conductor's tick of `a`'s date.
//!
//! Because a realization passing through `b_i` is determined at `b_i`'s date,
//! each such realization tuple yields at most one successor: `b_i` is the
//! value of `σ_i` at `δ_i(t₁)`. The construction iterates over those tuples
//! instead of over pairs of global states.
//!
//! The other global dynamics are parametric quotients of the transparent one:
//!
//! | dynamic       | partition of `M`                                      |
//! |---------------|-------------------------------------------------------|
//! | transparent   | singletons                                            |
//! | demanded      | the family's own intimacy                             |
//! | responsible   | `μ ≍ λ` iff each coordinate is equal or both in `N_i` |
//! | `J`-global    | `N_i = ∅` on `J`, `N_i = L_i` elsewhere                |
//! | opaque        | one block                                             |

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{DynamicError, MultiDynamic, OpenDynamic, ParamId, QuotientError};
use crate::interaction::{
    show_tuple, DynamicsFamily, InteractionRequest, InteractiveFamily, Intimacy, IntimacyError, ParamTuple,
};
use crate::realization::SearchBudgetExceeded;
use crate::transition::Transition;
use crate::{Label, DEFAULT_SEARCH_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlobalError {
    #[error("the coherent part of the request is empty, so M is empty")]
    EmptyM,
    #[error("`{0}` in J is not a member index")]
    BadJ(Label),
    #[error(transparent)]
    Budget(#[from] SearchBudgetExceeded),
    #[error(transparent)]
    Intimacy(#[from] IntimacyError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Dynamic(#[from] DynamicError),
}

/// An open dynamic over the conductor's engine and clock whose states are
/// member-state tuples and whose parameters are blocks of `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalDynamic {
    open: OpenDynamic,
    members: Vec<Label>,
    m: Vec<ParamTuple>,
    blocks: Vec<Vec<usize>>,
    components: BTreeMap<Label, Vec<Label>>,
}

impl GlobalDynamic {
    pub fn open(&self) -> &OpenDynamic {
        &self.open
    }

    pub fn into_open(self) -> OpenDynamic {
        self.open
    }

    pub fn members(&self) -> &[Label] {
        &self.members
    }

    /// `M`, in the order used by [`blocks`](Self::blocks).
    pub fn m(&self) -> &[ParamTuple] {
        &self.m
    }

    /// For each parameter of the dynamic, the indices into `M` it gathers.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Member states of a global state, in member order.
    pub fn components(&self, state: &str) -> Option<&[Label]> {
        self.components.get(state).map(Vec::as_slice)
    }

    pub fn state_components(&self) -> &BTreeMap<Label, Vec<Label>> {
        &self.components
    }

    /// Coarsens the parameters by `blocks` over the current parameters.
    pub fn quotient(&self, blocks: &[Vec<usize>], names: Vec<Label>) -> Result<GlobalDynamic, GlobalError> {
        let ids: Vec<Vec<ParamId>> = blocks.iter().map(|b| b.iter().map(|&k| ParamId(k)).collect()).collect();
        let open = crate::dynamics::parametric_quotient(&self.open, &ids, Some(names))?;
        let merged = blocks
            .iter()
            .map(|b| {
                let mut v: Vec<usize> = b.iter().flat_map(|&k| self.blocks[k].iter().copied()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        Ok(GlobalDynamic {
            open,
            members: self.members.clone(),
            m: self.m.clone(),
            blocks: merged,
            components: self.components.clone(),
        })
    }
}

/// Canonical label of a global state.
pub fn global_state_label(members: &[Label], states: &[&Label]) -> Label {
    let parts: Vec<String> = members.iter().zip(states).map(|(i, s)| format!("{i}={s}")).collect();
    Label::from(format!("<{}>", parts.join(";")))
}

/// `β` with the conductor's clock and datation `τ(a) = ρ_{i₀}(a_{i₀})`.
pub fn stability_construct(f: &InteractiveFamily) -> Result<GlobalDynamic, GlobalError> {
    stability_construct_capped(f, DEFAULT_SEARCH_CAP)
}

pub fn stability_construct_capped(f: &InteractiveFamily, cap: u64) -> Result<GlobalDynamic, GlobalError> {
    let fam = f.family();
    let sync = f.sync();
    let lead_pos = fam.position(&sync.conductor).expect("checked at construction");
    let lead = &fam.members()[lead_pos];
    let engine = lead.dynamic.engine().clone();
    let clock = lead.dynamic.clock().clone();
    let members: Vec<Label> = fam.members().iter().map(|m| m.index.clone()).collect();
    let comps: Vec<_> = members.iter().map(|i| &sync.components[i]).collect();

    let m = f.m();
    if m.is_empty() {
        return Err(GlobalError::EmptyM);
    }
    let mut preimage: BTreeMap<&ParamTuple, Vec<Vec<usize>>> = BTreeMap::new();
    let coherent_tuples: Vec<(ParamTuple, Vec<usize>)> = f
        .coherent()
        .graph()
        .iter()
        .map(|t| (t.values().map(|&(_, p)| p).collect(), t.values().map(|&(z, _)| z).collect()))
        .collect();
    for (mu, sigma) in &coherent_tuples {
        let key = m.iter().find(|x| *x == mu).expect("M is the parameter image");
        preimage.entry(key).or_default().push(sigma.clone());
    }

    // Global states per object, with their components and dates.
    let mut budget = 0u64;
    let mut state_sets: Vec<BTreeSet<Label>> = Vec::new();
    let mut components: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
    let mut rho: BTreeMap<Label, Label> = BTreeMap::new();
    for s in engine.object_ids() {
        let mut set = BTreeSet::new();
        for a0 in lead.dynamic.alpha().states(s) {
            let t = lead.dynamic.date(a0).expect("total datation");
            let mut fibers: Vec<Vec<Label>> = Vec::with_capacity(members.len());
            for (k, mem) in fam.members().iter().enumerate() {
                if k == lead_pos {
                    fibers.push(alloc::vec![a0.clone()]);
                    continue;
                }
                let ti = &comps[k].instants[t];
                let ty = comps[k].objects[s.0];
                let states = mem.dynamic.alpha().states(ty);
                fibers.push(mem.dynamic.fiber(ti).into_iter().filter(|x| states.contains(x)).collect());
            }
            for tuple in cartesian(&fibers) {
                budget += 1;
                if budget > cap {
                    return Err(SearchBudgetExceeded { cap }.into());
                }
                let label = global_state_label(&members, &tuple);
                components.insert(label.clone(), tuple.into_iter().cloned().collect());
                rho.insert(label.clone(), t.clone());
                set.insert(label);
            }
        }
        state_sets.push(set);
    }

    let mut action = BTreeMap::new();
    for d in engine.arrow_ids() {
        let arrow = engine.arrow(d);
        let (src, dst) = (arrow.dom, arrow.cod);
        for (k, mu) in m.iter().enumerate() {
            let mut t = Transition::empty(state_sets[src.0].clone(), state_sets[dst.0].clone());
            let Some(sigmas) = preimage.get(mu) else {
                action.insert((d, ParamId(k)), t);
                continue;
            };
            for a in &state_sets[src.0] {
                let t0 = &rho[a];
                let t1 = clock.tick(d, t0).expect("clock is total");
                let comp = &components[a];
                for sigma in sigmas {
                    budget += 1;
                    if budget > cap {
                        return Err(SearchBudgetExceeded { cap }.into());
                    }
                    let mut next: Vec<&Label> = Vec::with_capacity(members.len());
                    let ok = fam.members().iter().enumerate().all(|(i, mem)| {
                        let section = fam.section(i, sigma[i]);
                        let ai = &comp[i];
                        let through = mem.dynamic.date(ai).and_then(|ti| section.get(ti)) == Some(ai);
                        let bi = section.get(&comps[i].instants[t1]);
                        match bi {
                            Some(b) if through && mem.dynamic.alpha().states(comps[i].objects[dst.0]).contains(b) => {
                                next.push(b);
                                true
                            }
                            _ => false,
                        }
                    });
                    if ok {
                        let b = global_state_label(&members, &next);
                        if state_sets[dst.0].contains(&b) {
                            t.insert(a.clone(), b).expect("typed");
                        }
                    }
                }
            }
            action.insert((d, ParamId(k)), t);
        }
    }
    let names: Vec<Label> = m.iter().map(|mu| Label::from(show_tuple(fam, mu))).collect();
    let beta = MultiDynamic::new(engine, names, state_sets, action)?;
    let open = OpenDynamic::new(beta, clock, rho)?;
    Ok(GlobalDynamic {
        open,
        members,
        blocks: (0..m.len()).map(|k| alloc::vec![k]).collect(),
        m,
        components,
    })
}

fn cartesian<T>(sets: &[Vec<T>]) -> Vec<Vec<&T>> {
    let mut out: Vec<Vec<&T>> = alloc::vec![Vec::new()];
    for set in sets {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// `[ℱ]₁`.
pub fn transparent(f: &InteractiveFamily) -> Result<GlobalDynamic, GlobalError> {
    stability_construct(f)
}

/// The transparent dynamic quotiented by `intimacy` restricted to `M`.
/// Singleton partitions keep the tuple names and the one-block partition is
/// named `*`.
pub fn quotient_by(f: &InteractiveFamily, intimacy: &Intimacy) -> Result<GlobalDynamic, GlobalError> {
    let t = transparent(f)?;
    quotient_transparent(f.family(), &t, intimacy)
}

pub fn quotient_transparent(
    family: &DynamicsFamily,
    t: &GlobalDynamic,
    intimacy: &Intimacy,
) -> Result<GlobalDynamic, GlobalError> {
    let (blocks, mut names) = intimacy.partition(family, t.m())?;
    if blocks.len() == t.m().len() {
        names = t.open().alpha().params().to_vec();
    } else if blocks.len() == 1 {
        names = alloc::vec![Label::from("*")];
    }
    t.quotient(&blocks, names)
}

/// `[ℱ]_∼` for the family's own intimacy.
pub fn demanded(f: &InteractiveFamily) -> Result<GlobalDynamic, GlobalError> {
    quotient_by(f, f.intimacy())
}

/// `N_i`: values of `λ_i` that the other members' realizations pin down.
///
/// A value `l` fails when some two tuples agree on `σ_k` for every `k ≠ i`
/// but one has `λ_i = l` and the other a different `λ_i`.
pub fn responsible_sets(family: &DynamicsFamily, q: &InteractionRequest) -> Vec<BTreeSet<ParamId>> {
    let tuples: Vec<Vec<(usize, ParamId)>> = q.graph().iter().map(|t| t.values().copied().collect()).collect();
    (0..family.len())
        .map(|i| {
            let mut groups: BTreeMap<Vec<usize>, BTreeSet<ParamId>> = BTreeMap::new();
            for t in &tuples {
                let key: Vec<usize> = t.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, x)| x.0).collect();
                groups.entry(key).or_default().insert(t[i].1);
            }
            let mut n: BTreeSet<ParamId> = family.members()[i].dynamic.alpha().param_ids().collect();
            for vals in groups.values().filter(|v| v.len() > 1) {
                for v in vals {
                    n.remove(v);
                }
            }
            n
        })
        .collect()
}

/// `≍_Q`.
pub fn responsible_intimacy(family: &DynamicsFamily, q: &InteractionRequest) -> Intimacy {
    Intimacy::Coordinatewise(responsible_sets(family, q))
}

/// `[ℱ]_{≍_Q}` with `Q` the family's (not necessarily coherent) request.
pub fn responsible(f: &InteractiveFamily) -> Result<GlobalDynamic, GlobalError> {
    quotient_by(f, &responsible_intimacy(f.family(), f.request()))
}

/// `∼_J`: `N_i = ∅` for `i ∈ J` and `N_i = L_i` otherwise.
pub fn j_intimacy(family: &DynamicsFamily, j: &BTreeSet<Label>) -> Result<Intimacy, GlobalError> {
    if let Some(bad) = j.iter().find(|x| family.position(x).is_none()) {
        return Err(GlobalError::BadJ(bad.clone()));
    }
    Ok(Intimacy::Coordinatewise(
        family
            .members()
            .iter()
            .map(|m| {
                if j.contains(&m.index) {
                    BTreeSet::new()
                } else {
                    m.dynamic.alpha().param_ids().collect()
                }
            })
            .collect(),
    ))
}

pub fn j_global(f: &InteractiveFamily, j: &BTreeSet<Label>) -> Result<GlobalDynamic, GlobalError> {
    quotient_by(f, &j_intimacy(f.family(), j)?)
}

/// `[ℱ]₀`.
pub fn opaque(f: &InteractiveFamily) -> Result<GlobalDynamic, GlobalError> {
    quotient_by(f, &Intimacy::Total)
}

/// Whether every block of `fine` lies inside a block of `coarse`.
pub fn refines(fine: &[Vec<usize>], coarse: &[Vec<usize>]) -> bool {
    let owner: BTreeMap<usize, usize> = coarse
        .iter()
        .enumerate()
        .flat_map(|(b, block)| block.iter().map(move |&k| (k, b)))
        .collect();
    fine.iter().all(|block| {
        let mut it = block.iter().map(|k| owner.get(k));
        match it.next() {
            Some(Some(first)) => it.all(|o| o == Some(first)),
            _ => false,
        }
    })
}
