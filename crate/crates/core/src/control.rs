//! Control systems `(F, q)` from functorial hyper-deterministic open dynamics.
//!
//! `GS(A)` has the instants of `A` as objects of `H` and triples
//! `(t₁, d, t₂)` with `d(t₁) = t₂` as arrows; `G = L × H`, `q` forgets the
//! parameter, and `F(λ, t) = {λ} × ρ⁻¹(t)` with `F(λ, t₁, d, t₂)` acting as
//! `d_λ` where it is defined.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{OpenDynamic, ParamId};
use crate::fincat::{Arrow, CategoryError, FinCategory, Functor, FunctorViolation};
use crate::realization::{satisfies_conditions, Realization};
use crate::transition::Determinism;
use crate::{ArrowId, Label, ObjId};

/// A parameterized state `(λ, s)`.
pub type Element = (Label, Label);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("the dynamic is not functorial")]
    NotFunctorial,
    #[error("the dynamic is {0}, not hyper-deterministic")]
    NotHyperDeterministic(Determinism),
    #[error("the dynamic fails its laws")]
    Invalid,
    #[error(transparent)]
    Category(#[from] CategoryError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlViolation {
    #[error("q is not a functor: {0}")]
    Projection(FunctorViolation),
    #[error("F sends arrow `{0}` outside F of its ends")]
    Typing(Label),
    #[error("F of identity arrow `{0}` is not the identity")]
    Identity(Label),
    #[error("F does not preserve the composite of ({0}, {1})")]
    Composition(Label, Label),
    #[error("F of objects `{0}` and `{1}` overlap")]
    NotDisjoint(Label, Label),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlSystem {
    pub h: FinCategory,
    pub g: FinCategory,
    pub q: Functor,
    /// `F(g)` per object of `G`.
    pub f_objects: Vec<BTreeSet<Element>>,
    /// `F(γ)` per arrow of `G`, a partial function.
    pub f_arrows: Vec<BTreeMap<Element, Element>>,
}

fn arrow_triple(t1: &str, d: &str, t2: &str) -> Label {
    Label::from(format!("({t1},{d},{t2})"))
}

pub fn to_control_system(a: &OpenDynamic) -> Result<ControlSystem, ControlError> {
    let alpha = a.alpha();
    let report = a.validate().map_err(|_| ControlError::Invalid)?;
    if !report.functorial {
        return Err(ControlError::NotFunctorial);
    }
    if report.classification > Determinism::HyperDeterministic {
        return Err(ControlError::NotHyperDeterministic(report.classification));
    }
    let e = a.engine();
    let clock = a.clock();

    let instants: Vec<Label> = clock.all_instants().into_iter().collect();
    let h_obj = |t: &Label| ObjId(instants.binary_search(t).expect("known instant"));
    let mut h_arrows: Vec<Arrow> = Vec::new();
    let mut triple: Vec<(ObjId, ArrowId, ObjId)> = Vec::new();
    let mut index: BTreeMap<(ObjId, ArrowId), ArrowId> = BTreeMap::new();
    for t in &instants {
        let o = clock.instant_type(t).expect("typed instant");
        for d in e.arrow_ids().filter(|&d| e.arrow(d).dom == o) {
            let t2 = clock.tick(d, t).expect("clock is total");
            index.insert((h_obj(t), d), ArrowId(h_arrows.len()));
            triple.push((h_obj(t), d, h_obj(t2)));
            h_arrows.push(Arrow {
                name: arrow_triple(t, e.arrow_name(d), t2),
                dom: h_obj(t),
                cod: h_obj(t2),
            });
        }
    }
    let h_identity = instants
        .iter()
        .map(|t| index[&(h_obj(t), e.identity(clock.instant_type(t).expect("typed")))])
        .collect();
    let mut h_compose = BTreeMap::new();
    for (k, &(t1, d, _)) in triple.iter().enumerate() {
        for (j, &(u1, d2, _)) in triple.iter().enumerate() {
            if u1 == triple[k].2 {
                let dd = e.compose(d, d2).expect("engine composites are total");
                h_compose.insert((ArrowId(k), ArrowId(j)), index[&(t1, dd)]);
            }
        }
    }
    let h = FinCategory::new(instants.clone(), h_arrows, h_identity, h_compose)?;

    let params = alpha.params();
    let np = params.len();
    let (no, na) = (h.objects().len(), h.arrows().len());
    let g_objects: Vec<Label> = params
        .iter()
        .flat_map(|l| instants.iter().map(move |t| Label::from(format!("({l},{t})"))))
        .collect();
    let mut g_arrows = Vec::with_capacity(np * na);
    for (p, l) in params.iter().enumerate() {
        for &(t1, d, t2) in &triple {
            g_arrows.push(Arrow {
                name: Label::from(format!("({l},{},{},{})", instants[t1.0], e.arrow_name(d), instants[t2.0])),
                dom: ObjId(p * no + t1.0),
                cod: ObjId(p * no + t2.0),
            });
        }
    }
    let g_identity = (0..np)
        .flat_map(|p| h.object_ids().map(move |o| (p, o)))
        .map(|(p, o)| ArrowId(p * na + h.identity(o).0))
        .collect();
    let g_compose = (0..np)
        .flat_map(|p| {
            h.composition_table()
                .iter()
                .map(move |(&(f, g), &fg)| ((ArrowId(p * na + f.0), ArrowId(p * na + g.0)), ArrowId(p * na + fg.0)))
        })
        .collect();
    let g = FinCategory::new(g_objects, g_arrows, g_identity, g_compose)?;
    let q = Functor {
        objects: (0..np * no).map(|k| ObjId(k % no)).collect(),
        arrows: (0..np * na).map(|k| ArrowId(k % na)).collect(),
    };

    let f_objects = (0..np)
        .flat_map(|p| {
            instants
                .iter()
                .map(move |t| a.fiber(t).into_iter().map(|s| (params[p].clone(), s)).collect())
        })
        .collect();
    let mut f_arrows = Vec::with_capacity(np * na);
    for p in alpha.param_ids() {
        for &(t1, d, _) in &triple {
            let act = alpha.action(d, p);
            let map = a
                .fiber(&instants[t1.0])
                .into_iter()
                .filter_map(|s| {
                    let img = act.apply(&s)?.clone();
                    Some(((params[p.0].clone(), s), (params[p.0].clone(), img)))
                })
                .collect();
            f_arrows.push(map);
        }
    }
    Ok(ControlSystem {
        h,
        g,
        q,
        f_objects,
        f_arrows,
    })
}

impl ControlSystem {
    /// Functoriality of `q` and `F`, and disjointness of the `F(g)`.
    pub fn check(&self) -> Result<(), ControlViolation> {
        self.q.check(&self.g, &self.h).map_err(ControlViolation::Projection)?;
        let g = &self.g;
        for (k, x) in self.f_objects.iter().enumerate() {
            for (j, y) in self.f_objects.iter().enumerate().skip(k + 1) {
                if !x.is_disjoint(y) {
                    return Err(ControlViolation::NotDisjoint(
                        g.object_name(ObjId(k)).clone(),
                        g.object_name(ObjId(j)).clone(),
                    ));
                }
            }
        }
        for a in g.arrow_ids() {
            let arrow = g.arrow(a);
            let (src, dst) = (&self.f_objects[arrow.dom.0], &self.f_objects[arrow.cod.0]);
            if self.f_arrows[a.0].iter().any(|(x, y)| !src.contains(x) || !dst.contains(y)) {
                return Err(ControlViolation::Typing(arrow.name.clone()));
            }
        }
        for o in g.object_ids() {
            let id = g.identity(o);
            let f = &self.f_arrows[id.0];
            if f.len() != self.f_objects[o.0].len() || f.iter().any(|(x, y)| x != y) {
                return Err(ControlViolation::Identity(g.arrow_name(id).clone()));
            }
        }
        for (&(f, h), &fh) in g.composition_table() {
            let composed: BTreeMap<&Element, &Element> = self.f_arrows[f.0]
                .iter()
                .filter_map(|(x, y)| self.f_arrows[h.0].get(y).map(|z| (x, z)))
                .collect();
            let direct: BTreeMap<&Element, &Element> = self.f_arrows[fh.0].iter().collect();
            if composed != direct {
                return Err(ControlViolation::Composition(g.arrow_name(f).clone(), g.arrow_name(h).clone()));
            }
        }
        Ok(())
    }

    /// The object `g` with `e ∈ F(g)`.
    pub fn owner(&self, e: &Element) -> Option<ObjId> {
        self.f_objects.iter().position(|x| x.contains(e)).map(ObjId)
    }

    /// Arrows of the full subcategory of `H` on `objects`.
    pub fn full_subcategory_arrows(&self, objects: &BTreeSet<ObjId>) -> Vec<ArrowId> {
        self.h
            .arrow_ids()
            .filter(|&a| objects.contains(&self.h.arrow(a).dom) && objects.contains(&self.h.arrow(a).cod))
            .collect()
    }
}

/// `(φ, ψ)` on the full subcategory of `H` spanned by `objects`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlSolution {
    pub objects: BTreeSet<ObjId>,
    pub phi: BTreeMap<ObjId, Element>,
    pub psi_objects: BTreeMap<ObjId, ObjId>,
    pub psi_arrows: BTreeMap<ArrowId, ArrowId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionViolation {
    #[error("φ or ψ is not defined exactly on the objects and arrows of S")]
    Domain,
    #[error("φ({0}) is not a parameterized state over it")]
    Projection(Label),
    #[error("q∘ψ is not the identity at `{0}`")]
    Section(Label),
    #[error("ψ is not a functor at `{0}`")]
    NotFunctor(Label),
    #[error("ψ(h)·φ(t₁) ≠ φ(t₂) for h = `{0}`")]
    Action(Label),
}

pub fn verify_solution(cs: &ControlSystem, sol: &ControlSolution) -> Result<(), SolutionViolation> {
    let (h, g) = (&cs.h, &cs.g);
    let arrows = cs.full_subcategory_arrows(&sol.objects);
    if sol.phi.keys().copied().collect::<BTreeSet<_>>() != sol.objects
        || sol.psi_objects.keys().copied().collect::<BTreeSet<_>>() != sol.objects
        || sol.psi_arrows.keys().copied().collect::<Vec<_>>() != arrows
        || sol.psi_objects.values().any(|o| o.0 >= g.objects().len())
        || sol.psi_arrows.values().any(|a| a.0 >= g.arrows().len())
    {
        return Err(SolutionViolation::Domain);
    }
    for (&t, e) in &sol.phi {
        if cs.owner(e).map(|o| cs.q.object(o)) != Some(t) {
            return Err(SolutionViolation::Projection(h.object_name(t).clone()));
        }
    }
    for (&t, &o) in &sol.psi_objects {
        if cs.q.object(o) != t {
            return Err(SolutionViolation::Section(h.object_name(t).clone()));
        }
    }
    for (&a, &b) in &sol.psi_arrows {
        if cs.q.arrow(b) != a {
            return Err(SolutionViolation::Section(h.arrow_name(a).clone()));
        }
    }
    for &a in &arrows {
        let (src, img) = (h.arrow(a), g.arrow(sol.psi_arrows[&a]));
        if img.dom != sol.psi_objects[&src.dom] || img.cod != sol.psi_objects[&src.cod] {
            return Err(SolutionViolation::NotFunctor(h.arrow_name(a).clone()));
        }
    }
    for &o in &sol.objects {
        let id = h.identity(o);
        if sol.psi_arrows[&id] != g.identity(sol.psi_objects[&o]) {
            return Err(SolutionViolation::NotFunctor(h.arrow_name(id).clone()));
        }
    }
    for &f in &arrows {
        for &k in &arrows {
            if let Some(fk) = h.compose(f, k) {
                if g.compose(sol.psi_arrows[&f], sol.psi_arrows[&k]) != Some(sol.psi_arrows[&fk]) {
                    return Err(SolutionViolation::NotFunctor(h.arrow_name(fk).clone()));
                }
            }
        }
    }
    for &a in &arrows {
        let arrow = h.arrow(a);
        let moved = cs.f_arrows[sol.psi_arrows[&a].0].get(&sol.phi[&arrow.dom]);
        if moved != Some(&sol.phi[&arrow.cod]) {
            return Err(SolutionViolation::Action(h.arrow_name(a).clone()));
        }
    }
    Ok(())
}

/// Whether every arrow of `H` into an object of `S` starts in `S`.
pub fn is_closed(cs: &ControlSystem, sol: &ControlSolution) -> bool {
    cs.h.arrow_ids().all(|a| {
        let arrow = cs.h.arrow(a);
        !sol.objects.contains(&arrow.cod) || sol.objects.contains(&arrow.dom)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("({param}, {section}) is not a realization")]
pub struct NotARealization {
    pub param: Label,
    pub section: alloc::string::String,
}

/// `φ(t) = (λ, σ(t))` and `ψ(t₁,d,t₂) = (λ,t₁,d,t₂)` on `Def σ`.
pub fn realization_to_solution(
    a: &OpenDynamic,
    cs: &ControlSystem,
    r: &Realization,
) -> Result<ControlSolution, NotARealization> {
    let p: ParamId = r.param;
    let lam = a.alpha().params().get(p.0).cloned().unwrap_or_else(|| Label::from(format!("#{}", p.0)));
    if p.0 >= a.alpha().params().len() || !satisfies_conditions(a, p, &r.section) {
        return Err(NotARealization {
            param: lam,
            section: format!("{}", r.section),
        });
    }
    let no = cs.h.objects().len();
    let na = cs.h.arrows().len();
    let objects: BTreeSet<ObjId> = r
        .section
        .iter()
        .map(|(t, _)| cs.h.object_id(t).expect("instants are objects of H"))
        .collect();
    let phi = r
        .section
        .iter()
        .map(|(t, s)| (cs.h.object_id(t).expect("known"), (lam.clone(), s.clone())))
        .collect();
    let psi_objects = objects.iter().map(|&o| (o, ObjId(p.0 * no + o.0))).collect();
    let psi_arrows = cs
        .full_subcategory_arrows(&objects)
        .into_iter()
        .map(|h| (h, ArrowId(p.0 * na + h.0)))
        .collect();
    Ok(ControlSolution {
        objects,
        phi,
        psi_objects,
        psi_arrows,
    })
}
