//! Seeded generators of small valid dynamics, families and requests.
//!
//! All generators take a [`ChaCha8Rng`] so runs are reproducible from a seed.
//! Dynamics are built to satisfy the lax laws by construction and are
//! validated before being returned.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

use crate::dynamics::{MultiDynamic, OpenDynamic, ParamId};
use crate::fincat::{finite_monoid_category, one_step_category, terminal_category};
use crate::interaction::{
    DynamicsFamily, InteractionRequest, InteractiveFamily, Intimacy, RequestTuple, Synchronization,
};
use crate::Label;

pub const DEFAULT_SEED: u64 = 0x1a7d_0001;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Engine and clock shape of a generated dynamic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// One object and its identity, like `phi` and `gamma`.
    Intemporal,
    /// `T0 → T1`, like `upsilon` and `upsilon_star`.
    OneStep,
    /// One object and an idempotent `a`.
    Idempotent,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Intemporal, Shape::OneStep, Shape::Idempotent];
}

#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    pub max_states: usize,
    pub max_params: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 2,
            max_params: 3,
        }
    }
}

fn subset<R: Rng>(rng: &mut R, xs: &[Label], p: f64) -> Vec<Label> {
    xs.iter().filter(|_| rng.random_bool(p)).cloned().collect()
}

fn names(prefix: &str, n: usize) -> Vec<Label> {
    (0..n).map(|k| Label::from(format!("{prefix}{k}"))).collect()
}

pub fn random_dynamic<R: Rng>(rng: &mut R, shape: Shape, bounds: Bounds) -> OpenDynamic {
    let np = rng.random_range(1..=bounds.max_params);
    let params = names("l", np);
    let out = match shape {
        Shape::Intemporal => {
            let states = names("s", rng.random_range(1..=bounds.max_states));
            let ids: Vec<Vec<Label>> = (0..np).map(|_| subset(rng, &states, 0.75)).collect();
            let alpha = MultiDynamic::from_fn(
                terminal_category(),
                params,
                alloc::vec![states.iter().cloned().collect()],
                |_, p, s| if ids[p.0].contains(s) { alloc::vec![s.clone()] } else { Vec::new() },
            )
            .expect("well-formed");
            OpenDynamic::over_essential_clock(alpha, &["0"])
        }
        Shape::OneStep => {
            let n0 = rng.random_range(1..=bounds.max_states);
            let n1 = rng.random_range(1..=bounds.max_states);
            let s0: Vec<Label> = (0..n0).map(|k| Label::from(format!("(t0,{k})"))).collect();
            let s1: Vec<Label> = (0..n1).map(|k| Label::from(format!("(t1,{k})"))).collect();
            let mut ids0 = Vec::new();
            let mut ids1 = Vec::new();
            let mut steps = Vec::new();
            for _ in 0..np {
                let i0 = subset(rng, &s0, 0.8);
                let i1 = subset(rng, &s1, 0.8);
                let mut d = Vec::new();
                for u in &i0 {
                    for v in &i1 {
                        if rng.random_bool(0.4) {
                            d.push((u.clone(), v.clone()));
                        }
                    }
                }
                ids0.push(i0);
                ids1.push(i1);
                steps.push(d);
            }
            let engine = one_step_category();
            let (id0, id1) = (engine.identity(crate::ObjId(0)), engine.identity(crate::ObjId(1)));
            let alpha = MultiDynamic::from_fn(
                engine,
                params,
                alloc::vec![s0.iter().cloned().collect(), s1.iter().cloned().collect()],
                |a, p, s| {
                    let keep = |ids: &Vec<Vec<Label>>| {
                        if ids[p.0].contains(s) {
                            alloc::vec![s.clone()]
                        } else {
                            Vec::new()
                        }
                    };
                    if a == id0 {
                        keep(&ids0)
                    } else if a == id1 {
                        keep(&ids1)
                    } else {
                        steps[p.0].iter().filter(|(u, _)| u == s).map(|(_, v)| v.clone()).collect()
                    }
                },
            )
            .expect("well-formed");
            OpenDynamic::over_essential_clock(alpha, &["t0", "t1"])
        }
        Shape::Idempotent => {
            let states = names("s", rng.random_range(1..=bounds.max_states));
            let engine = finite_monoid_category(&["1", "a"], &[alloc::vec![0, 1], alloc::vec![1, 1]], 0)
                .expect("idempotent monoid");
            let a_id = engine.arrow_id("a").expect("arrow a");
            let mut ids = Vec::new();
            let mut steps = Vec::new();
            for _ in 0..np {
                let i = subset(rng, &states, 0.8);
                let fixed = subset(rng, &i, 0.6);
                let mut d: Vec<(Label, Label)> = fixed.iter().map(|f| (f.clone(), f.clone())).collect();
                for u in &i {
                    for f in &fixed {
                        if u != f && rng.random_bool(0.5) {
                            d.push((u.clone(), f.clone()));
                        }
                    }
                }
                ids.push(i);
                steps.push(d);
            }
            let alpha = MultiDynamic::from_fn(
                engine,
                params,
                alloc::vec![states.iter().cloned().collect()],
                |a, p, s| {
                    if a == a_id {
                        steps[p.0].iter().filter(|(u, _)| u == s).map(|(_, v)| v.clone()).collect()
                    } else if ids[p.0].contains(s) {
                        alloc::vec![s.clone()]
                    } else {
                        Vec::new()
                    }
                },
            )
            .expect("well-formed");
            OpenDynamic::over_essential_clock(alpha, &["0"])
        }
    }
    .expect("well-formed");
    out.validate().expect("lax laws hold by construction");
    out
}

/// A random partition of `0..n` into non-empty blocks.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<ParamId>> {
    let k = rng.random_range(1..=n.max(1));
    let mut blocks: Vec<Vec<ParamId>> = alloc::vec![Vec::new(); k];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (j, &p) in order.iter().enumerate() {
        let b = if j < k { j } else { rng.random_range(0..k) };
        blocks[b].push(ParamId(p));
    }
    blocks.retain(|b| !b.is_empty());
    for b in &mut blocks {
        b.sort();
    }
    blocks.sort();
    blocks
}

pub fn random_family<R: Rng>(rng: &mut R, shape: Shape, members: usize, bounds: Bounds) -> DynamicsFamily {
    let list = (1..=members)
        .map(|k| (Label::from(format!("{k}")), random_dynamic(rng, shape, bounds)))
        .collect();
    DynamicsFamily::new(list).expect("small members realize within budget")
}

fn grid(family: &DynamicsFamily) -> Vec<Vec<(usize, ParamId)>> {
    let mut out: Vec<Vec<(usize, ParamId)>> = alloc::vec![Vec::new()];
    for m in family.members() {
        let nz = m.realizations.outgoing().len();
        let ps: Vec<ParamId> = m.dynamic.alpha().param_ids().collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                let ps = ps.clone();
                (0..nz).flat_map(move |z| {
                    let prefix = prefix.clone();
                    ps.clone().into_iter().map(move |p| {
                        let mut v = prefix.clone();
                        v.push((z, p));
                        v
                    })
                })
            })
            .collect();
    }
    out
}

fn tuple(family: &DynamicsFamily, t: &[(usize, ParamId)]) -> RequestTuple {
    family.members().iter().zip(t).map(|(m, &x)| (m.index.clone(), x)).collect()
}

/// A uniformly thinned grid; with probability one half it is then completed
/// so that every non-empty realization tuple has some parameter tuple.
pub fn random_request<R: Rng>(rng: &mut R, family: &DynamicsFamily) -> InteractionRequest {
    let density = rng.random_range(0.05..0.6);
    let mut graph: BTreeSet<RequestTuple> = grid(family)
        .into_iter()
        .filter(|_| rng.random_bool(density))
        .map(|t| tuple(family, &t))
        .collect();
    if rng.random_bool(0.5) {
        for t in grid(family) {
            if t.iter().all(|&(z, p)| z > 0 && p.0 == 0) {
                let lam: Vec<(usize, ParamId)> = family
                    .members()
                    .iter()
                    .zip(&t)
                    .map(|(m, &(z, _))| (z, ParamId(rng.random_range(0..m.dynamic.alpha().params().len()))))
                    .collect();
                graph.insert(tuple(family, &lam));
            }
        }
    }
    InteractionRequest::extensional(family, graph).expect("typed by construction")
}

/// A random coherent grid point.
pub fn random_coherent_tuple<R: Rng>(rng: &mut R, family: &DynamicsFamily) -> Vec<(usize, ParamId)> {
    family
        .members()
        .iter()
        .map(|m| {
            let p = ParamId(rng.random_range(0..m.dynamic.alpha().params().len()));
            let zs: Vec<usize> = m.realizations.for_param(p).iter().copied().collect();
            (*zs.choose(rng).expect("the empty section realizes every parameter"), p)
        })
        .collect()
}

/// A random admissible request: a thinned grid plus one coherent point.
pub fn random_admissible_request<R: Rng>(rng: &mut R, family: &DynamicsFamily) -> InteractionRequest {
    let density = rng.random_range(0.05..0.5);
    let mut graph: BTreeSet<RequestTuple> = grid(family)
        .into_iter()
        .filter(|_| rng.random_bool(density))
        .map(|t| tuple(family, &t))
        .collect();
    let base = random_coherent_tuple(rng, family);
    graph.insert(tuple(family, &base));
    InteractionRequest::extensional(family, graph).expect("typed by construction")
}

/// `λ_i = f_i(σ_{-i})` for random maps `f_i`, pinned so that one coherent
/// point belongs to the graph.
pub fn strongly_functional_request<R: Rng>(rng: &mut R, family: &DynamicsFamily) -> InteractionRequest {
    let base = random_coherent_tuple(rng, family);
    let n = family.len();
    let mut choices: Vec<alloc::collections::BTreeMap<Vec<usize>, ParamId>> = alloc::vec![Default::default(); n];
    for i in 0..n {
        let key: Vec<usize> = (0..n).filter(|&k| k != i).map(|k| base[k].0).collect();
        choices[i].insert(key, base[i].1);
    }
    let zgrid = {
        let mut out: Vec<Vec<usize>> = alloc::vec![Vec::new()];
        for m in family.members() {
            let nz = m.realizations.outgoing().len();
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..nz).map(move |z| {
                        let mut v = p.clone();
                        v.push(z);
                        v
                    })
                })
                .collect();
        }
        out
    };
    let mut graph = BTreeSet::new();
    for sigma in zgrid {
        let mut lam = Vec::with_capacity(n);
        for i in 0..n {
            let key: Vec<usize> = (0..n).filter(|&k| k != i).map(|k| sigma[k]).collect();
            let np = family.members()[i].dynamic.alpha().params().len();
            let p = *choices[i].entry(key).or_insert_with(|| ParamId(rng.random_range(0..np)));
            lam.push((sigma[i], p));
        }
        graph.insert(tuple(family, &lam));
    }
    InteractionRequest::extensional(family, graph).expect("typed by construction")
}

pub fn random_intimacy<R: Rng>(rng: &mut R, family: &DynamicsFamily) -> Intimacy {
    match rng.random_range(0..3) {
        0 => Intimacy::Equality,
        1 => Intimacy::Total,
        _ => Intimacy::Coordinatewise(
            family
                .members()
                .iter()
                .map(|m| m.dynamic.alpha().param_ids().filter(|_| rng.random_bool(0.5)).collect())
                .collect(),
        ),
    }
}

/// An admissible interactive family of 1 to 3 members sharing a clock, with
/// identity synchronizations and conductor `1`.
pub fn random_interactive_family<R: Rng>(rng: &mut R) -> InteractiveFamily {
    let shape = *Shape::ALL.choose(rng).expect("non-empty");
    let n = rng.random_range(1..=3);
    let family = random_family(rng, shape, n, Bounds::default());
    let request = random_admissible_request(rng, &family);
    let sync = Synchronization::identity(&family, "1").expect("members share the clock");
    let intimacy = random_intimacy(rng, &family);
    InteractiveFamily::new(family, request, sync, intimacy).expect("admissible by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::classify_request;

    #[test]
    fn generators_are_valid_and_reproducible() {
        let mut a = rng(7);
        let mut b = rng(7);
        for _ in 0..40 {
            let s = *Shape::ALL.choose(&mut a).unwrap();
            let _ = Shape::ALL.choose(&mut b);
            let x = random_dynamic(&mut a, s, Bounds::default());
            let y = random_dynamic(&mut b, s, Bounds::default());
            assert_eq!(x, y);
        }
    }

    #[test]
    fn partitions_cover() {
        let mut r = rng(1);
        for n in 1..6 {
            let p = random_partition(&mut r, n);
            let mut all: Vec<usize> = p.iter().flatten().map(|x| x.0).collect();
            all.sort();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn strongly_functional_requests_classify() {
        let mut r = rng(3);
        for _ in 0..20 {
            let fam = random_family(&mut r, Shape::Intemporal, 3, Bounds::default());
            let q = strongly_functional_request(&mut r, &fam);
            let c = classify_request(&fam, &q).unwrap();
            assert!(c.strongly_functional && c.admissible);
        }
    }

    #[test]
    fn interactive_families_build() {
        let mut r = rng(11);
        for _ in 0..20 {
            let f = random_interactive_family(&mut r);
            assert!(!f.m().is_empty());
        }
    }
}
