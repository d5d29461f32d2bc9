//! Transitions `U ⇝ V`: maps into powersets, stored as sparse relations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("domain mismatch: the transitions do not share the required carrier")]
pub struct DomainMismatch;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pair component outside the declared domain or codomain")]
pub struct IllTyped;

/// Determinism tiers, ordered from most to least constrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Determinism {
    Deterministic,
    HyperDeterministic,
    General,
}

impl fmt::Display for Determinism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Determinism::Deterministic => "deterministic",
            Determinism::HyperDeterministic => "hyper_deterministic",
            Determinism::General => "general",
        })
    }
}

/// A transition from `dom` to `cod`.
///
/// Images are kept without empty entries, so two transitions with the same
/// carriers and the same pairs are always `==`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition<U: Ord, V: Ord = U> {
    dom: BTreeSet<U>,
    cod: BTreeSet<V>,
    map: BTreeMap<U, BTreeSet<V>>,
}

impl<U: Ord + Clone, V: Ord + Clone> Transition<U, V> {
    pub fn new(
        dom: BTreeSet<U>,
        cod: BTreeSet<V>,
        pairs: impl IntoIterator<Item = (U, V)>,
    ) -> Result<Self, IllTyped> {
        let mut t = Transition::empty(dom, cod);
        for (u, v) in pairs {
            t.insert(u, v)?;
        }
        Ok(t)
    }

    pub fn empty(dom: BTreeSet<U>, cod: BTreeSet<V>) -> Self {
        Transition {
            dom,
            cod,
            map: BTreeMap::new(),
        }
    }

    /// The full relation `dom × cod`.
    pub fn full(dom: BTreeSet<U>, cod: BTreeSet<V>) -> Self {
        let map = if cod.is_empty() {
            BTreeMap::new()
        } else {
            dom.iter().map(|u| (u.clone(), cod.clone())).collect()
        };
        Transition { dom, cod, map }
    }

    pub fn insert(&mut self, u: U, v: V) -> Result<(), IllTyped> {
        if !self.dom.contains(&u) || !self.cod.contains(&v) {
            return Err(IllTyped);
        }
        self.map.entry(u).or_default().insert(v);
        Ok(())
    }

    pub fn dom(&self) -> &BTreeSet<U> {
        &self.dom
    }

    pub fn cod(&self) -> &BTreeSet<V> {
        &self.cod
    }

    /// `φ(u)`; empty outside `Def_φ`.
    pub fn image(&self, u: &U) -> BTreeSet<V> {
        self.map.get(u).cloned().unwrap_or_default()
    }

    pub fn image_ref(&self, u: &U) -> Option<&BTreeSet<V>> {
        self.map.get(u)
    }

    pub fn contains(&self, u: &U, v: &V) -> bool {
        self.map.get(u).is_some_and(|s| s.contains(v))
    }

    /// `Def_φ`, the states with a non-empty image.
    pub fn def(&self) -> BTreeSet<U> {
        self.map.keys().cloned().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&U, &V)> + '_ {
        self.map.iter().flat_map(|(u, vs)| vs.iter().map(move |v| (u, v)))
    }

    pub fn pair_count(&self) -> usize {
        self.map.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `ψ ⊙ φ` where `self = φ`: first `self`, then `psi`.
    pub fn then<W: Ord + Clone>(&self, psi: &Transition<V, W>) -> Result<Transition<U, W>, DomainMismatch> {
        if self.cod != psi.dom {
            return Err(DomainMismatch);
        }
        let mut map = BTreeMap::new();
        for (u, vs) in &self.map {
            let img: BTreeSet<W> = vs.iter().flat_map(|v| psi.image(v)).collect();
            if !img.is_empty() {
                map.insert(u.clone(), img);
            }
        }
        Ok(Transition {
            dom: self.dom.clone(),
            cod: psi.cod.clone(),
            map,
        })
    }

    /// Constraint order: `self ≤ other` iff `self(u) ⊇ other(u)` for all `u`.
    pub fn constraint_leq(&self, other: &Self) -> Result<bool, DomainMismatch> {
        self.same_carriers(other)?;
        Ok(other.is_subset_of(self))
    }

    /// Pointwise inclusion of graphs (carriers are not compared).
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.map.iter().all(|(u, vs)| match other.map.get(u) {
            Some(ws) => vs.is_subset(ws),
            None => false,
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self, DomainMismatch> {
        self.same_carriers(other)?;
        let mut out = self.clone();
        for (u, vs) in &other.map {
            out.map.entry(u.clone()).or_default().extend(vs.iter().cloned());
        }
        Ok(out)
    }

    pub fn converse(&self) -> Transition<V, U> {
        let mut map: BTreeMap<V, BTreeSet<U>> = BTreeMap::new();
        for (u, v) in self.pairs() {
            map.entry(v.clone()).or_default().insert(u.clone());
        }
        Transition {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            map,
        }
    }

    /// `Im(φ)`.
    pub fn range(&self) -> BTreeSet<V> {
        self.map.values().flatten().cloned().collect()
    }

    pub fn classify(&self) -> Determinism {
        if self.map.values().any(|vs| vs.len() > 1) {
            Determinism::General
        } else if self.map.len() == self.dom.len() {
            Determinism::Deterministic
        } else {
            Determinism::HyperDeterministic
        }
    }

    /// The single image of `u`, when it is a singleton.
    pub fn apply(&self, u: &U) -> Option<&V> {
        match self.map.get(u) {
            Some(vs) if vs.len() == 1 => vs.iter().next(),
            _ => None,
        }
    }

    pub fn same_carriers(&self, other: &Self) -> Result<(), DomainMismatch> {
        if self.dom == other.dom && self.cod == other.cod {
            Ok(())
        } else {
            Err(DomainMismatch)
        }
    }

    /// Same graph on other carriers containing the old ones' used elements.
    pub fn with_carriers(&self, dom: BTreeSet<U>, cod: BTreeSet<V>) -> Result<Self, IllTyped> {
        Transition::new(dom, cod, self.pairs().map(|(u, v)| (u.clone(), v.clone())))
    }
}

impl<U: Ord + Clone> Transition<U, U> {
    pub fn identity(carrier: BTreeSet<U>) -> Self {
        let map = carrier
            .iter()
            .map(|u| (u.clone(), BTreeSet::from([u.clone()])))
            .collect();
        Transition {
            dom: carrier.clone(),
            cod: carrier,
            map,
        }
    }
}

/// Composition in the usual notation: `compose(φ, ψ) = ψ ⊙ φ`.
pub fn compose<U, V, W>(
    phi: &Transition<U, V>,
    psi: &Transition<V, W>,
) -> Result<Transition<U, W>, DomainMismatch>
where
    U: Ord + Clone,
    V: Ord + Clone,
    W: Ord + Clone,
{
    phi.then(psi)
}

/// An `L`-indexed family of transitions sharing domain and codomain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionFamily<L: Ord, U: Ord, V: Ord = U> {
    members: BTreeMap<L, Transition<U, V>>,
}

impl<L: Ord + Clone, U: Ord + Clone, V: Ord + Clone> TransitionFamily<L, U, V> {
    pub fn new(members: BTreeMap<L, Transition<U, V>>) -> Result<Self, DomainMismatch> {
        let mut it = members.values();
        if let Some(first) = it.next() {
            for t in it {
                first.same_carriers(t)?;
            }
        }
        Ok(TransitionFamily { members })
    }

    pub fn get(&self, l: &L) -> Option<&Transition<U, V>> {
        self.members.get(l)
    }

    pub fn params(&self) -> impl Iterator<Item = &L> + '_ {
        self.members.keys()
    }

    /// Pointwise union over a set of parameters.
    pub fn union_over<'a>(&self, block: impl IntoIterator<Item = &'a L>) -> Option<Transition<U, V>>
    where
        L: 'a,
    {
        let mut acc: Option<Transition<U, V>> = None;
        for l in block {
            let t = self.members.get(l)?;
            acc = Some(match acc {
                None => t.clone(),
                Some(a) => a.union(t).ok()?,
            });
        }
        acc
    }

    /// Composition of families, parameter by parameter.
    pub fn then<W: Ord + Clone>(
        &self,
        other: &TransitionFamily<L, V, W>,
    ) -> Result<TransitionFamily<L, U, W>, DomainMismatch> {
        if self.members.len() != other.members.len() {
            return Err(DomainMismatch);
        }
        let mut out = BTreeMap::new();
        for (l, t) in &self.members {
            let s = other.members.get(l).ok_or(DomainMismatch)?;
            out.insert(l.clone(), t.then(s)?);
        }
        Ok(TransitionFamily { members: out })
    }
}

/// Collects a transition's pairs into a vector, in order.
pub fn pair_vec<U: Ord + Clone, V: Ord + Clone>(t: &Transition<U, V>) -> Vec<(U, V)> {
    t.pairs().map(|(u, v)| (u.clone(), v.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn set(xs: &[u8]) -> BTreeSet<u8> {
        xs.iter().copied().collect()
    }

    fn tr(dom: &[u8], cod: &[u8], pairs: &[(u8, u8)]) -> Transition<u8> {
        Transition::new(set(dom), set(cod), pairs.iter().copied()).unwrap()
    }

    #[test]
    fn union_formula_by_hand() {
        // u=0, v1=1, v2=2, w=3
        let phi = tr(&[0], &[1, 2], &[(0, 1), (0, 2)]);
        let psi = tr(&[1, 2], &[3], &[(1, 3)]);
        let c = compose(&phi, &psi).unwrap();
        assert_eq!(c.image(&0), set(&[3]));
        assert_eq!(c.dom(), &set(&[0]));
        assert_eq!(c.cod(), &set(&[3]));
    }

    #[test]
    fn identity_and_empty() {
        let psi = tr(&[0, 1], &[2, 3], &[(0, 2), (0, 3)]);
        let id = Transition::identity(set(&[0, 1]));
        assert_eq!(compose(&id, &psi).unwrap(), psi);
        let empty = Transition::<u8>::empty(set(&[5]), set(&[0, 1]));
        assert_eq!(
            compose(&empty, &psi).unwrap(),
            Transition::empty(set(&[5]), set(&[2, 3]))
        );
        assert_eq!(compose(&psi, &id), Err(DomainMismatch));
    }

    #[test]
    fn constraint_order_examples() {
        let phi = tr(&[0], &[1, 2], &[(0, 1)]);
        let psi = tr(&[0], &[1, 2], &[(0, 1), (0, 2)]);
        assert!(psi.constraint_leq(&phi).unwrap());
        assert!(!phi.constraint_leq(&psi).unwrap());
        let full = Transition::full(set(&[0]), set(&[1, 2]));
        assert!(full.constraint_leq(&phi).unwrap());
        assert!(phi.constraint_leq(&phi).unwrap());
        let other = tr(&[0], &[1], &[(0, 1)]);
        assert_eq!(phi.constraint_leq(&other), Err(DomainMismatch));
    }

    #[test]
    fn classification_tiers() {
        assert_eq!(Transition::identity(set(&[0, 1])).classify(), Determinism::Deterministic);
        assert_eq!(tr(&[0, 1], &[0, 1], &[(1, 1)]).classify(), Determinism::HyperDeterministic);
        assert_eq!(tr(&[0], &[1, 2], &[(0, 1), (0, 2)]).classify(), Determinism::General);
        assert_eq!(Transition::<u8>::empty(set(&[]), set(&[])).classify(), Determinism::Deterministic);
    }

    #[test]
    fn ill_typed_pairs_are_rejected() {
        assert_eq!(Transition::new(set(&[0]), set(&[1]), [(0u8, 2u8)]), Err(IllTyped));
    }

    #[test]
    fn canonical_equality_ignores_insertion_order() {
        let a = tr(&[0, 1], &[0, 1], &[(0, 1), (1, 0)]);
        let b = tr(&[0, 1], &[0, 1], &[(1, 0), (0, 1)]);
        assert_eq!(a, b);
        assert_eq!(a.converse().converse(), a);
    }

    #[test]
    fn family_union_and_composition() {
        let mut m = BTreeMap::new();
        m.insert('a', Transition::identity(set(&[0, 1])));
        m.insert('b', tr(&[0, 1], &[0, 1], &[(1, 1)]));
        let fam = TransitionFamily::new(m).unwrap();
        assert_eq!(fam.union_over(&['a', 'b']).unwrap(), Transition::identity(set(&[0, 1])));
        let sq = fam.then(&fam).unwrap();
        assert_eq!(sq.get(&'b').unwrap(), fam.get(&'b').unwrap());
        let mut bad = BTreeMap::new();
        bad.insert('a', Transition::identity(set(&[0])));
        bad.insert('b', Transition::identity(set(&[1])));
        assert_eq!(TransitionFamily::new(bad), Err(DomainMismatch));
    }

    /// All transitions on fixed carriers, as bitmasks over the pair grid.
    fn all_on(n: u8, m: u8) -> Vec<Transition<u8>> {
        let dom: BTreeSet<u8> = (0..n).collect();
        let cod: BTreeSet<u8> = (0..m).collect();
        let cells: Vec<(u8, u8)> = (0..n).flat_map(|u| (0..m).map(move |v| (u, v))).collect();
        (0u32..1 << cells.len())
            .map(|mask| {
                let pairs = cells.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p);
                Transition::new(dom.clone(), cod.clone(), pairs).unwrap()
            })
            .collect()
    }

    #[test]
    fn constraint_order_is_a_partial_order_exhaustively() {
        for (n, m) in [(1, 3), (2, 2), (3, 1)] {
            let all = all_on(n, m);
            for a in &all {
                assert!(a.constraint_leq(a).unwrap());
                for b in &all {
                    let ab = a.constraint_leq(b).unwrap();
                    let ba = b.constraint_leq(a).unwrap();
                    if ab && ba {
                        assert_eq!(a, b);
                    }
                    if !ab {
                        continue;
                    }
                    for c in &all {
                        if b.constraint_leq(c).unwrap() {
                            assert!(a.constraint_leq(c).unwrap());
                        }
                    }
                }
            }
        }
    }

    fn arb_transition(n: u8, m: u8) -> impl Strategy<Value = Transition<u8>> {
        proptest::collection::btree_set((0..n, 0..m), 0..=(n as usize * m as usize)).prop_map(move |pairs| {
            Transition::new((0..n).collect(), (0..m).collect(), pairs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn composition_is_associative(
            phi in arb_transition(3, 3),
            psi in arb_transition(3, 2),
            chi in arb_transition(2, 3),
        ) {
            let left = compose(&compose(&phi, &psi).unwrap(), &chi).unwrap();
            let right = compose(&phi, &compose(&psi, &chi).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn composition_is_monotone(
            phi in arb_transition(3, 3),
            extra in arb_transition(3, 3),
            psi in arb_transition(3, 3),
        ) {
            // phi ∪ extra ≤ phi, so both composites keep the order.
            let lax = phi.union(&extra).unwrap();
            prop_assert!(lax.constraint_leq(&phi).unwrap());
            let l1 = compose(&lax, &psi).unwrap();
            let r1 = compose(&phi, &psi).unwrap();
            prop_assert!(l1.constraint_leq(&r1).unwrap());
            let l2 = compose(&psi, &lax).unwrap();
            let r2 = compose(&psi, &phi).unwrap();
            prop_assert!(l2.constraint_leq(&r2).unwrap());
        }

        #[test]
        fn def_is_range_of_converse(phi in arb_transition(3, 3)) {
            prop_assert_eq!(phi.def(), phi.converse().range());
        }
    }

    #[test]
    fn pair_vec_is_sorted() {
        let t = tr(&[0, 1], &[0, 1], &[(1, 0), (0, 1), (0, 0)]);
        assert_eq!(pair_vec(&t), vec![(0, 0), (0, 1), (1, 0)]);
    }
}
