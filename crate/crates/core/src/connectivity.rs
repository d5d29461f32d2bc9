//! Connectivity structures generated by non-splittability.
//!
//! A subset `K` of the index is splittable for a relation `R` when it has a
//! partition into two non-empty parts `K1, K2` with `R|K = R|K1 ⊗ R|K2`.
//! Since `R|K` always sits inside the glued relation, whose size is the
//! product of the two projection sizes, splitting reduces to comparing
//! projection counts. The empty set and singletons are always connected.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::dynamics::ParamId;
use crate::interaction::{InteractionRequest, InteractiveFamily};
use crate::multirel::{MultipleBinaryRelation, MultipleRelation};
use crate::Label;

pub const MAX_INDEX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("index has {0} elements, above the limit of 12")]
pub struct IndexTooLarge(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    DiscreteIntegral,
    Indiscrete,
    IntegralBorromean,
    Other,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::DiscreteIntegral => "discrete integral",
            Classification::Indiscrete => "indiscrete",
            Classification::IntegralBorromean => "integral borromean",
            Classification::Other => "other",
        })
    }
}

/// A finite carrier with its connected subsets, stored as bitmasks over the
/// carrier order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivitySpace<K> {
    carrier: Vec<K>,
    connected: BTreeSet<u32>,
}

impl<K: Ord + Clone> ConnectivitySpace<K> {
    pub fn new(carrier: Vec<K>, connected: BTreeSet<u32>) -> Result<Self, IndexTooLarge> {
        if carrier.len() > MAX_INDEX {
            return Err(IndexTooLarge(carrier.len()));
        }
        Ok(ConnectivitySpace { carrier, connected })
    }

    pub fn carrier(&self) -> &[K] {
        &self.carrier
    }

    pub fn masks(&self) -> &BTreeSet<u32> {
        &self.connected
    }

    pub fn mask_of(&self, subset: &BTreeSet<K>) -> Option<u32> {
        let mut mask = 0;
        for x in subset {
            mask |= 1 << self.carrier.iter().position(|c| c == x)?;
        }
        Some(mask)
    }

    pub fn subset_of(&self, mask: u32) -> BTreeSet<K> {
        self.carrier
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, x)| x.clone())
            .collect()
    }

    pub fn is_connected(&self, subset: &BTreeSet<K>) -> bool {
        self.mask_of(subset).is_some_and(|m| self.connected.contains(&m))
    }

    /// Connected subsets, by ascending mask.
    pub fn subsets(&self) -> Vec<BTreeSet<K>> {
        self.connected.iter().map(|&m| self.subset_of(m)).collect()
    }

    /// Unions of two intersecting connected sets are connected (which gives
    /// the axiom for any family with a common point, by induction).
    pub fn satisfies_axiom(&self) -> bool {
        let sets: Vec<u32> = self.connected.iter().copied().collect();
        sets.iter().enumerate().all(|(k, &a)| {
            sets[k + 1..]
                .iter()
                .all(|&b| a & b == 0 || self.connected.contains(&(a | b)))
        })
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.carrier == other.carrier && self.connected.is_subset(&other.connected)
    }

    pub fn classify(&self) -> Classification {
        let n = self.carrier.len();
        let all = (1u32 << n) - 1;
        let base: BTreeSet<u32> = core::iter::once(0).chain((0..n).map(|k| 1 << k)).collect();
        if self.connected == base {
            return Classification::DiscreteIntegral;
        }
        if self.connected.len() == 1 << n {
            return Classification::Indiscrete;
        }
        let mut borromean = base;
        borromean.insert(all);
        if n >= 3 && self.connected == borromean {
            return Classification::IntegralBorromean;
        }
        Classification::Other
    }
}

/// `𝒦` of a relation given by its index and positional tuples.
pub fn connectivity_of_tuples<K, V, I>(index: Vec<K>, tuples: I) -> Result<ConnectivitySpace<K>, IndexTooLarge>
where
    K: Ord + Clone,
    V: Ord + Clone,
    I: IntoIterator<Item = Vec<V>>,
{
    let n = index.len();
    if n > MAX_INDEX {
        return Err(IndexTooLarge(n));
    }
    let graph: BTreeSet<Vec<V>> = tuples.into_iter().collect();
    let counts: Vec<usize> = (0u32..1 << n)
        .map(|mask| {
            graph
                .iter()
                .map(|t| {
                    t.iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .map(|(_, v)| v)
                        .collect::<Vec<&V>>()
                })
                .collect::<BTreeSet<_>>()
                .len()
        })
        .collect();
    let mut connected = BTreeSet::new();
    for mask in 0u32..1 << n {
        if mask.count_ones() <= 1 {
            connected.insert(mask);
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // K1 ranges over proper subsets of `mask` containing its lowest bit.
        let mut sub = rest;
        let mut splittable = false;
        loop {
            let k1 = sub | low;
            if k1 != mask {
                let k2 = mask ^ k1;
                if counts[mask as usize] == counts[k1 as usize] * counts[k2 as usize] {
                    splittable = true;
                    break;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        if !splittable {
            connected.insert(mask);
        }
    }
    ConnectivitySpace::new(index, connected)
}

pub fn connectivity_of_relation<K: Ord + Clone, V: Ord + Clone>(
    r: &MultipleRelation<K, V>,
) -> Result<ConnectivitySpace<K>, IndexTooLarge> {
    connectivity_of_tuples(
        r.index().into_iter().collect(),
        r.graph().iter().map(|t| t.values().cloned().collect::<Vec<V>>()),
    )
}

pub fn connectivity_of_binary<K: Ord + Clone, W: Ord + Clone, M: Ord + Clone>(
    q: &MultipleBinaryRelation<K, W, M>,
) -> Result<ConnectivitySpace<K>, IndexTooLarge> {
    connectivity_of_tuples(
        q.index().into_iter().collect(),
        q.graph().iter().map(|t| t.values().cloned().collect::<Vec<(W, M)>>()),
    )
}

/// `𝒦` of the projection of a request on `Π 𝒵`.
pub fn connectivity_of_projection(q: &InteractionRequest) -> Result<ConnectivitySpace<Label>, IndexTooLarge> {
    connectivity_of_tuples(
        q.relation().index().into_iter().collect(),
        q.graph().iter().map(|t| t.values().map(|&(z, _)| z).collect::<Vec<usize>>()),
    )
}

pub fn connectivity_of_request(q: &InteractionRequest) -> Result<ConnectivitySpace<Label>, IndexTooLarge> {
    connectivity_of_binary::<Label, usize, ParamId>(q.relation())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourStructures {
    /// `𝒦_R`.
    pub request: ConnectivitySpace<Label>,
    /// `𝒦_Ř`, the plain structure.
    pub coherent: ConnectivitySpace<Label>,
    /// `𝒦` of the projection of `R` on `Π 𝒵`.
    pub request_projection: ConnectivitySpace<Label>,
    /// `𝒦` of the projection of `Ř` on `Π 𝒵`, the manifest structure.
    pub coherent_projection: ConnectivitySpace<Label>,
}

impl FourStructures {
    pub fn manifest(&self) -> &ConnectivitySpace<Label> {
        &self.coherent_projection
    }

    pub fn plain(&self) -> &ConnectivitySpace<Label> {
        &self.coherent
    }

    pub fn named(&self) -> BTreeMap<&'static str, &ConnectivitySpace<Label>> {
        BTreeMap::from([
            ("request", &self.request),
            ("coherent", &self.coherent),
            ("request_projection", &self.request_projection),
            ("coherent_projection", &self.coherent_projection),
        ])
    }
}

pub fn four_structures_of(request: &InteractionRequest, coherent: &InteractionRequest) -> Result<FourStructures, IndexTooLarge> {
    Ok(FourStructures {
        request: connectivity_of_request(request)?,
        coherent: connectivity_of_request(coherent)?,
        request_projection: connectivity_of_projection(request)?,
        coherent_projection: connectivity_of_projection(coherent)?,
    })
}

pub fn four_structures(f: &InteractiveFamily) -> Result<FourStructures, IndexTooLarge> {
    four_structures_of(f.request(), f.coherent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::interaction::DynamicsFamily;
    use alloc::vec;

    fn set(xs: &[&str]) -> BTreeSet<Label> {
        xs.iter().map(|&x| Label::from(x)).collect()
    }

    #[test]
    fn borromean_structures() {
        let f = fixtures::borromean_family();
        let s = four_structures(&f).unwrap();
        for space in [s.manifest(), s.plain()] {
            assert_eq!(space.classify(), Classification::IntegralBorromean);
            assert!(space.is_connected(&set(&["1", "2", "3"])));
            assert!(!space.is_connected(&set(&["1", "2"])));
            assert!(space.is_connected(&set(&["2"])));
            assert!(space.satisfies_axiom());
        }
    }

    #[test]
    fn omega_is_discrete() {
        for members in [
            vec![fixtures::upsilon(), fixtures::upsilon()],
            vec![fixtures::phi(), fixtures::gamma(), fixtures::upsilon_star()],
        ] {
            let fam = DynamicsFamily::new(
                members.into_iter().enumerate().map(|(k, a)| (Label::from(alloc::format!("{}", k + 1)), a)).collect(),
            )
            .unwrap();
            let omega = InteractionRequest::omega(&fam);
            let s = four_structures_of(&omega, &omega).unwrap();
            for space in s.named().values() {
                assert_eq!(space.classify(), Classification::DiscreteIntegral);
            }
        }
    }

    #[test]
    fn full_relation_is_discrete() {
        let ctx: BTreeMap<u8, BTreeSet<u8>> = (0..4).map(|k| (k, BTreeSet::from([0, 1]))).collect();
        let one = MultipleRelation::one(ctx.clone());
        assert_eq!(connectivity_of_relation(&one).unwrap().classify(), Classification::DiscreteIntegral);
        // The empty relation splits everywhere as well.
        let zero = MultipleRelation::zero(ctx);
        assert_eq!(connectivity_of_relation(&zero).unwrap().classify(), Classification::DiscreteIntegral);
    }

    #[test]
    fn diagonal_is_indiscrete() {
        let tuples = (0..3u8).map(|v| vec![v, v, v]);
        let s = connectivity_of_tuples(vec!['a', 'b', 'c'], tuples).unwrap();
        assert_eq!(s.classify(), Classification::Indiscrete);
        assert!(s.satisfies_axiom());
    }

    #[test]
    fn index_limit() {
        let idx: Vec<u8> = (0..13).collect();
        assert_eq!(
            connectivity_of_tuples(idx, core::iter::empty::<Vec<u8>>()).unwrap_err(),
            IndexTooLarge(13)
        );
    }

    #[test]
    fn axiom_failure_is_detected() {
        // {a,b} and {b,c} connected but {a,b,c} not.
        let s = ConnectivitySpace::new(vec!['a', 'b', 'c'], BTreeSet::from([0, 1, 2, 4, 0b011, 0b110])).unwrap();
        assert!(!s.satisfies_axiom());
        assert_eq!(s.classify(), Classification::Other);
    }
}
