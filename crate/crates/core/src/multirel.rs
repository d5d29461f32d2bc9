//! Multiple relations and multiple binary relations.
//!
//! Tuples are index-keyed maps, so restriction and gluing never depend on a
//! positional order. The empty tuple is an ordinary value: `1_∅` has it as
//! its only element while `0_∅` has none.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::transition::Transition;

pub type Tuple<K, V> = BTreeMap<K, V>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultirelError {
    #[error("tuple is not total on the index or not typed by the context")]
    IllTyped,
    #[error("restriction index is not a subset of the relation index")]
    BadIndex,
    #[error("shared indices carry different context sets")]
    ContextMismatch,
    #[error("index is not of the form I × {{in, out}} with matching values")]
    UntaggedIndex,
}

/// A multiple relation: a context `(E_j)_{j∈J}` and a graph `|R| ⊆ Π_J E`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultipleRelation<K: Ord, V: Ord> {
    context: BTreeMap<K, BTreeSet<V>>,
    graph: BTreeSet<Tuple<K, V>>,
}

fn well_typed<K: Ord, V: Ord>(context: &BTreeMap<K, BTreeSet<V>>, t: &Tuple<K, V>) -> bool {
    t.len() == context.len()
        && t.iter()
            .zip(context.iter())
            .all(|((k, v), (j, e))| k == j && e.contains(v))
}

fn restrict_tuple<K: Ord + Clone, V: Clone>(t: &Tuple<K, V>, k: &BTreeSet<K>) -> Tuple<K, V> {
    t.iter()
        .filter(|(j, _)| k.contains(*j))
        .map(|(j, v)| (j.clone(), v.clone()))
        .collect()
}

/// All tuples of `Π_J E_j`, in lexicographic order.
pub fn product<K: Ord + Clone, V: Ord + Clone>(context: &BTreeMap<K, BTreeSet<V>>) -> Vec<Tuple<K, V>> {
    let mut out = alloc::vec![Tuple::new()];
    for (k, values) in context {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for t in &out {
            for v in values {
                let mut t2 = t.clone();
                t2.insert(k.clone(), v.clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// `|R1 ⊗ R2|` for graphs on `J1`, `J2`: all `x` on `J1 ∪ J2` whose
/// restrictions lie in both graphs.
fn glue_graphs<K: Ord + Clone, V: Ord + Clone>(
    g1: &BTreeSet<Tuple<K, V>>,
    g2: &BTreeSet<Tuple<K, V>>,
    shared: &BTreeSet<K>,
) -> BTreeSet<Tuple<K, V>> {
    let mut by_key: BTreeMap<Tuple<K, V>, Vec<&Tuple<K, V>>> = BTreeMap::new();
    for t in g2 {
        by_key.entry(restrict_tuple(t, shared)).or_default().push(t);
    }
    let mut out = BTreeSet::new();
    for t in g1 {
        if let Some(ms) = by_key.get(&restrict_tuple(t, shared)) {
            for m in ms {
                let mut x = t.clone();
                x.extend(m.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.insert(x);
            }
        }
    }
    out
}

impl<K: Ord + Clone, V: Ord + Clone> MultipleRelation<K, V> {
    pub fn new(
        context: BTreeMap<K, BTreeSet<V>>,
        graph: impl IntoIterator<Item = Tuple<K, V>>,
    ) -> Result<Self, MultirelError> {
        let graph: BTreeSet<_> = graph.into_iter().collect();
        if graph.iter().any(|t| !well_typed(&context, t)) {
            return Err(MultirelError::IllTyped);
        }
        Ok(MultipleRelation { context, graph })
    }

    /// `0_J`: the empty graph.
    pub fn zero(context: BTreeMap<K, BTreeSet<V>>) -> Self {
        MultipleRelation {
            context,
            graph: BTreeSet::new(),
        }
    }

    /// `1_J`: the full graph `Π_J E`.
    pub fn one(context: BTreeMap<K, BTreeSet<V>>) -> Self {
        let graph = product(&context).into_iter().collect();
        MultipleRelation { context, graph }
    }

    pub fn index(&self) -> BTreeSet<K> {
        self.context.keys().cloned().collect()
    }

    pub fn context(&self) -> &BTreeMap<K, BTreeSet<V>> {
        &self.context
    }

    pub fn graph(&self) -> &BTreeSet<Tuple<K, V>> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn contains(&self, t: &Tuple<K, V>) -> bool {
        self.graph.contains(t)
    }

    pub fn restrict(&self, k: &BTreeSet<K>) -> Result<Self, MultirelError> {
        if !k.iter().all(|j| self.context.contains_key(j)) {
            return Err(MultirelError::BadIndex);
        }
        Ok(MultipleRelation {
            context: self
                .context
                .iter()
                .filter(|(j, _)| k.contains(*j))
                .map(|(j, e)| (j.clone(), e.clone()))
                .collect(),
            graph: self.graph.iter().map(|t| restrict_tuple(t, k)).collect(),
        })
    }

    pub fn glue(&self, other: &Self) -> Result<Self, MultirelError> {
        let mut context = self.context.clone();
        let mut shared = BTreeSet::new();
        for (j, e) in &other.context {
            match context.get(j) {
                Some(e1) if e1 != e => return Err(MultirelError::ContextMismatch),
                Some(_) => {
                    shared.insert(j.clone());
                }
                None => {
                    context.insert(j.clone(), e.clone());
                }
            }
        }
        Ok(MultipleRelation {
            context,
            graph: glue_graphs(&self.graph, &other.graph, &shared),
        })
    }

    /// Number of tuples of the full product context.
    pub fn context_size(&self) -> usize {
        self.context.values().map(BTreeSet::len).product()
    }
}

/// Tag for the doubled index `2I = I × {in, out}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    In,
    Out,
}

/// Value of a doubled-index relation: an incoming or an outgoing component.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tagged<W, M> {
    In(W),
    Out(M),
}

/// A multiple binary relation: incoming context `𝒲`, outgoing context `ℳ`
/// on the same index, and a graph of tuples of pairs `(w_j, m_j)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultipleBinaryRelation<K: Ord, W: Ord, M: Ord> {
    incoming: BTreeMap<K, BTreeSet<W>>,
    outgoing: BTreeMap<K, BTreeSet<M>>,
    graph: BTreeSet<Tuple<K, (W, M)>>,
}

impl<K, W, M> MultipleBinaryRelation<K, W, M>
where
    K: Ord + Clone,
    W: Ord + Clone,
    M: Ord + Clone,
{
    pub fn new(
        incoming: BTreeMap<K, BTreeSet<W>>,
        outgoing: BTreeMap<K, BTreeSet<M>>,
        graph: impl IntoIterator<Item = Tuple<K, (W, M)>>,
    ) -> Result<Self, MultirelError> {
        if !incoming.keys().eq(outgoing.keys()) {
            return Err(MultirelError::IllTyped);
        }
        let graph: BTreeSet<_> = graph.into_iter().collect();
        let ok = graph.iter().all(|t| {
            t.len() == incoming.len()
                && t.iter().all(|(k, (w, m))| {
                    incoming.get(k).is_some_and(|ws| ws.contains(w))
                        && outgoing.get(k).is_some_and(|ms| ms.contains(m))
                })
        });
        if !ok {
            return Err(MultirelError::IllTyped);
        }
        Ok(MultipleBinaryRelation {
            incoming,
            outgoing,
            graph,
        })
    }

    pub fn incoming(&self) -> &BTreeMap<K, BTreeSet<W>> {
        &self.incoming
    }

    pub fn outgoing(&self) -> &BTreeMap<K, BTreeSet<M>> {
        &self.outgoing
    }

    pub fn graph(&self) -> &BTreeSet<Tuple<K, (W, M)>> {
        &self.graph
    }

    pub fn index(&self) -> BTreeSet<K> {
        self.incoming.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    /// The same contexts with another graph (typing is checked).
    pub fn with_graph(&self, graph: impl IntoIterator<Item = Tuple<K, (W, M)>>) -> Result<Self, MultirelError> {
        MultipleBinaryRelation::new(self.incoming.clone(), self.outgoing.clone(), graph)
    }

    pub fn restrict(&self, k: &BTreeSet<K>) -> Result<Self, MultirelError> {
        if !k.iter().all(|j| self.incoming.contains_key(j)) {
            return Err(MultirelError::BadIndex);
        }
        let keep = |j: &K| k.contains(j);
        Ok(MultipleBinaryRelation {
            incoming: self.incoming.iter().filter(|(j, _)| keep(j)).map(|(j, e)| (j.clone(), e.clone())).collect(),
            outgoing: self.outgoing.iter().filter(|(j, _)| keep(j)).map(|(j, e)| (j.clone(), e.clone())).collect(),
            graph: self.graph.iter().map(|t| restrict_tuple(t, k)).collect(),
        })
    }

    pub fn glue(&self, other: &Self) -> Result<Self, MultirelError> {
        let mut incoming = self.incoming.clone();
        let mut outgoing = self.outgoing.clone();
        let mut shared = BTreeSet::new();
        for (j, w) in &other.incoming {
            let m = &other.outgoing[j];
            match (incoming.get(j), outgoing.get(j)) {
                (Some(w1), Some(m1)) if w1 != w || m1 != m => return Err(MultirelError::ContextMismatch),
                (Some(_), _) => {
                    shared.insert(j.clone());
                }
                (None, _) => {
                    incoming.insert(j.clone(), w.clone());
                    outgoing.insert(j.clone(), m.clone());
                }
            }
        }
        Ok(MultipleBinaryRelation {
            incoming,
            outgoing,
            graph: glue_graphs(&self.graph, &other.graph, &shared),
        })
    }

    /// `mr(Q)`: the same graph over the contexts `W_j × M_j`.
    pub fn mr(&self) -> MultipleRelation<K, (W, M)> {
        let context = self
            .incoming
            .iter()
            .map(|(k, ws)| {
                let ms = &self.outgoing[k];
                let pairs = ws.iter().flat_map(|w| ms.iter().map(move |m| (w.clone(), m.clone()))).collect();
                (k.clone(), pairs)
            })
            .collect();
        MultipleRelation {
            context,
            graph: self.graph.clone(),
        }
    }

    /// Incoming part of a tuple.
    pub fn incoming_part(t: &Tuple<K, (W, M)>) -> Tuple<K, W> {
        t.iter().map(|(k, (w, _))| (k.clone(), w.clone())).collect()
    }

    /// Outgoing part of a tuple.
    pub fn outgoing_part(t: &Tuple<K, (W, M)>) -> Tuple<K, M> {
        t.iter().map(|(k, (_, m))| (k.clone(), m.clone())).collect()
    }

    /// `br(Q)`: the binary relation `Π 𝒲 ⇝ Π ℳ`.
    pub fn br(&self) -> Transition<Tuple<K, W>, Tuple<K, M>> {
        let dom = product(&self.incoming).into_iter().collect();
        let cod = product(&self.outgoing).into_iter().collect();
        Transition::new(
            dom,
            cod,
            self.graph.iter().map(|t| (Self::incoming_part(t), Self::outgoing_part(t))),
        )
        .expect("typed by construction")
    }

    /// `Def_{br(Q)}`, without materializing the product carriers.
    pub fn def(&self) -> BTreeSet<Tuple<K, W>> {
        self.graph.iter().map(Self::incoming_part).collect()
    }

    /// `Im(br(Q))`.
    pub fn image(&self) -> BTreeSet<Tuple<K, M>> {
        self.graph.iter().map(Self::outgoing_part).collect()
    }

    /// `mr₂(Q)`: the relation on `2I` with `D_{(i,in)} = W_i`, `D_{(i,out)} = M_i`.
    pub fn mr2(&self) -> MultipleRelation<(K, Side), Tagged<W, M>> {
        let mut context = BTreeMap::new();
        for (k, ws) in &self.incoming {
            context.insert((k.clone(), Side::In), ws.iter().cloned().map(Tagged::In).collect());
            context.insert(
                (k.clone(), Side::Out),
                self.outgoing[k].iter().cloned().map(Tagged::Out).collect(),
            );
        }
        let graph = self
            .graph
            .iter()
            .map(|t| {
                let mut x = Tuple::new();
                for (k, (w, m)) in t {
                    x.insert((k.clone(), Side::In), Tagged::In(w.clone()));
                    x.insert((k.clone(), Side::Out), Tagged::Out(m.clone()));
                }
                x
            })
            .collect();
        MultipleRelation { context, graph }
    }

    /// `mbr(R)` for a relation on a doubled index; inverse of [`Self::mr2`].
    pub fn mbr(r: &MultipleRelation<(K, Side), Tagged<W, M>>) -> Result<Self, MultirelError> {
        let mut incoming = BTreeMap::new();
        let mut outgoing = BTreeMap::new();
        for ((k, side), values) in &r.context {
            match side {
                Side::In => {
                    let ws = values
                        .iter()
                        .map(|v| match v {
                            Tagged::In(w) => Ok(w.clone()),
                            Tagged::Out(_) => Err(MultirelError::UntaggedIndex),
                        })
                        .collect::<Result<BTreeSet<W>, _>>()?;
                    incoming.insert(k.clone(), ws);
                }
                Side::Out => {
                    let ms = values
                        .iter()
                        .map(|v| match v {
                            Tagged::Out(m) => Ok(m.clone()),
                            Tagged::In(_) => Err(MultirelError::UntaggedIndex),
                        })
                        .collect::<Result<BTreeSet<M>, _>>()?;
                    outgoing.insert(k.clone(), ms);
                }
            }
        }
        if !incoming.keys().eq(outgoing.keys()) {
            return Err(MultirelError::UntaggedIndex);
        }
        let graph = r
            .graph
            .iter()
            .map(|x| {
                let mut t = Tuple::new();
                for k in incoming.keys() {
                    let w = match x.get(&(k.clone(), Side::In)) {
                        Some(Tagged::In(w)) => w.clone(),
                        _ => return Err(MultirelError::UntaggedIndex),
                    };
                    let m = match x.get(&(k.clone(), Side::Out)) {
                        Some(Tagged::Out(m)) => m.clone(),
                        _ => return Err(MultirelError::UntaggedIndex),
                    };
                    t.insert(k.clone(), (w, m));
                }
                Ok(t)
            })
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(MultipleBinaryRelation {
            incoming,
            outgoing,
            graph,
        })
    }
}
