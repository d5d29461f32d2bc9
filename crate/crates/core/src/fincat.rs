//! Finite categories given by explicit composition tables.
//!
//! These are the engines of dynamics (objects are temporal types, arrows are
//! durations) and the categories of instants used by control systems.
//! Composition is stored in diagrammatic order: `compose(f, g)` is the arrow
//! "first `f`, then `g`", defined exactly when `cod(f) = dom(g)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: Label,
    pub dom: ObjId,
    pub cod: ObjId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<Label>,
    arrows: Vec<Arrow>,
    identity: Vec<ArrowId>,
    compose: BTreeMap<(ArrowId, ArrowId), ArrowId>,
}

/// Malformed category data (dangling ids, duplicate names).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("duplicate object name `{0}`")]
    DuplicateObject(Label),
    #[error("duplicate arrow name `{0}`")]
    DuplicateArrow(Label),
    #[error("unknown object `{0}`")]
    UnknownObject(Label),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(Label),
    #[error("object id {0} out of range")]
    ObjectOutOfRange(usize),
    #[error("arrow id {0} out of range")]
    ArrowOutOfRange(usize),
    #[error("expected one identity per object ({expected}), got {got}")]
    IdentityCount { expected: usize, got: usize },
    #[error("composite of ({0}, {1}) given twice")]
    DuplicateComposite(Label, Label),
}

/// First violated category law, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryViolation {
    #[error("identity `{arrow}` of object `{object}` is not an endo-arrow of it")]
    IdentityNotEndo { object: Label, arrow: Label },
    #[error("composable pair ({f}, {g}) has no composite")]
    MissingComposite { f: Label, g: Label },
    #[error("non-composable pair ({f}, {g}) has a composite")]
    SpuriousComposite { f: Label, g: Label },
    #[error("composite `{fg}` of ({f}, {g}) has the wrong type")]
    CompositeType { f: Label, g: Label, fg: Label },
    #[error("identity law fails for `{arrow}`")]
    Unit { arrow: Label },
    #[error("associativity fails for ({f}, {g}, {h})")]
    NonAssociative { f: Label, g: Label, h: Label },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonoidError {
    #[error("composition table is not square over {0} elements")]
    NotSquare(usize),
    #[error("table entry out of range")]
    OutOfRange,
    #[error("unit {0} is not a two-sided unit")]
    BadUnit(usize),
    #[error("table is not associative at ({0}, {1}, {2})")]
    NonAssociative(usize, usize, usize),
}

impl FinCategory {
    /// Builds a category from raw parts. Only structural well-formedness is
    /// checked here; the category laws are checked by [`FinCategory::validate`].
    pub fn new(
        objects: Vec<Label>,
        arrows: Vec<Arrow>,
        identity: Vec<ArrowId>,
        compose: BTreeMap<(ArrowId, ArrowId), ArrowId>,
    ) -> Result<Self, CategoryError> {
        for (i, o) in objects.iter().enumerate() {
            if objects[..i].contains(o) {
                return Err(CategoryError::DuplicateObject(o.clone()));
            }
        }
        for (i, a) in arrows.iter().enumerate() {
            if arrows[..i].iter().any(|b| b.name == a.name) {
                return Err(CategoryError::DuplicateArrow(a.name.clone()));
            }
            for o in [a.dom, a.cod] {
                if o.0 >= objects.len() {
                    return Err(CategoryError::ObjectOutOfRange(o.0));
                }
            }
        }
        if identity.len() != objects.len() {
            return Err(CategoryError::IdentityCount {
                expected: objects.len(),
                got: identity.len(),
            });
        }
        let in_range = |a: ArrowId| {
            if a.0 < arrows.len() {
                Ok(())
            } else {
                Err(CategoryError::ArrowOutOfRange(a.0))
            }
        };
        for &a in &identity {
            in_range(a)?;
        }
        for (&(f, g), &fg) in &compose {
            in_range(f)?;
            in_range(g)?;
            in_range(fg)?;
        }
        Ok(FinCategory {
            objects,
            arrows,
            identity,
            compose,
        })
    }

    /// Builds a category from names: arrows as `(name, dom, cod)`, identities
    /// as `(object, arrow)` and composites as `(f, g, f-then-g)`.
    pub fn from_names(
        objects: &[&str],
        arrows: &[(&str, &str, &str)],
        identity: &[(&str, &str)],
        compose: &[(&str, &str, &str)],
    ) -> Result<Self, CategoryError> {
        let objects: Vec<Label> = objects.iter().map(|&o| Label::from(o)).collect();
        let obj = |name: &str| {
            objects
                .iter()
                .position(|o| o == name)
                .map(ObjId)
                .ok_or_else(|| CategoryError::UnknownObject(name.into()))
        };
        let mut arrow_list = Vec::with_capacity(arrows.len());
        for &(name, dom, cod) in arrows {
            arrow_list.push(Arrow {
                name: name.into(),
                dom: obj(dom)?,
                cod: obj(cod)?,
            });
        }
        let arr = |name: &str| {
            arrow_list
                .iter()
                .position(|a| a.name == name)
                .map(ArrowId)
                .ok_or_else(|| CategoryError::UnknownArrow(name.into()))
        };
        let mut ids = alloc::vec![None; objects.len()];
        for &(o, a) in identity {
            ids[obj(o)?.0] = Some(arr(a)?);
        }
        let identity: Vec<ArrowId> = ids.into_iter().flatten().collect();
        let mut table = BTreeMap::new();
        for &(f, g, fg) in compose {
            if table.insert((arr(f)?, arr(g)?), arr(fg)?).is_some() {
                return Err(CategoryError::DuplicateComposite(f.into(), g.into()));
            }
        }
        FinCategory::new(objects, arrow_list, identity, table)
    }

    pub fn objects(&self) -> &[Label] {
        &self.objects
    }

    pub fn object_ids(&self) -> impl Iterator<Item = ObjId> {
        (0..self.objects.len()).map(ObjId)
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> {
        (0..self.arrows.len()).map(ArrowId)
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a.0]
    }

    pub fn object_name(&self, o: ObjId) -> &Label {
        &self.objects[o.0]
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == name).map(ObjId)
    }

    pub fn arrow_id(&self, name: &str) -> Option<ArrowId> {
        self.arrows.iter().position(|a| a.name == name).map(ArrowId)
    }

    pub fn identity(&self, o: ObjId) -> ArrowId {
        self.identity[o.0]
    }

    pub fn is_identity(&self, a: ArrowId) -> bool {
        self.identity.contains(&a)
    }

    /// "First `f`, then `g`".
    pub fn compose(&self, f: ArrowId, g: ArrowId) -> Option<ArrowId> {
        self.compose.get(&(f, g)).copied()
    }

    pub fn composition_table(&self) -> &BTreeMap<(ArrowId, ArrowId), ArrowId> {
        &self.compose
    }

    pub fn composable(&self, f: ArrowId, g: ArrowId) -> bool {
        self.arrows[f.0].cod == self.arrows[g.0].dom
    }

    /// All composable pairs `(f, g)` in id order.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (ArrowId, ArrowId)> + '_ {
        self.arrow_ids()
            .flat_map(move |f| self.arrow_ids().map(move |g| (f, g)))
            .filter(move |&(f, g)| self.composable(f, g))
    }

    pub fn arrow_name(&self, a: ArrowId) -> &Label {
        &self.arrows[a.0].name
    }

    /// Checks identities, the composition domain, typing, unit laws and
    /// associativity by exhaustion, reporting the first failure.
    pub fn validate(&self) -> Result<(), CategoryViolation> {
        let name = |a: ArrowId| self.arrows[a.0].name.clone();
        for o in self.object_ids() {
            let id = self.identity(o);
            let a = self.arrow(id);
            if a.dom != o || a.cod != o {
                return Err(CategoryViolation::IdentityNotEndo {
                    object: self.objects[o.0].clone(),
                    arrow: name(id),
                });
            }
        }
        for f in self.arrow_ids() {
            for g in self.arrow_ids() {
                match (self.composable(f, g), self.compose(f, g)) {
                    (true, None) => {
                        return Err(CategoryViolation::MissingComposite {
                            f: name(f),
                            g: name(g),
                        })
                    }
                    (false, Some(_)) => {
                        return Err(CategoryViolation::SpuriousComposite {
                            f: name(f),
                            g: name(g),
                        })
                    }
                    (true, Some(fg)) => {
                        let c = self.arrow(fg);
                        if c.dom != self.arrow(f).dom || c.cod != self.arrow(g).cod {
                            return Err(CategoryViolation::CompositeType {
                                f: name(f),
                                g: name(g),
                                fg: name(fg),
                            });
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for f in self.arrow_ids() {
            let a = self.arrow(f);
            if self.compose(f, self.identity(a.cod)) != Some(f)
                || self.compose(self.identity(a.dom), f) != Some(f)
            {
                return Err(CategoryViolation::Unit { arrow: name(f) });
            }
        }
        for (f, g) in self.composable_pairs() {
            let fg = self.compose(f, g).expect("checked above");
            for h in self.arrow_ids().filter(|&h| self.composable(g, h)) {
                let left = self.compose(fg, h);
                let right = self.compose(g, h).and_then(|gh| self.compose(f, gh));
                if left != right {
                    return Err(CategoryViolation::NonAssociative {
                        f: name(f),
                        g: name(g),
                        h: name(h),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The terminal category: one object `*` and its identity arrow `0`.
pub fn terminal_category() -> FinCategory {
    FinCategory::from_names(&["*"], &[("0", "*", "*")], &[("*", "0")], &[("0", "0", "0")])
        .expect("well-formed")
}

/// `T0 --d--> T1`.
pub fn one_step_category() -> FinCategory {
    FinCategory::from_names(
        &["T0", "T1"],
        &[("id_T0", "T0", "T0"), ("id_T1", "T1", "T1"), ("d", "T0", "T1")],
        &[("T0", "id_T0"), ("T1", "id_T1")],
        &[
            ("id_T0", "id_T0", "id_T0"),
            ("id_T1", "id_T1", "id_T1"),
            ("id_T0", "d", "d"),
            ("d", "id_T1", "d"),
        ],
    )
    .expect("well-formed")
}

/// Discrete category on the given objects (identities only).
pub fn discrete_category(objects: &[&str]) -> FinCategory {
    let ids: Vec<String> = objects.iter().map(|o| format!("id_{o}")).collect();
    let arrows: Vec<(&str, &str, &str)> = objects
        .iter()
        .zip(&ids)
        .map(|(o, a)| (a.as_str(), *o, *o))
        .collect();
    let identity: Vec<(&str, &str)> = objects.iter().zip(&ids).map(|(o, a)| (*o, a.as_str())).collect();
    let compose: Vec<(&str, &str, &str)> = ids.iter().map(|a| (a.as_str(), a.as_str(), a.as_str())).collect();
    FinCategory::from_names(objects, &arrows, &identity, &compose).expect("well-formed")
}

/// One-object category of a finite monoid. `table[a][b]` is the product
/// `a·b`, read as "first `b`, then `a`", so `compose(b, a) = table[a][b]`.
pub fn finite_monoid_category(
    elements: &[&str],
    table: &[Vec<usize>],
    unit: usize,
) -> Result<FinCategory, MonoidError> {
    let n = elements.len();
    if table.len() != n || table.iter().any(|row| row.len() != n) {
        return Err(MonoidError::NotSquare(n));
    }
    if table.iter().flatten().any(|&x| x >= n) {
        return Err(MonoidError::OutOfRange);
    }
    if unit >= n || (0..n).any(|a| table[unit][a] != a || table[a][unit] != a) {
        return Err(MonoidError::BadUnit(unit));
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(MonoidError::NonAssociative(a, b, c));
                }
            }
        }
    }
    let arrows = elements
        .iter()
        .map(|&e| Arrow {
            name: e.into(),
            dom: ObjId(0),
            cod: ObjId(0),
        })
        .collect();
    let mut compose = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            compose.insert((ArrowId(b), ArrowId(a)), ArrowId(table[a][b]));
        }
    }
    FinCategory::new(alloc::vec![Label::from("*")], arrows, alloc::vec![ArrowId(unit)], compose)
        .map_err(|_| MonoidError::OutOfRange)
}

/// A functor between finite categories, given by its object and arrow maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functor {
    pub objects: Vec<ObjId>,
    pub arrows: Vec<ArrowId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctorViolation {
    #[error("object or arrow map has the wrong length")]
    Shape,
    #[error("arrow `{0}` is not mapped between the images of its ends")]
    Typing(Label),
    #[error("identity of `{0}` is not sent to an identity")]
    Identity(Label),
    #[error("composite of ({0}, {1}) is not preserved")]
    Composition(Label, Label),
}

impl Functor {
    pub fn identity(c: &FinCategory) -> Self {
        Functor {
            objects: c.object_ids().collect(),
            arrows: c.arrow_ids().collect(),
        }
    }

    pub fn object(&self, o: ObjId) -> ObjId {
        self.objects[o.0]
    }

    pub fn arrow(&self, a: ArrowId) -> ArrowId {
        self.arrows[a.0]
    }

    pub fn check(&self, from: &FinCategory, to: &FinCategory) -> Result<(), FunctorViolation> {
        if self.objects.len() != from.objects().len()
            || self.arrows.len() != from.arrows().len()
            || self.objects.iter().any(|o| o.0 >= to.objects().len())
            || self.arrows.iter().any(|a| a.0 >= to.arrows().len())
        {
            return Err(FunctorViolation::Shape);
        }
        for a in from.arrow_ids() {
            let src = from.arrow(a);
            let img = to.arrow(self.arrow(a));
            if img.dom != self.object(src.dom) || img.cod != self.object(src.cod) {
                return Err(FunctorViolation::Typing(src.name.clone()));
            }
        }
        for o in from.object_ids() {
            if self.arrow(from.identity(o)) != to.identity(self.object(o)) {
                return Err(FunctorViolation::Identity(from.object_name(o).clone()));
            }
        }
        for (f, g) in from.composable_pairs() {
            let Some(fg) = from.compose(f, g) else { continue };
            if to.compose(self.arrow(f), self.arrow(g)) != Some(self.arrow(fg)) {
                return Err(FunctorViolation::Composition(
                    from.arrow_name(f).clone(),
                    from.arrow_name(g).clone(),
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FinCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} objects, {} arrows", self.objects.len(), self.arrows.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn terminal_has_one_arrow() {
        let c = terminal_category();
        assert_eq!(c.objects().len(), 1);
        assert_eq!(c.arrows().len(), 1);
        assert_eq!(c.validate(), Ok(()));
        assert_eq!(c.compose(ArrowId(0), ArrowId(0)), Some(ArrowId(0)));
    }

    #[test]
    fn one_step_shape() {
        let c = one_step_category();
        assert_eq!(c.objects().len(), 2);
        assert_eq!(c.arrows().len(), 3);
        assert_eq!(c.validate(), Ok(()));
        let d = c.arrow_id("d").unwrap();
        let id0 = c.arrow_id("id_T0").unwrap();
        assert_eq!(c.compose(id0, d), Some(d));
        assert_eq!(c.compose(d, d), None);
        assert!(!c.composable(d, d));
    }

    #[test]
    fn max_monoid() {
        let c = finite_monoid_category(&["0", "1"], &[vec![0, 1], vec![1, 1]], 0).unwrap();
        assert_eq!(c.objects().len(), 1);
        assert_eq!(c.arrows().len(), 2);
        assert_eq!(c.validate(), Ok(()));
    }

    #[test]
    fn z2_is_associative_by_exhaustion() {
        let table = vec![vec![0, 1], vec![1, 0]];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(table[table[a][b]][c], table[a][table[b][c]]);
                }
            }
        }
        let c = finite_monoid_category(&["0", "1"], &table, 0).unwrap();
        assert_eq!(c.validate(), Ok(()));
    }

    #[test]
    fn non_associative_table_is_rejected() {
        // x·y = y for y ≠ unit breaks nothing; make a·a = b, a·b = a, b·a = b, b·b = a.
        let table = vec![vec![0, 1, 2], vec![1, 2, 1], vec![2, 1, 1]];
        assert!(matches!(
            finite_monoid_category(&["e", "a", "b"], &table, 0),
            Err(MonoidError::NonAssociative(..))
        ));
        assert_eq!(
            finite_monoid_category(&["e", "a"], &[vec![0, 1], vec![1, 1]], 1),
            Err(MonoidError::BadUnit(1))
        );
    }

    #[test]
    fn broken_associativity_is_reported_with_witnesses() {
        // Build a 3-element "monoid" table directly, bypassing the monoid checks.
        let table = [[0usize, 1, 2], [1, 2, 1], [2, 1, 1]];
        let arrows = ["e", "a", "b"]
            .iter()
            .map(|&n| Arrow { name: n.into(), dom: ObjId(0), cod: ObjId(0) })
            .collect();
        let mut compose = BTreeMap::new();
        for a in 0..3 {
            for b in 0..3 {
                compose.insert((ArrowId(b), ArrowId(a)), ArrowId(table[a][b]));
            }
        }
        let c = FinCategory::new(vec!["*".into()], arrows, vec![ArrowId(0)], compose).unwrap();
        assert!(matches!(c.validate(), Err(CategoryViolation::NonAssociative { .. })));
    }

    #[test]
    fn missing_composite_is_reported() {
        let c = FinCategory::from_names(
            &["A"],
            &[("id", "A", "A")],
            &[("A", "id")],
            &[],
        )
        .unwrap();
        assert_eq!(
            c.validate(),
            Err(CategoryViolation::MissingComposite { f: "id".into(), g: "id".into() })
        );
    }

    #[test]
    fn identity_functor_checks() {
        let c = one_step_category();
        assert_eq!(Functor::identity(&c).check(&c, &c), Ok(()));
        let to_point = Functor { objects: vec![ObjId(0), ObjId(0)], arrows: vec![ArrowId(0); 3] };
        assert_eq!(to_point.check(&c, &terminal_category()), Ok(()));
    }
}
