//! Hand-coded example dynamics and families.
//!
//! | name             | payload                                                    |
//! |------------------|------------------------------------------------------------|
//! | `phi`            | deterministic intemporal mono-dynamic on `{0,1}`           |
//! | `upsilon`        | one-step deterministic cell, parameters `{0,1}^{0,1}`      |
//! | `upsilon_star`   | one-step hyper-deterministic cell with "exit" values `*`   |
//! | `gamma`          | hyper-deterministic intemporal lax dynamic, params `a, b`  |
//! | `borromean_family` | three `upsilon` members, borromean request               |
//! | `u_global`       | the two-parameter global dynamic of the borromean family   |
//!
//! Parameter values of `upsilon` are written `λ(0)λ(1)`, so `"10"` maps 0 to 1
//! and 1 to 0. States of the one-step cells are written `(t0,s)` and
//! `(t1,s)`; states of `u_global` are written `(t0;a,b,c)`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{MultiDynamic, OpenDynamic};
use crate::fincat::{one_step_category, terminal_category};
use crate::interaction::{DynamicsFamily, InteractionRequest, InteractiveFamily, Intimacy, Synchronization};
use crate::Label;

pub const NAMES: [&str; 7] = [
    "phi",
    "upsilon",
    "upsilon_star",
    "gamma",
    "borromean_family",
    "diagonal_family",
    "u_global",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fixture `{0}`")]
pub struct UnknownFixture(pub String);

#[derive(Clone, Debug)]
pub enum Payload {
    Dynamic(OpenDynamic),
    Family(InteractiveFamily),
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub payload: Payload,
    pub note: &'static str,
}

pub fn fixture(name: &str) -> Result<Fixture, UnknownFixture> {
    let (name, payload, note) = match name {
        "phi" => ("phi", Payload::Dynamic(phi()), "deterministic intemporal mono-dynamic"),
        "upsilon" => ("upsilon", Payload::Dynamic(upsilon()), "one-step deterministic cell"),
        "upsilon_star" => (
            "upsilon_star",
            Payload::Dynamic(upsilon_star()),
            "one-step hyper-deterministic cell",
        ),
        "gamma" => (
            "gamma",
            Payload::Dynamic(gamma()),
            "hyper-deterministic intemporal lax dynamic",
        ),
        "borromean_family" => (
            "borromean_family",
            Payload::Family(borromean_family()),
            "three one-step cells with a borromean request",
        ),
        "diagonal_family" => (
            "diagonal_family",
            Payload::Family(diagonal_family()),
            "two intemporal cells with a diagonal request",
        ),
        "u_global" => (
            "u_global",
            Payload::Dynamic(u_global()),
            "global dynamic of the borromean family",
        ),
        other => return Err(UnknownFixture(other.into())),
    };
    Ok(Fixture { name, payload, note })
}

fn labels(xs: &[&str]) -> BTreeSet<Label> {
    xs.iter().map(|&x| Label::from(x)).collect()
}

pub fn phi() -> OpenDynamic {
    let alpha = MultiDynamic::from_fn(
        terminal_category(),
        alloc::vec!["*".into()],
        alloc::vec![labels(&["0", "1"])],
        |_, _, s| alloc::vec![s.clone()],
    )
    .expect("well-formed");
    OpenDynamic::over_essential_clock(alpha, &["0"]).expect("well-formed")
}

pub fn gamma() -> OpenDynamic {
    let alpha = MultiDynamic::from_pairs(
        terminal_category(),
        &["a", "b"],
        &[("*", &["0", "1"])],
        &[("0", "a", &[("0", "0"), ("1", "1")]), ("0", "b", &[("1", "1")])],
    )
    .expect("well-formed");
    OpenDynamic::over_essential_clock(alpha, &["0"]).expect("well-formed")
}

fn cell_states(instant: &str) -> BTreeSet<Label> {
    ["0", "1"].iter().map(|s| Label::from(format!("({instant},{s})"))).collect()
}

/// One-step cell whose parameter values are two-character strings
/// `λ(0)λ(1)` over `values`; a `*` leaves the state without successor.
fn one_step_cell(values: &[char]) -> OpenDynamic {
    let mut params = Vec::new();
    for &x in values {
        for &y in values {
            params.push(Label::from(format!("{x}{y}")));
        }
    }
    let engine = one_step_category();
    let d = engine.arrow_id("d").expect("one-step arrow");
    let names = params.clone();
    let alpha = MultiDynamic::from_fn(
        engine,
        params,
        alloc::vec![cell_states("t0"), cell_states("t1")],
        |a, p, s| {
            if a != d {
                return alloc::vec![s.clone()];
            }
            let lam: Vec<char> = names[p.0].as_str().chars().collect();
            let bit = if s.as_str().ends_with("0)") { 0 } else { 1 };
            match lam[bit] {
                '*' => Vec::new(),
                c => alloc::vec![Label::from(format!("(t1,{c})"))],
            }
        },
    )
    .expect("well-formed");
    OpenDynamic::over_essential_clock(alpha, &["t0", "t1"]).expect("well-formed")
}

pub fn upsilon() -> OpenDynamic {
    one_step_cell(&['0', '1'])
}

pub fn upsilon_star() -> OpenDynamic {
    one_step_cell(&['*', '0', '1'])
}

fn u_state(instant: &str, a: u8, b: u8, c: u8) -> Label {
    Label::from(format!("({instant};{a},{b},{c})"))
}

fn bits(s: &Label) -> [u8; 3] {
    let tail = &s.as_str()[4..s.as_str().len() - 1];
    let mut out = [0u8; 3];
    for (k, x) in tail.split(',').enumerate() {
        out[k] = if x == "1" { 1 } else { 0 };
    }
    out
}

/// The successor filter of `u_global` for `μ` and `(a,b,c) ↦ (a',b',c')`.
pub fn u_allows(mu: u8, from: [u8; 3], to: [u8; 3]) -> bool {
    let [a, b, c] = from;
    let [a2, b2, c2] = to;
    if mu == 0 && a == 0 && (b, c) != (0, 0) && a2 != 0 {
        return false;
    }
    if mu == 0 && (a, b, c) == (0, 0, 0) && !(a2 == 0 && (b2 == 1 || c2 == 1)) {
        return false;
    }
    if mu == 0 && (a, b, c) == (1, 0, 0) && !(b2 == 1 || c2 == 1) {
        return false;
    }
    if mu == 1 && a == 0 && a2 != 1 {
        return false;
    }
    true
}

pub fn u_global() -> OpenDynamic {
    let mut t0 = BTreeSet::new();
    let mut t1 = BTreeSet::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                t0.insert(u_state("t0", a, b, c));
                t1.insert(u_state("t1", a, b, c));
            }
        }
    }
    let engine = one_step_category();
    let d = engine.arrow_id("d").expect("one-step arrow");
    let targets = t1.clone();
    let alpha = MultiDynamic::from_fn(engine, alloc::vec!["0".into(), "1".into()], alloc::vec![t0, t1], |arrow, p, s| {
        if arrow != d {
            return alloc::vec![s.clone()];
        }
        targets
            .iter()
            .filter(|t| u_allows(p.0 as u8, bits(s), bits(t)))
            .cloned()
            .collect()
    })
    .expect("well-formed");
    OpenDynamic::over_essential_clock(alpha, &["t0", "t1"]).expect("well-formed")
}

/// Three `upsilon` members indexed `1, 2, 3`; the request holds when some
/// `λ_i(0) = 1`; conductor `1` with identity synchronizations; two parameter
/// tuples are intimate when their first members agree at 0.
pub fn borromean_family() -> InteractiveFamily {
    let members: Vec<(Label, OpenDynamic)> = ["1", "2", "3"].iter().map(|&i| (Label::from(i), upsilon())).collect();
    let family = DynamicsFamily::new(members).expect("fixtures realize within budget");
    let request = borromean_request(&family);
    let sync = Synchronization::identity(&family, "1").expect("identity synchronization");
    InteractiveFamily::new(
        family,
        request,
        sync,
        Intimacy::ActionKey {
            member: "1".into(),
            arrow: "d".into(),
            state: "(t0,0)".into(),
        },
    )
    .expect("admissible")
}

/// The borromean request on a family of `upsilon`-shaped members.
pub fn borromean_request(family: &DynamicsFamily) -> InteractionRequest {
    InteractionRequest::from_predicate(family, |_, params| {
        params.iter().any(|(_, lam)| lam.as_str().starts_with('1'))
    })
    .expect("grid within cap")
}

/// Two `phi` members indexed `1, 2` related when their outgoing realizations
/// coincide.
pub fn diagonal_family() -> InteractiveFamily {
    let members: Vec<(Label, OpenDynamic)> = ["1", "2"].iter().map(|&i| (Label::from(i), phi())).collect();
    let family = DynamicsFamily::new(members).expect("fixtures realize within budget");
    let request = diagonal_request(&family);
    let sync = Synchronization::identity(&family, "1").expect("identity synchronization");
    InteractiveFamily::new(family, request, sync, Intimacy::Equality).expect("admissible")
}

pub fn diagonal_request(family: &DynamicsFamily) -> InteractionRequest {
    InteractionRequest::from_predicate(family, |sigmas, _| {
        let first = &sigmas[0].1;
        sigmas.iter().all(|(_, s)| s == first)
    })
    .expect("grid within cap")
}
