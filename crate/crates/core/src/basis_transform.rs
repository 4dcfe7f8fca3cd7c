//! Linear changes of basis between form-factor sets.
//!
//! A second-order trace expansion carries five independent form factors.
//! Three equivalent slot conventions are supported:
//!
//! * **RicR**: coefficients of {Ric², R², R·U, U², Ω²} — the universal,
//!   dimension-free presentation;
//! * **Weyl(d)**: {C², R², R·U, U², Ω²} with the Weyl tensor C; the map into
//!   this basis is the only place the spacetime dimension enters;
//! * **BV**: the five-slot convention {f1..f5} in which the endomorphism is
//!   shifted by the scalar curvature (source term −U + R/6).
//!
//! All three maps are invertible linear combinations with rational
//! coefficients, so sets carry *functions* of x (not sampled grids) and the
//! transformations compose without interpolation error.
//!
//! `riemann_reduce` implements the elimination of a separate Riemann-squared
//! form factor: to second order around flat space the Gauss–Bonnet
//! combination Riem² − 4Ric² + R² is a total derivative, so a Riem² term may
//! be traded for 4·Ric² − R² under the trace integral.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::form_factors::{self, EvalConfig, FormFactorKind};

/// A form factor as a function of x = s p².
pub type FormFactorFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Which slot convention a [`FormFactorSet`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Ricci-tensor / Ricci-scalar basis (dimension-free).
    RicR,
    /// Weyl basis; `d` is the spacetime dimension used in the map.
    Weyl { d: u32 },
    /// Shifted-endomorphism five-slot basis (dimension-free).
    BV,
}

impl BasisKind {
    /// Slot names of this basis, in canonical order.
    pub fn slots(&self) -> &'static [&'static str] {
        match self {
            BasisKind::RicR => &["ric", "r", "ru", "u", "omega"],
            BasisKind::Weyl { .. } => &["c", "rbis", "ru", "u", "omega"],
            BasisKind::BV => &["f1", "f2", "f3", "f4", "f5"],
        }
    }
}

/// A complete set of second-order form factors in one basis.
#[derive(Clone)]
pub struct FormFactorSet {
    basis: BasisKind,
    entries: BTreeMap<String, FormFactorFn>,
}

impl std::fmt::Debug for FormFactorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormFactorSet")
            .field("basis", &self.basis)
            .field("slots", &self.entries.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl FormFactorSet {
    /// Builds a set from explicit entries, which must cover exactly the
    /// slots of `basis`.
    pub fn from_entries(
        basis: BasisKind,
        entries: BTreeMap<String, FormFactorFn>,
    ) -> Result<Self> {
        for slot in basis.slots() {
            if !entries.contains_key(*slot) {
                return Err(Error::Domain(format!(
                    "form-factor set for {basis:?} is missing slot '{slot}'"
                )));
            }
        }
        if entries.len() != basis.slots().len() {
            let extras: Vec<&String> = entries
                .keys()
                .filter(|k| !basis.slots().contains(&k.as_str()))
                .collect();
            return Err(Error::Domain(format!(
                "form-factor set for {basis:?} has unexpected slots {extras:?}"
            )));
        }
        Ok(FormFactorSet { basis, entries })
    }

    /// The closed-form RicR set evaluated through [`form_factors::eval`].
    pub fn closed_form_ricr(cfg: EvalConfig) -> Self {
        let mut entries: BTreeMap<String, FormFactorFn> = BTreeMap::new();
        let kinds = [
            ("ric", FormFactorKind::Ric),
            ("r", FormFactorKind::R),
            ("ru", FormFactorKind::RU),
            ("u", FormFactorKind::U),
            ("omega", FormFactorKind::Omega),
        ];
        for (slot, kind) in kinds {
            entries.insert(
                slot.to_string(),
                Arc::new(move |x| form_factors::eval(kind, x, &cfg)) as FormFactorFn,
            );
        }
        FormFactorSet {
            basis: BasisKind::RicR,
            entries,
        }
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    /// The function stored in `slot`.
    pub fn get(&self, slot: &str) -> Result<&FormFactorFn> {
        self.entries.get(slot).ok_or_else(|| {
            Error::Domain(format!(
                "no slot '{slot}' in a {:?}-basis form-factor set",
                self.basis
            ))
        })
    }

    /// Evaluates the function stored in `slot` at `x`.
    pub fn eval_slot(&self, slot: &str, x: f64) -> Result<f64> {
        (self.get(slot)?)(x)
    }
}

/// Forms c₀·f₀ + c₁·f₁ (+ c₂·f₂ …) as a new form-factor function.
fn linear(terms: Vec<(f64, FormFactorFn)>) -> FormFactorFn {
    Arc::new(move |x| {
        let mut acc = 0.0;
        for (c, f) in &terms {
            acc += c * f(x)?;
        }
        Ok(acc)
    })
}

/// Eliminates a Riemann-squared form factor, returning the adjusted
/// (Ricci-tensor, Ricci-scalar) pair `(fRic + 4 fRiem, fR − fRiem)`.
///
/// Valid because the quadratic part of Riem² − 4Ric² + R² around flat space
/// is a total derivative, so it drops from the integrated trace.
pub fn riemann_reduce(
    f_riem: FormFactorFn,
    f_ric: FormFactorFn,
    f_r: FormFactorFn,
) -> (FormFactorFn, FormFactorFn) {
    let ric = linear(vec![(1.0, f_ric), (4.0, f_riem.clone())]);
    let r = linear(vec![(1.0, f_r), (-1.0, f_riem)]);
    (ric, r)
}

fn require_basis(set: &FormFactorSet, want: &str, ok: bool) -> Result<()> {
    if !ok {
        return Err(Error::Domain(format!(
            "expected a {want}-basis set, got {:?}",
            set.basis()
        )));
    }
    Ok(())
}

/// Maps a RicR-basis set into the Weyl basis at dimension `d ≥ 4`.
///
/// `f_C = (d−2)/(4(d−3))·f_Ric` and `f_Rbis = d/(4(d−1))·f_Ric + f_R`; the
/// RU, U and Ω slots are untouched.
pub fn to_weyl(set: &FormFactorSet, d: u32) -> Result<FormFactorSet> {
    require_basis(set, "RicR", set.basis() == BasisKind::RicR)?;
    if d < 4 {
        return Err(Error::Domain(format!(
            "the Weyl basis needs d ≥ 4 (the C coefficient has a 1/(d-3) pole), got d = {d}"
        )));
    }
    let df = f64::from(d);
    let ric = set.get("ric")?.clone();
    let mut entries: BTreeMap<String, FormFactorFn> = BTreeMap::new();
    entries.insert(
        "c".into(),
        linear(vec![((df - 2.0) / (4.0 * (df - 3.0)), ric.clone())]),
    );
    entries.insert(
        "rbis".into(),
        linear(vec![
            (df / (4.0 * (df - 1.0)), ric),
            (1.0, set.get("r")?.clone()),
        ]),
    );
    for slot in ["ru", "u", "omega"] {
        entries.insert(slot.into(), set.get(slot)?.clone());
    }
    Ok(FormFactorSet {
        basis: BasisKind::Weyl { d },
        entries,
    })
}

/// Inverts [`to_weyl`].
pub fn from_weyl(set: &FormFactorSet) -> Result<FormFactorSet> {
    let d = match set.basis() {
        BasisKind::Weyl { d } => d,
        _ => return Err(Error::Domain(format!(
            "expected a Weyl-basis set, got {:?}",
            set.basis()
        ))),
    };
    let df = f64::from(d);
    let c = set.get("c")?.clone();
    // f_Ric = 4(d−3)/(d−2)·f_C, and the Rbis slot returns its admixture.
    let ric = linear(vec![(4.0 * (df - 3.0) / (df - 2.0), c)]);
    let r = linear(vec![
        (1.0, set.get("rbis")?.clone()),
        (-df / (4.0 * (df - 1.0)), ric.clone()),
    ]);
    let mut entries: BTreeMap<String, FormFactorFn> = BTreeMap::new();
    entries.insert("ric".into(), ric);
    entries.insert("r".into(), r);
    for slot in ["ru", "u", "omega"] {
        entries.insert(slot.into(), set.get(slot)?.clone());
    }
    Ok(FormFactorSet {
        basis: BasisKind::RicR,
        entries,
    })
}

/// Maps a RicR-basis set into the five-slot shifted-endomorphism basis.
pub fn to_bv(set: &FormFactorSet) -> Result<FormFactorSet> {
    require_basis(set, "RicR", set.basis() == BasisKind::RicR)?;
    let u = set.get("u")?.clone();
    let ru = set.get("ru")?.clone();
    let mut entries: BTreeMap<String, FormFactorFn> = BTreeMap::new();
    entries.insert("f1".into(), set.get("ric")?.clone());
    entries.insert(
        "f2".into(),
        linear(vec![
            (1.0, set.get("r")?.clone()),
            (1.0 / 36.0, u.clone()),
            (1.0 / 6.0, ru.clone()),
        ]),
    );
    entries.insert("f3".into(), linear(vec![(-1.0 / 3.0, u.clone()), (-1.0, ru)]));
    entries.insert("f4".into(), u);
    entries.insert("f5".into(), set.get("omega")?.clone());
    Ok(FormFactorSet {
        basis: BasisKind::BV,
        entries,
    })
}

/// Inverts [`to_bv`].
pub fn from_bv(set: &FormFactorSet) -> Result<FormFactorSet> {
    require_basis(set, "BV", set.basis() == BasisKind::BV)?;
    let f2 = set.get("f2")?.clone();
    let f3 = set.get("f3")?.clone();
    let f4 = set.get("f4")?.clone();
    let mut entries: BTreeMap<String, FormFactorFn> = BTreeMap::new();
    entries.insert("ric".into(), set.get("f1")?.clone());
    // f3 = −u/3 − ru  and  f2 = r + u/36 + ru/6 invert to:
    entries.insert("ru".into(), linear(vec![(-1.0, f3.clone()), (-1.0 / 3.0, f4.clone())]));
    entries.insert(
        "r".into(),
        linear(vec![(1.0, f2), (1.0 / 6.0, f3), (1.0 / 36.0, f4.clone())]),
    );
    entries.insert("u".into(), f4);
    entries.insert("omega".into(), set.get("f5")?.clone());
    Ok(FormFactorSet {
        basis: BasisKind::RicR,
        entries,
    })
}
