//! Background field data on a periodic box.
//!
//! Fields live on a torus of side `L` in `d ∈ {1,2,3}` dimensions and are
//! stored as finite Fourier mode sets with the convention
//! `U(x) = Σ_p Ũ(p) e^{ipx}`, `p = (2π/L)·n` (no volume factor). The
//! abelian connection is written `A_μ = i·θ_μ` with θ real, so its modes
//! obey the same reality condition as U.
//!
//! The JSON form is
//! `{d, L, bundle_dim, u_modes: [{n: [ints], re, im}], a_modes: [{mu, n: [ints], re, im}]}`
//! and is validated on load: every mode must have its conjugate partner at
//! `−n`, which keeps the position-space fields exactly real.

use std::collections::BTreeMap;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reality-check tolerance for conjugate mode pairs.
const REALITY_TOL: f64 = 1e-12;

/// Fourier data for the endomorphism U and the abelian connection θ on a
/// periodic box.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldData {
    d: usize,
    box_length: f64,
    bundle_dim: usize,
    u_modes: BTreeMap<Vec<i32>, Complex64>,
    /// One mode map per vector component μ = 0..d.
    a_modes: Vec<BTreeMap<Vec<i32>, Complex64>>,
}

impl FieldData {
    pub fn new(
        d: usize,
        box_length: f64,
        bundle_dim: usize,
        u_modes: BTreeMap<Vec<i32>, Complex64>,
        a_modes: Vec<BTreeMap<Vec<i32>, Complex64>>,
    ) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidFieldData(format!(
                "field data supports d ∈ {{1,2,3}}, got {d}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidFieldData(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        if bundle_dim == 0 {
            return Err(Error::InvalidFieldData("bundle dimension must be ≥ 1".into()));
        }
        if a_modes.len() != d {
            return Err(Error::InvalidFieldData(format!(
                "expected {d} connection components, got {}",
                a_modes.len()
            )));
        }
        let data = FieldData { d, box_length, bundle_dim, u_modes, a_modes };
        data.check_reality("u_modes", &data.u_modes)?;
        for (mu, comp) in data.a_modes.iter().enumerate() {
            data.check_reality(&format!("a_modes[μ={mu}]"), comp)?;
        }
        Ok(data)
    }

    /// A field-free box.
    pub fn zero(d: usize, box_length: f64, bundle_dim: usize) -> Result<Self> {
        FieldData::new(d, box_length, bundle_dim, BTreeMap::new(), vec![BTreeMap::new(); d])
    }

    /// `U(x) = 2·amplitude·cos(p·x)` with `p = (2π/L)·n`: the standard
    /// single-mode probe (modes ±n, both real).
    pub fn single_cosine_u(
        d: usize,
        box_length: f64,
        bundle_dim: usize,
        n: &[i32],
        amplitude: f64,
    ) -> Result<Self> {
        if n.len() != d {
            return Err(Error::InvalidFieldData(format!(
                "mode index has {} entries in d = {d}",
                n.len()
            )));
        }
        if n.iter().all(|c| *c == 0) {
            return Err(Error::InvalidFieldData(
                "cosine probe needs a nonzero mode index".into(),
            ));
        }
        let mut u_modes = BTreeMap::new();
        u_modes.insert(n.to_vec(), Complex64::new(amplitude, 0.0));
        u_modes.insert(
            n.iter().map(|c| -c).collect(),
            Complex64::new(amplitude, 0.0),
        );
        FieldData::new(d, box_length, bundle_dim, u_modes, vec![BTreeMap::new(); d])
    }

    /// `θ_μ(x) = 2·amplitude·cos(p·x)` on one component.
    pub fn single_cosine_theta(
        d: usize,
        box_length: f64,
        bundle_dim: usize,
        mu: usize,
        n: &[i32],
        amplitude: f64,
    ) -> Result<Self> {
        if mu >= d {
            return Err(Error::InvalidFieldData(format!(
                "component index {mu} out of range for d = {d}"
            )));
        }
        if n.len() != d {
            return Err(Error::InvalidFieldData(format!(
                "mode index has {} entries in d = {d}",
                n.len()
            )));
        }
        let mut a_modes = vec![BTreeMap::new(); d];
        a_modes[mu].insert(n.to_vec(), Complex64::new(amplitude, 0.0));
        a_modes[mu].insert(
            n.iter().map(|c| -c).collect(),
            Complex64::new(amplitude, 0.0),
        );
        FieldData::new(d, box_length, bundle_dim, BTreeMap::new(), a_modes)
    }

    fn check_reality(&self, label: &str, modes: &BTreeMap<Vec<i32>, Complex64>) -> Result<()> {
        for (n, v) in modes {
            if n.len() != self.d {
                return Err(Error::InvalidFieldData(format!(
                    "{label}: mode index {n:?} has {} entries in d = {}",
                    n.len(),
                    self.d
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidFieldData(format!(
                    "{label}: non-finite amplitude at {n:?}"
                )));
            }
            let neg: Vec<i32> = n.iter().map(|c| -c).collect();
            let partner = modes.get(&neg).copied().ok_or_else(|| {
                Error::InvalidFieldData(format!(
                    "{label}: mode {n:?} lacks its conjugate partner at {neg:?}"
                ))
            })?;
            if (partner - v.conj()).norm() > REALITY_TOL * (1.0 + v.norm()) {
                return Err(Error::InvalidFieldData(format!(
                    "{label}: modes at ±{n:?} are not complex conjugates"
                )));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn bundle_dim(&self) -> usize {
        self.bundle_dim
    }

    pub fn u_modes(&self) -> &BTreeMap<Vec<i32>, Complex64> {
        &self.u_modes
    }

    pub fn a_modes(&self) -> &[BTreeMap<Vec<i32>, Complex64>] {
        &self.a_modes
    }

    /// Physical momentum of an integer mode index: `p = (2π/L)·n`.
    pub fn momentum(&self, n: &[i32]) -> Vec<f64> {
        let k = 2.0 * std::f64::consts::PI / self.box_length;
        n.iter().map(|c| k * *c as f64).collect()
    }

    /// Position-space endomorphism value (exactly real by the validated
    /// mode pairing; the vanishing imaginary part is dropped).
    pub fn u_at(&self, x: &[f64]) -> Result<f64> {
        self.eval_modes(&self.u_modes, x)
    }

    /// Position-space value of the connection component `θ_μ`.
    pub fn theta_at(&self, mu: usize, x: &[f64]) -> Result<f64> {
        let comp = self.a_modes.get(mu).ok_or_else(|| {
            Error::InvalidFieldData(format!(
                "component index {mu} out of range for d = {}",
                self.d
            ))
        })?;
        self.eval_modes(comp, x)
    }

    /// Returns a copy with every mode amplitude multiplied by a real
    /// factor (reality pairing is preserved automatically).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() {
            return Err(Error::Domain(format!(
                "field scale factor must be finite, got {factor}"
            )));
        }
        let mut out = self.clone();
        for v in out.u_modes.values_mut() {
            *v *= factor;
        }
        for comp in &mut out.a_modes {
            for v in comp.values_mut() {
                *v *= factor;
            }
        }
        Ok(out)
    }

    fn eval_modes(&self, modes: &BTreeMap<Vec<i32>, Complex64>, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "position has {} coordinates in d = {}",
                x.len(),
                self.d
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, v) in modes {
            let p = self.momentum(n);
            let phase: f64 = p.iter().zip(x).map(|(pi, xi)| pi * xi).sum();
            acc += v * Complex64::from_polar(1.0, phase);
        }
        Ok(acc.re)
    }

    /// Serializes to the documented JSON format (deterministic order).
    pub fn to_json_string(&self) -> Result<String> {
        let dto = FieldDataDto {
            d: self.d,
            l: self.box_length,
            bundle_dim: self.bundle_dim,
            u_modes: self
                .u_modes
                .iter()
                .map(|(n, v)| UModeDto { n: n.clone(), re: v.re, im: v.im })
                .collect(),
            a_modes: self
                .a_modes
                .iter()
                .enumerate()
                .flat_map(|(mu, comp)| {
                    comp.iter().map(move |(n, v)| AModeDto {
                        mu,
                        n: n.clone(),
                        re: v.re,
                        im: v.im,
                    })
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&dto)?)
    }

    /// Parses and validates the documented JSON format.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let dto: FieldDataDto = serde_json::from_str(text)?;
        let mut u_modes = BTreeMap::new();
        for m in dto.u_modes {
            if u_modes
                .insert(m.n.clone(), Complex64::new(m.re, m.im))
                .is_some()
            {
                return Err(Error::InvalidFieldData(format!(
                    "duplicate u mode at {:?}",
                    m.n
                )));
            }
        }
        let mut a_modes = vec![BTreeMap::new(); dto.d.min(8)];
        for m in dto.a_modes {
            if m.mu >= a_modes.len() {
                return Err(Error::InvalidFieldData(format!(
                    "connection component {} out of range for d = {}",
                    m.mu, dto.d
                )));
            }
            if a_modes[m.mu]
                .insert(m.n.clone(), Complex64::new(m.re, m.im))
                .is_some()
            {
                return Err(Error::InvalidFieldData(format!(
                    "duplicate a mode at μ = {}, {:?}",
                    m.mu, m.n
                )));
            }
        }
        FieldData::new(dto.d, dto.l, dto.bundle_dim, u_modes, a_modes)
    }
}

#[derive(Serialize, Deserialize)]
struct UModeDto {
    n: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct AModeDto {
    mu: usize,
    n: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldDataDto {
    d: usize,
    #[serde(rename = "L")]
    l: f64,
    bundle_dim: usize,
    #[serde(default)]
    u_modes: Vec<UModeDto>,
    #[serde(default)]
    a_modes: Vec<AModeDto>,
}
