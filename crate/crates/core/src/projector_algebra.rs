//! Transverse/longitudinal vector projectors and the six generalized tensor
//! projectors for symmetric rank-2 fluctuations.
//!
//! Given a momentum p with p² > 0, the matrices
//!
//! ```text
//! PT = δ − p p/p² ,   PL = p p/p²
//! ```
//!
//! split vectors into transverse and longitudinal parts. Symmetric pairs
//! (μν) then decompose under the six projectors
//!
//! ```text
//! P_2  = ½(PT⊗PT + swap) − PT⊗PT/(d−1)      spin 2
//! P_1  = ½(four PT/PL cross terms)           spin 1
//! P_S  = PT⊗PT/(d−1)                         transverse scalar
//! P_σ  = PL⊗PL                               longitudinal scalar
//! P_Sσ = PT⊗PL/√(d−1) ,  P_σS = PL⊗PT/√(d−1) scalar mixers
//! ```
//!
//! The four unmixed projectors are idempotent and mutually orthogonal, and
//! sum to the identity on symmetric pairs; the mixers connect the two scalar
//! channels. `decompose` inverts this basis for any pair-symmetric rank-4
//! tensor using the diagonal Gram matrix of the six projectors.
//!
//! In d = 2 the spin-2 projector vanishes identically, so its coefficient is
//! reported as structurally absent rather than zero.

use ndarray::{Array2, Array4};

use crate::error::{Error, Result};

/// A Euclidean momentum vector in d ≥ 2 dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Momentum {
    components: Vec<f64>,
}

impl Momentum {
    /// Builds a momentum from its components (at least two, all finite).
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Domain(format!(
                "momentum needs d ≥ 2 components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("momentum components must be finite".into()));
        }
        Ok(Momentum { components })
    }

    /// The momentum (value, 0, …, 0) along the first axis.
    pub fn along_axis(d: usize, value: f64) -> Result<Self> {
        let mut components = vec![0.0; d];
        if d > 0 {
            components[0] = value;
        }
        Momentum::new(components)
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum()
    }

    fn require_nonzero(&self) -> Result<()> {
        if self.norm_squared() <= 0.0 {
            return Err(Error::Domain(
                "projectors need a momentum with positive norm".into(),
            ));
        }
        Ok(())
    }
}

/// A rank-4 tensor T^{μν,αβ} symmetric within each index pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPairTensor {
    d: usize,
    components: Array4<f64>,
}

impl SymPairTensor {
    /// Wraps an array, checking the square shape and the pair symmetries.
    pub fn from_array(components: Array4<f64>) -> Result<Self> {
        let shape = components.shape().to_vec();
        let d = shape[0];
        if shape != [d, d, d, d] {
            return Err(Error::DimensionMismatch(format!(
                "symmetric-pair tensor must be d⁴, got shape {shape:?}"
            )));
        }
        let scale = components.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale.max(1.0);
        for m in 0..d {
            for n in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let t = components[[m, n, a, b]];
                        if (t - components[[n, m, a, b]]).abs() > tol
                            || (t - components[[m, n, b, a]]).abs() > tol
                        {
                            return Err(Error::Domain(
                                "tensor is not symmetric within its index pairs".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(SymPairTensor { d, components })
    }

    /// Wraps an arbitrary rank-4 array after symmetrizing both index pairs.
    pub fn pair_symmetrized(raw: &Array4<f64>) -> Result<Self> {
        let shape = raw.shape().to_vec();
        let d = shape[0];
        if shape != [d, d, d, d] {
            return Err(Error::DimensionMismatch(format!(
                "symmetric-pair tensor must be d⁴, got shape {shape:?}"
            )));
        }
        let mut components = Array4::zeros((d, d, d, d));
        for m in 0..d {
            for n in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        components[[m, n, a, b]] = 0.25
                            * (raw[[m, n, a, b]]
                                + raw[[n, m, a, b]]
                                + raw[[m, n, b, a]]
                                + raw[[n, m, b, a]]);
                    }
                }
            }
        }
        Ok(SymPairTensor { d, components })
    }

    pub fn zeros(d: usize) -> Self {
        SymPairTensor {
            d,
            components: Array4::zeros((d, d, d, d)),
        }
    }

    /// The identity on symmetric pairs, ½(δ^{μα}δ^{νβ} + δ^{μβ}δ^{να}).
    pub fn identity(d: usize) -> Self {
        let mut t = SymPairTensor::zeros(d);
        for m in 0..d {
            for n in 0..d {
                t.components[[m, n, m, n]] += 0.5;
                t.components[[m, n, n, m]] += 0.5;
            }
        }
        t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn array(&self) -> &Array4<f64> {
        &self.components
    }

    /// Full contraction A^{μν,αβ} B^{μν,αβ}. On pair-symmetric tensors this
    /// coincides with the inner product under the pair metric
    /// ½(δ_{μα}δ_{νβ} + δ_{μβ}δ_{να}).
    pub fn inner(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(other.components.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Pair-space composition (A B)^{μν,αβ} = A^{μν,ρσ} B^{ρσ,αβ}.
    pub fn compose(&self, other: &Self) -> SymPairTensor {
        let d = self.d;
        let mut out = Array4::zeros((d, d, d, d));
        for m in 0..d {
            for n in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let mut acc = 0.0;
                        for r in 0..d {
                            for s in 0..d {
                                acc += self.components[[m, n, r, s]]
                                    * other.components[[r, s, a, b]];
                            }
                        }
                        out[[m, n, a, b]] = acc;
                    }
                }
            }
        }
        SymPairTensor { d, components: out }
    }

    /// Pair trace T^{μν,μν}.
    pub fn pair_trace(&self) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.d {
            for n in 0..self.d {
                acc += self.components[[m, n, m, n]];
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> SymPairTensor {
        SymPairTensor {
            d: self.d,
            components: &self.components * factor,
        }
    }

    pub fn add(&self, other: &Self) -> SymPairTensor {
        SymPairTensor {
            d: self.d,
            components: &self.components + &other.components,
        }
    }

    pub fn sub(&self, other: &Self) -> SymPairTensor {
        SymPairTensor {
            d: self.d,
            components: &self.components - &other.components,
        }
    }
}

/// Names of the six tensor projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectorName {
    /// Transverse traceless (spin 2).
    P2,
    /// Mixed transverse/longitudinal (spin 1).
    P1,
    /// Transverse trace scalar.
    S,
    /// Scalar mixer PT⊗PL.
    SSigma,
    /// Scalar mixer PL⊗PT.
    SigmaS,
    /// Longitudinal scalar.
    Sigma,
}

impl ProjectorName {
    pub const ALL: [ProjectorName; 6] = [
        ProjectorName::P2,
        ProjectorName::P1,
        ProjectorName::S,
        ProjectorName::SSigma,
        ProjectorName::SigmaS,
        ProjectorName::Sigma,
    ];
}

impl std::fmt::Display for ProjectorName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProjectorName::P2 => "2",
            ProjectorName::P1 => "1",
            ProjectorName::S => "S",
            ProjectorName::SSigma => "S-sigma",
            ProjectorName::SigmaS => "sigma-S",
            ProjectorName::Sigma => "sigma",
        };
        f.write_str(s)
    }
}

/// Coefficients of a symmetric-pair tensor on the projector basis.
///
/// `c2` is `None` in d = 2, where the spin-2 projector vanishes identically
/// and the slot is structurally absent. `residual_norm` is the Frobenius
/// norm of whatever part of the input lies outside the projector span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorCoefficients {
    pub c2: Option<f64>,
    pub c1: f64,
    pub c_s: f64,
    pub c_s_sigma: f64,
    pub c_sigma_s: f64,
    pub c_sigma: f64,
    pub residual_norm: f64,
}

impl ProjectorCoefficients {
    /// The spin-2 coefficient, or `SingularGram` where the slot is absent.
    pub fn c2(&self) -> Result<f64> {
        self.c2.ok_or_else(|| {
            Error::SingularGram(
                "the spin-2 projector vanishes identically in d = 2; its coefficient is \
                 structurally absent"
                    .into(),
            )
        })
    }
}

/// The transverse and longitudinal vector projectors (PT, PL).
pub fn vector_projectors(p: &Momentum) -> Result<(Array2<f64>, Array2<f64>)> {
    p.require_nonzero()?;
    let d = p.dim();
    let p2 = p.norm_squared();
    let c = p.components();
    let mut pt = Array2::zeros((d, d));
    let mut pl = Array2::zeros((d, d));
    for m in 0..d {
        for n in 0..d {
            let long = c[m] * c[n] / p2;
            pl[[m, n]] = long;
            pt[[m, n]] = if m == n { 1.0 - long } else { -long };
        }
    }
    Ok((pt, pl))
}

/// Splits a symmetric matrix M = pt·PT + pl·PL into its two coefficients.
///
/// Only meaningful for matrices that are isotropic within the transverse
/// subspace (as every rotation-covariant rank-2 amplitude is); the split is
/// exact for those.
pub fn transverse_longitudinal_split(m: &Array2<f64>, p: &Momentum) -> Result<(f64, f64)> {
    let (pt, pl) = vector_projectors(p)?;
    let d = p.dim();
    if m.shape() != [d, d] {
        return Err(Error::DimensionMismatch(format!(
            "matrix shape {:?} does not match momentum dimension {d}",
            m.shape()
        )));
    }
    let dot = |a: &Array2<f64>| -> f64 { a.iter().zip(m.iter()).map(|(x, y)| x * y).sum() };
    Ok((dot(&pt) / (d as f64 - 1.0), dot(&pl)))
}

/// Builds one of the six tensor projectors for momentum `p`.
pub fn tensor_projector(name: ProjectorName, p: &Momentum) -> Result<SymPairTensor> {
    let (pt, pl) = vector_projectors(p)?;
    let d = p.dim();
    let dm1 = d as f64 - 1.0;
    let sq = dm1.sqrt();
    let mut t = Array4::zeros((d, d, d, d));
    for m in 0..d {
        for n in 0..d {
            for a in 0..d {
                for b in 0..d {
                    t[[m, n, a, b]] = match name {
                        ProjectorName::P2 => {
                            0.5 * (pt[[m, a]] * pt[[n, b]] + pt[[m, b]] * pt[[n, a]])
                                - pt[[m, n]] * pt[[a, b]] / dm1
                        }
                        ProjectorName::P1 => {
                            0.5 * (pt[[m, a]] * pl[[n, b]]
                                + pt[[m, b]] * pl[[n, a]]
                                + pt[[n, a]] * pl[[m, b]]
                                + pt[[n, b]] * pl[[m, a]])
                        }
                        ProjectorName::S => pt[[m, n]] * pt[[a, b]] / dm1,
                        ProjectorName::SSigma => pt[[m, n]] * pl[[a, b]] / sq,
                        ProjectorName::SigmaS => pl[[m, n]] * pt[[a, b]] / sq,
                        ProjectorName::Sigma => pl[[m, n]] * pl[[a, b]],
                    };
                }
            }
        }
    }
    Ok(SymPairTensor { d, components: t })
}

/// Squared pair-metric norm ⟨P_i, P_i⟩ of each projector. The idempotent
/// four have norm equal to their trace; the mixers have norm 1.
fn gram_diagonal(name: ProjectorName, d: usize) -> f64 {
    let df = d as f64;
    match name {
        ProjectorName::P2 => (df + 1.0) * (df - 2.0) / 2.0,
        ProjectorName::P1 => df - 1.0,
        _ => 1.0,
    }
}

/// Decomposes a pair-symmetric tensor onto the projector basis.
///
/// Coefficients are extracted with the pair-metric inner product against the
/// diagonal Gram matrix; the residual is whatever the six projectors do not
/// span. In d = 2 the spin-2 slot is absent and four projectors plus the two
/// mixers carry the whole span.
pub fn decompose(t: &SymPairTensor, p: &Momentum) -> Result<ProjectorCoefficients> {
    p.require_nonzero()?;
    if t.d() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "tensor dimension {} does not match momentum dimension {}",
            t.d(),
            p.dim()
        )));
    }
    let d = t.d();
    let mut coeffs = [0.0f64; 6];
    let mut residual = t.clone();
    for (i, name) in ProjectorName::ALL.into_iter().enumerate() {
        if d == 2 && name == ProjectorName::P2 {
            continue;
        }
        let proj = tensor_projector(name, p)?;
        let c = proj.inner(t) / gram_diagonal(name, d);
        coeffs[i] = c;
        residual = residual.sub(&proj.scaled(c));
    }
    Ok(ProjectorCoefficients {
        c2: if d == 2 { None } else { Some(coeffs[0]) },
        c1: coeffs[1],
        c_s: coeffs[2],
        c_s_sigma: coeffs[3],
        c_sigma_s: coeffs[4],
        c_sigma: coeffs[5],
        residual_norm: residual.frobenius_norm(),
    })
}

/// Assembles c2·P_2 + c1·P_1 + c_S·P_S + c_Sσ·P_Sσ + c_σS·P_σS + c_σ·P_σ.
///
/// An absent spin-2 slot contributes nothing (its projector is zero in d = 2
/// anyway).
pub fn combine(coeffs: &ProjectorCoefficients, p: &Momentum) -> Result<SymPairTensor> {
    let d = p.dim();
    let mut acc = SymPairTensor::zeros(d);
    let weights = [
        coeffs.c2.unwrap_or(0.0),
        coeffs.c1,
        coeffs.c_s,
        coeffs.c_s_sigma,
        coeffs.c_sigma_s,
        coeffs.c_sigma,
    ];
    for (name, w) in ProjectorName::ALL.into_iter().zip(weights) {
        if w != 0.0 {
            acc = acc.add(&tensor_projector(name, p)?.scaled(w));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_momentum(d: usize, rng: &mut ChaCha8Rng) -> Momentum {
        loop {
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = Momentum::new(c).unwrap();
            if m.norm_squared() > 0.1 {
                return m;
            }
        }
    }

    #[test]
    fn vector_projectors_complete_and_transverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2usize, 3, 4, 6] {
            let p = test_momentum(d, &mut rng);
            let (pt, pl) = vector_projectors(&p).unwrap();
            for m in 0..d {
                // PT p = 0 and PL p = p.
                let tp: f64 = (0..d).map(|n| pt[[m, n]] * p.components()[n]).sum();
                let lp: f64 = (0..d).map(|n| pl[[m, n]] * p.components()[n]).sum();
                assert_abs_diff_eq!(tp, 0.0, epsilon = 1e-14);
                assert_relative_eq!(lp, p.components()[m], max_relative = 1e-13, epsilon = 1e-14);
                for n in 0..d {
                    let want = if m == n { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(pt[[m, n]] + pl[[m, n]], want, epsilon = 1e-14);
                }
            }
            let tr_t: f64 = (0..d).map(|m| pt[[m, m]]).sum();
            let tr_l: f64 = (0..d).map(|m| pl[[m, m]]).sum();
            assert_relative_eq!(tr_t, (d - 1) as f64, max_relative = 1e-13);
            assert_relative_eq!(tr_l, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn zero_momentum_is_rejected() {
        let p = Momentum::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(vector_projectors(&p), Err(Error::Domain(_))));
        assert!(matches!(
            tensor_projector(ProjectorName::S, &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn idempotency_and_mixer_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [3usize, 4, 6] {
            let p = test_momentum(d, &mut rng);
            for name in [
                ProjectorName::P2,
                ProjectorName::P1,
                ProjectorName::S,
                ProjectorName::Sigma,
            ] {
                let proj = tensor_projector(name, &p).unwrap();
                let sq = proj.compose(&proj);
                assert!(
                    sq.sub(&proj).frobenius_norm() <= 1e-13,
                    "P_{name}² ≠ P_{name} at d = {d}"
                );
            }
            // (P_Sσ + P_σS)² = P_S + P_σ.
            let mix = tensor_projector(ProjectorName::SSigma, &p)
                .unwrap()
                .add(&tensor_projector(ProjectorName::SigmaS, &p).unwrap());
            let want = tensor_projector(ProjectorName::S, &p)
                .unwrap()
                .add(&tensor_projector(ProjectorName::Sigma, &p).unwrap());
            assert!(mix.compose(&mix).sub(&want).frobenius_norm() <= 1e-13);
        }
    }

    #[test]
    fn idempotents_sum_to_the_pair_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2usize, 3, 4, 6] {
            let p = test_momentum(d, &mut rng);
            let mut sum = SymPairTensor::zeros(d);
            for name in [
                ProjectorName::P2,
                ProjectorName::P1,
                ProjectorName::S,
                ProjectorName::Sigma,
            ] {
                sum = sum.add(&tensor_projector(name, &p).unwrap());
            }
            let id = SymPairTensor::identity(d);
            assert!(sum.sub(&id).frobenius_norm() <= 1e-13, "completeness at d = {d}");
        }
    }

    #[test]
    fn pair_traces_take_their_counting_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2usize, 3, 4, 6] {
            let df = d as f64;
            let p = test_momentum(d, &mut rng);
            let tr = |name| tensor_projector(name, &p).unwrap().pair_trace();
            assert_relative_eq!(
                tr(ProjectorName::P2),
                (df + 1.0) * (df - 2.0) / 2.0,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
            // The four cross terms of P_1 give two copies of tr PT · tr PL
            // structure: P_1^{μν,μν} = tr(PT)·tr(PL)·… collapses to d − 1
            // because PT PL = 0 kills the mixed contractions.
            assert_relative_eq!(tr(ProjectorName::P1), df - 1.0, max_relative = 1e-12);
            assert_relative_eq!(tr(ProjectorName::S), 1.0, max_relative = 1e-12);
            assert_relative_eq!(tr(ProjectorName::Sigma), 1.0, max_relative = 1e-12);
            assert_abs_diff_eq!(tr(ProjectorName::SSigma), 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(tr(ProjectorName::SigmaS), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn distinct_projectors_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for d in [3usize, 4, 6] {
            let p = test_momentum(d, &mut rng);
            let projs: Vec<SymPairTensor> = ProjectorName::ALL
                .iter()
                .map(|&n| tensor_projector(n, &p).unwrap())
                .collect();
            for i in 0..6 {
                for j in 0..6 {
                    if i == j {
                        continue;
                    }
                    // The only nonzero off-diagonal pairings would couple a
                    // mixer to itself; all distinct pairs must vanish.
                    assert_abs_diff_eq!(projs[i].inner(&projs[j]), 0.0, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn decompose_identity_and_basis_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = 4;
        let p = test_momentum(d, &mut rng);
        let id = SymPairTensor::identity(d);
        let c = decompose(&id, &p).unwrap();
        assert_relative_eq!(c.c2.unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.c1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.c_s, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(c.c_s_sigma, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.c_sigma_s, 0.0, epsilon = 1e-13);
        assert_relative_eq!(c.c_sigma, 1.0, max_relative = 1e-12);
        assert!(c.residual_norm <= 1e-13);

        let ps = tensor_projector(ProjectorName::S, &p).unwrap();
        let c = decompose(&ps, &p).unwrap();
        assert_abs_diff_eq!(c.c2.unwrap(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.c1, 0.0, epsilon = 1e-13);
        assert_relative_eq!(c.c_s, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(c.c_sigma, 0.0, epsilon = 1e-13);
        assert!(c.residual_norm <= 1e-13);
    }

    #[test]
    fn rank2_split_recovers_its_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let d = 4;
        let p = test_momentum(d, &mut rng);
        let (pt, pl) = vector_projectors(&p).unwrap();
        let m = &pt * 0.7 + &pl * (-0.3);
        let (t, l) = transverse_longitudinal_split(&m, &p).unwrap();
        assert_relative_eq!(t, 0.7, max_relative = 1e-13);
        assert_relative_eq!(l, -0.3, max_relative = 1e-13);
    }

    #[test]
    fn d2_reports_the_spin2_slot_as_absent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = test_momentum(2, &mut rng);
        // P_2 vanishes identically in d = 2.
        let p2 = tensor_projector(ProjectorName::P2, &p).unwrap();
        assert!(p2.frobenius_norm() <= 1e-14);
        let id = SymPairTensor::identity(2);
        let c = decompose(&id, &p).unwrap();
        assert!(c.c2.is_none());
        assert!(matches!(c.c2(), Err(Error::SingularGram(_))));
        // The remaining projectors still resolve the identity completely.
        assert_relative_eq!(c.c1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.c_s, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.c_sigma, 1.0, max_relative = 1e-12);
        assert!(c.residual_norm <= 1e-13);
    }

    #[test]
    fn asymmetric_arrays_are_rejected() {
        let mut raw = Array4::zeros((3, 3, 3, 3));
        raw[[0, 1, 0, 0]] = 1.0; // no matching (1,0) entry
        assert!(matches!(
            SymPairTensor::from_array(raw.clone()),
            Err(Error::Domain(_))
        ));
        // Symmetrizing first makes the same data acceptable.
        assert!(SymPairTensor::pair_symmetrized(&raw).is_ok());
    }

    #[test]
    fn decomposition_is_rotation_invariant() {
        use nalgebra::DMatrix;
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let d = 4;
        let p = test_momentum(d, &mut rng);
        let coeffs_in = [0.8, -1.3, 0.4, 0.9, -0.2, 1.7];
        let t = combine(
            &ProjectorCoefficients {
                c2: Some(coeffs_in[0]),
                c1: coeffs_in[1],
                c_s: coeffs_in[2],
                c_s_sigma: coeffs_in[3],
                c_sigma_s: coeffs_in[4],
                c_sigma: coeffs_in[5],
                residual_norm: 0.0,
            },
            &p,
        )
        .unwrap();

        // Random orthogonal matrix from a QR factorization.
        let raw = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0f64));
        let q = raw.qr().q();
        let rot = |i: usize, j: usize| q[(i, j)];

        let mut tr = Array4::zeros((d, d, d, d));
        for m in 0..d {
            for n in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let mut acc = 0.0;
                        for mm in 0..d {
                            for nn in 0..d {
                                for aa in 0..d {
                                    for bb in 0..d {
                                        acc += rot(m, mm)
                                            * rot(n, nn)
                                            * rot(a, aa)
                                            * rot(b, bb)
                                            * t.array()[[mm, nn, aa, bb]];
                                    }
                                }
                            }
                        }
                        tr[[m, n, a, b]] = acc;
                    }
                }
            }
        }
        let p_rot: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| rot(i, j) * p.components()[j]).sum())
            .collect();
        let c_orig = decompose(&t, &p).unwrap();
        let c_rot = decompose(
            &SymPairTensor::from_array(tr).unwrap(),
            &Momentum::new(p_rot).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(c_orig.c2.unwrap(), c_rot.c2.unwrap(), max_relative = 1e-12);
        assert_relative_eq!(c_orig.c1, c_rot.c1, max_relative = 1e-12);
        assert_relative_eq!(c_orig.c_s, c_rot.c_s, max_relative = 1e-12);
        assert_relative_eq!(c_orig.c_s_sigma, c_rot.c_s_sigma, max_relative = 1e-12);
        assert_relative_eq!(c_orig.c_sigma_s, c_rot.c_sigma_s, max_relative = 1e-12);
        assert_relative_eq!(c_orig.c_sigma, c_rot.c_sigma, max_relative = 1e-12);
        assert!(c_rot.residual_norm <= 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn random_combinations_round_trip(
            seed in any::<u64>(),
            which_d in 0usize..3,
            w in proptest::array::uniform6(-2.0f64..2.0),
        ) {
            let d = [3usize, 4, 6][which_d];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = test_momentum(d, &mut rng);
            let coeffs = ProjectorCoefficients {
                c2: Some(w[0]),
                c1: w[1],
                c_s: w[2],
                c_s_sigma: w[3],
                c_sigma_s: w[4],
                c_sigma: w[5],
                residual_norm: 0.0,
            };
            let t = combine(&coeffs, &p).unwrap();
            let back = decompose(&t, &p).unwrap();
            prop_assert!((back.c2.unwrap() - w[0]).abs() <= 1e-12);
            prop_assert!((back.c1 - w[1]).abs() <= 1e-12);
            prop_assert!((back.c_s - w[2]).abs() <= 1e-12);
            prop_assert!((back.c_s_sigma - w[3]).abs() <= 1e-12);
            prop_assert!((back.c_sigma_s - w[4]).abs() <= 1e-12);
            prop_assert!((back.c_sigma - w[5]).abs() <= 1e-12);
            prop_assert!(back.residual_norm <= 1e-12);
        }
    }
}
