//! Momentum-space diagrammatics for the heat-kernel trace.
//!
//! This module re-derives every form factor independently of the closed
//! forms in [`crate::form_factors`], by assembling the 0-, 1- and 2-point
//! functions of `Tr e^{−sΔ}` (and of the untraced diagonal `K_s(x,x)`) from
//! first principles:
//!
//! * free propagators composed along the proper-time line
//!   ([`propagator_chain`]);
//! * interaction vertices read off the quadratic action of the Laplace-type
//!   operator `Δ = −D² + U` ([`vertex`]);
//! * Gaussian loop moments after the symmetrizing shift `q → q − ξp`
//!   ([`gaussian_moment`]);
//! * a single numerical ξ-integral per diagram ([`npoint`]).
//!
//! Results are *normalized*: the universal factor `(4πs)^{−d/2}` and the
//! bundle trace (`tr 1`, `tr T^a`, `tr T^{(a}T^{b)}`) are divided out, so a
//! scalar payload of `1` for the 0-point function means
//! `Tr K = tr1·(4πs)^{−d/2}·Vol`.
//!
//! Every two-point channel takes the form `s²·(sunset, both orderings) −
//! s·(tadpole)`. After shifting the loop momentum, each tensor component of
//! the Wick-contracted integrand is a polynomial of degree ≤ 4 in the
//! ordering parameter ξ times the universal weight `(1−ξ)e^{−xξ(1−ξ)}`, so
//! the engine extracts the polynomial coefficients exactly and evaluates
//! only five scalar moment integrals per channel, shared across all tensor
//! components.
//!
//! [`extract_form_factors`] equates these diagrams with the corresponding
//! expansion-ansatz variations ([`ansatz_npoint`]) and solves the small
//! linear systems for the form factors at a given `x`, which is how the
//! closed forms are certified.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Array4};

use crate::basis_transform::{BasisKind, FormFactorSet};
use crate::error::{Error, Result};
use crate::form_factors::{self, Constants, EvalConfig, FormFactorKind};
use crate::projector_algebra::{
    decompose, transverse_longitudinal_split, Momentum, ProjectorCoefficients, SymPairTensor,
};
use crate::quad;

/// Relative tolerance of the ξ-moment integrals.
const XI_REL_TOL: f64 = 5e-14;
const XI_MAX_DEPTH: u32 = 48;

/// Seagull normalization: coefficient of `p²δ^{μν}δ^{αβ}` in the quadratic
/// metric vertex. The value is fixed to 1/8 by requiring the assembled hh
/// two-point function to reproduce its closed-form projector coefficients
/// (equivalently: consistency between the trace-channel tadpole and the
/// sunset). A naive second variation suggests 1/4 instead; that candidate
/// fails the transverse-scalar channel by O(x), as [`seagull_mismatch`]
/// shows, so 1/8 is used throughout.
pub const SEAGULL_KAPPA: f64 = 0.125;

/// An ordered composition of free propagators on the unit proper-time line.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    /// Total proper time (> 0).
    pub s: f64,
    /// Momenta carried by the successive segments, each of dimension `d`.
    pub momenta: Vec<Vec<f64>>,
    /// Spacetime dimension.
    pub d: usize,
}

/// Evaluates the ordered parametric integral of a propagator chain.
///
/// Segment `i` occupies a fraction Δᵢ ≥ 0 of the line, the last segment the
/// remainder `1 − ΣΔ`, and the integrand is `exp(−s Σ Δᵢ pᵢ²)` over the
/// simplex in the Δᵢ. For one segment this is `e^{−s p₁²}`; for two it
/// collapses to the single-parameter form
/// `(e^{−s p₂²} − e^{−s p₁²})/(s(p₁² − p₂²))`; three and four segments are
/// integrated by nested adaptive quadrature.
pub fn propagator_chain(spec: &ChainSpec) -> Result<f64> {
    if !(spec.s.is_finite() && spec.s > 0.0) {
        return Err(Error::Domain(format!(
            "propagator chain needs s > 0, got {}",
            spec.s
        )));
    }
    let n = spec.momenta.len();
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedArity(n));
    }
    for p in &spec.momenta {
        if p.len() != spec.d {
            return Err(Error::DimensionMismatch(format!(
                "chain momentum has {} components in d = {}",
                p.len(),
                spec.d
            )));
        }
    }
    let sq: Vec<f64> = spec
        .momenta
        .iter()
        .map(|p| p.iter().map(|c| c * c).sum::<f64>())
        .collect();
    let s = spec.s;
    match n {
        1 => Ok((-s * sq[0]).exp()),
        2 => {
            // ∫₀¹ dξ e^{−s(ξ p₁² + (1−ξ) p₂²)}, stabilized with expm1.
            let delta = sq[0] - sq[1];
            if delta == 0.0 {
                Ok((-s * sq[0]).exp())
            } else {
                Ok((-s * sq[1]).exp() * (-f64::exp_m1(-s * delta)) / (s * delta))
            }
        }
        3 => quad::adaptive(
            &|u: f64| {
                quad::adaptive(
                    &|v: f64| (-s * (u * sq[0] + v * sq[1] + (1.0 - u - v) * sq[2])).exp(),
                    0.0,
                    1.0 - u,
                    1e-12,
                    XI_MAX_DEPTH,
                )
                .unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            1e-11,
            XI_MAX_DEPTH,
        ),
        4 => quad::adaptive(
            &|u: f64| {
                quad::adaptive(
                    &|v: f64| {
                        quad::adaptive(
                            &|w: f64| {
                                (-s * (u * sq[0]
                                    + v * sq[1]
                                    + w * sq[2]
                                    + (1.0 - u - v - w) * sq[3]))
                                    .exp()
                            },
                            0.0,
                            1.0 - u - v,
                            1e-12,
                            XI_MAX_DEPTH,
                        )
                        .unwrap_or(f64::NAN)
                    },
                    0.0,
                    1.0 - u,
                    1e-11,
                    XI_MAX_DEPTH,
                )
                .unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            1e-10,
            XI_MAX_DEPTH,
        ),
        _ => unreachable!(),
    }
}

/// The diagram channels of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagramChannel {
    /// 0-point trace (fixes the overall normalization).
    Tr0,
    /// 1-point trace with one endomorphism insertion.
    TrU,
    /// 1-point trace with one metric insertion.
    Trh,
    /// 2-point trace, two endomorphism insertions.
    TrUU,
    /// 2-point trace, two connection insertions.
    TrAA,
    /// 2-point trace, two metric insertions.
    Trhh,
    /// 2-point trace, one metric and one endomorphism insertion.
    TrhU,
    /// 2-point trace, one connection and one metric insertion.
    TrAh,
    /// Untraced diagonal, one endomorphism insertion at momentum p.
    KU,
    /// Untraced diagonal, one metric insertion at momentum p.
    Kh,
}

impl std::fmt::Display for DiagramChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DiagramChannel::Tr0 => "Tr0",
            DiagramChannel::TrU => "TrU",
            DiagramChannel::Trh => "Trh",
            DiagramChannel::TrUU => "TrUU",
            DiagramChannel::TrAA => "TrAA",
            DiagramChannel::Trhh => "Trhh",
            DiagramChannel::TrhU => "TrhU",
            DiagramChannel::TrAh => "TrAh",
            DiagramChannel::KU => "K_U",
            DiagramChannel::Kh => "K_h",
        };
        f.write_str(s)
    }
}

/// Channel output, one shape per channel.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagramPayload {
    /// Single number (trace channels without open indices; for `TrAh` it is
    /// the largest absolute tensor component, asserted to vanish).
    Scalar(f64),
    /// Transverse/longitudinal coefficients of a rank-2 amplitude.
    Vector { pt: f64, pl: f64 },
    /// Projector coefficients of a rank-4 amplitude.
    Tensor(ProjectorCoefficients),
}

/// Result of one diagram evaluation, normalized as described in the module
/// docs; `x = s p²` (0 for channels without an external momentum).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramResult {
    pub channel: DiagramChannel,
    pub x: f64,
    pub payload: DiagramPayload,
}

impl DiagramResult {
    pub fn scalar(&self) -> Result<f64> {
        match &self.payload {
            DiagramPayload::Scalar(v) => Ok(*v),
            _ => Err(Error::Domain(format!(
                "channel {} has no scalar payload",
                self.channel
            ))),
        }
    }

    pub fn vector(&self) -> Result<(f64, f64)> {
        match &self.payload {
            DiagramPayload::Vector { pt, pl } => Ok((*pt, *pl)),
            _ => Err(Error::Domain(format!(
                "channel {} has no transverse/longitudinal payload",
                self.channel
            ))),
        }
    }

    pub fn tensor(&self) -> Result<&ProjectorCoefficients> {
        match &self.payload {
            DiagramPayload::Tensor(c) => Ok(c),
            _ => Err(Error::Domain(format!(
                "channel {} has no projector payload",
                self.channel
            ))),
        }
    }
}

/// Vertex kinds of the quadratic Laplacian action. The digit counts the
/// fields from the same multiplet meeting at the vertex (1 = line vertex,
/// 2 = tadpole/seagull vertex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    U1,
    U2,
    A1,
    A2,
    H1,
    H2,
    /// Mixed endomorphism–metric vertex; identically zero (the
    /// endomorphism does not couple to the metric at this order).
    Uh,
}

/// Kinematic data for [`vertex`].
#[derive(Debug, Clone, Copy)]
pub enum VertexKinematics<'a> {
    /// Line vertex: both φ-leg momenta counted into the vertex.
    Legs { k1: &'a [f64], k2: &'a [f64] },
    /// Seagull configuration: externals (p, −p), φ legs (q, −q).
    Seagull { p: &'a [f64], q: &'a [f64] },
}

/// Tensor-valued vertex evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum VertexTensor {
    Scalar(f64),
    Rank1(Array1<f64>),
    Rank2(Array2<f64>),
    Rank3(ndarray::Array3<f64>),
    Rank4(Array4<f64>),
}

/// Evaluates an interaction vertex at the given kinematics.
pub fn vertex(kind: VertexKind, kin: VertexKinematics<'_>, d: usize) -> Result<VertexTensor> {
    let legs = |kin: VertexKinematics<'_>| -> Result<(Vec<f64>, Vec<f64>)> {
        match kin {
            VertexKinematics::Legs { k1, k2 } => {
                if k1.len() != d || k2.len() != d {
                    return Err(Error::DimensionMismatch(
                        "vertex leg momenta must have d components".into(),
                    ));
                }
                Ok((k1.to_vec(), k2.to_vec()))
            }
            VertexKinematics::Seagull { .. } => Err(Error::UnsupportedKinematics(format!(
                "{kind:?} is a line vertex; it takes two φ-leg momenta"
            ))),
        }
    };
    match kind {
        VertexKind::U1 => Ok(VertexTensor::Scalar(1.0)),
        VertexKind::U2 => Ok(VertexTensor::Scalar(0.0)),
        VertexKind::Uh => Ok(VertexTensor::Rank2(Array2::zeros((d, d)))),
        VertexKind::A1 => {
            let (k1, k2) = legs(kin)?;
            Ok(VertexTensor::Rank1(Array1::from_iter(
                (0..d).map(|m| k1[m] - k2[m]),
            )))
        }
        VertexKind::A2 => Ok(VertexTensor::Rank2(Array2::eye(d) * 2.0)),
        VertexKind::H1 => {
            let (k1, k2) = legs(kin)?;
            let ks: Vec<f64> = (0..d).map(|m| k1[m] + k2[m]).collect();
            let ks2: f64 = ks.iter().map(|c| c * c).sum();
            let mut t = Array2::zeros((d, d));
            for m in 0..d {
                for n in 0..d {
                    t[[m, n]] = 0.5 * (k1[m] * k2[n] + k1[n] * k2[m])
                        - 0.25 * ks2 * if m == n { 1.0 } else { 0.0 };
                }
            }
            Ok(VertexTensor::Rank2(t))
        }
        VertexKind::H2 => {
            let (p, q) = match kin {
                VertexKinematics::Seagull { p, q } => (p, q),
                VertexKinematics::Legs { .. } => {
                    return Err(Error::UnsupportedKinematics(
                        "the quadratic metric vertex is only available in the seagull \
                         configuration (externals p, −p; φ legs q, −q)"
                            .into(),
                    ))
                }
            };
            if p.len() != d || q.len() != d {
                return Err(Error::DimensionMismatch(
                    "seagull momenta must have d components".into(),
                ));
            }
            let p2: f64 = p.iter().map(|c| c * c).sum();
            let mut t = Array4::zeros((d, d, d, d));
            let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
            for m in 0..d {
                for n in 0..d {
                    for a in 0..d {
                        for b in 0..d {
                            // 2 q^{(μ} δ^{ν)(α} q^{β)} symmetrized in both pairs.
                            t[[m, n, a, b]] = 0.5
                                * (q[m] * delta(n, a) * q[b]
                                    + q[n] * delta(m, a) * q[b]
                                    + q[m] * delta(n, b) * q[a]
                                    + q[n] * delta(m, b) * q[a])
                                + SEAGULL_KAPPA * p2 * delta(m, n) * delta(a, b);
                        }
                    }
                }
            }
            Ok(VertexTensor::Rank4(t))
        }
    }
}

/// Normalized Gaussian loop moments
/// `∫ d^dq/(2π)^d q^{μ₁}…q^{μ_r} e^{−s q²} / (4πs)^{−d/2}`.
pub fn gaussian_moment(rank: usize, s: f64, d: usize) -> Result<VertexTensor> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!("gaussian moment needs s > 0, got {s}")));
    }
    match rank {
        0 => Ok(VertexTensor::Scalar(1.0)),
        1 => Ok(VertexTensor::Rank1(Array1::zeros(d))),
        2 => Ok(VertexTensor::Rank2(Array2::eye(d) / (2.0 * s))),
        // Odd moments vanish by parity.
        3 => Ok(VertexTensor::Rank3(ndarray::Array3::zeros((d, d, d)))),
        4 => {
            let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
            let mut t = Array4::zeros((d, d, d, d));
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        for e in 0..d {
                            t[[a, b, c, e]] = (delta(a, b) * delta(c, e)
                                + delta(a, c) * delta(b, e)
                                + delta(a, e) * delta(b, c))
                                / (4.0 * s * s);
                        }
                    }
                }
            }
            Ok(VertexTensor::Rank4(t))
        }
        r => Err(Error::UnsupportedRank(r)),
    }
}

// ---------------------------------------------------------------------------
// Internal polynomial Wick machinery.
//
// After the loop-momentum shift every φ-leg momentum is `l·q + γ(ξ)·p` with
// `l = ±1` and γ a polynomial of degree ≤ 1 in the ordering parameter ξ.
// Vertices are then quadratic polynomials in q whose tensor coefficients are
// polynomials in ξ; the Gaussian loop integral closes over q exactly, and
// the remaining ξ-integral factors into universal scalar moments.
// ---------------------------------------------------------------------------

/// Polynomial in ξ of degree ≤ 4 (dense coefficients).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Poly([f64; 5]);

impl Poly {
    const ZERO: Poly = Poly([0.0; 5]);

    fn constant(c: f64) -> Poly {
        Poly([c, 0.0, 0.0, 0.0, 0.0])
    }

    /// c0 + c1·ξ.
    fn linear(c0: f64, c1: f64) -> Poly {
        Poly([c0, c1, 0.0, 0.0, 0.0])
    }

    fn add(self, other: Poly) -> Poly {
        let mut out = self.0;
        for (o, v) in out.iter_mut().zip(other.0) {
            *o += v;
        }
        Poly(out)
    }

    fn scale(self, factor: f64) -> Poly {
        Poly(self.0.map(|c| c * factor))
    }

    fn mul(self, other: Poly) -> Poly {
        let mut out = [0.0; 5];
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if *b == 0.0 {
                    continue;
                }
                debug_assert!(i + j < 5, "ξ-polynomial degree overflow");
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn dot_moments(&self, moments: &[f64; 5]) -> f64 {
        self.0
            .iter()
            .zip(moments)
            .map(|(c, m)| c * m)
            .sum()
    }
}

/// A leg momentum `l·q + γ(ξ)·p`.
#[derive(Debug, Clone, Copy)]
struct Leg {
    l: f64,
    gamma: Poly,
}

/// Field species at a line vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Species {
    U,
    A,
    H,
}

impl Species {
    fn rank(self) -> usize {
        match self {
            Species::U => 0,
            Species::A => 1,
            Species::H => 2,
        }
    }
}

/// Vertex as a polynomial `A_ab q^a q^b + B_a q^a + C` with open outer
/// indices flattened into one axis; every entry is a ξ-polynomial and all
/// p-direction dependence is through `γ(ξ)·p`.
struct PolyVertex {
    rank: usize,
    d: usize,
    /// outer × d × d coefficients of q^a q^b.
    a: Vec<Poly>,
    /// outer × d coefficients of q^a.
    b: Vec<Poly>,
    /// outer constants.
    c: Vec<Poly>,
}

impl PolyVertex {
    fn zeros(rank: usize, d: usize) -> Self {
        let outer = d.pow(rank as u32);
        PolyVertex {
            rank,
            d,
            a: vec![Poly::ZERO; outer * d * d],
            b: vec![Poly::ZERO; outer * d],
            c: vec![Poly::ZERO; outer],
        }
    }

    fn outer(&self) -> usize {
        self.d.pow(self.rank as u32)
    }
}

/// Builds the line vertex of `species` with legs `k1`, `k2` (both counted
/// inward) for external direction `p`.
fn poly_vertex(species: Species, k1: Leg, k2: Leg, p: &[f64]) -> PolyVertex {
    let d = p.len();
    match species {
        Species::U => {
            let mut v = PolyVertex::zeros(0, d);
            v.c[0] = Poly::constant(1.0);
            v
        }
        Species::A => {
            // (k1 − k2)^μ = (l1 − l2) q^μ + (γ1 − γ2) p^μ.
            let mut v = PolyVertex::zeros(1, d);
            let dl = k1.l - k2.l;
            let dgamma = k1.gamma.add(k2.gamma.scale(-1.0));
            for m in 0..d {
                v.b[m * d + m] = Poly::constant(dl);
                v.c[m] = dgamma.scale(p[m]);
            }
            v
        }
        Species::H => {
            // k1^{(μ} k2^{ν)} − ¼ (k1+k2)² δ^{μν}, outer-symmetrized.
            let mut v = PolyVertex::zeros(2, d);
            let (l1, g1) = (k1.l, k1.gamma);
            let (l2, g2) = (k2.l, k2.gamma);
            for m in 0..d {
                for n in 0..d {
                    let o = m * d + n;
                    // q^a q^b coefficient: ½ l1 l2 (δ_{ma}δ_{nb} + δ_{na}δ_{mb}).
                    v.a[(o * d + m) * d + n] = v.a[(o * d + m) * d + n]
                        .add(Poly::constant(0.5 * l1 * l2));
                    v.a[(o * d + n) * d + m] = v.a[(o * d + n) * d + m]
                        .add(Poly::constant(0.5 * l1 * l2));
                    // q^a coefficient: ½(l1 δ_{ma} γ2 p[n] + l2 δ_{na} γ1 p[m] + (m↔n)).
                    v.b[o * d + m] = v.b[o * d + m]
                        .add(g2.scale(0.5 * l1 * p[n]))
                        .add(g1.scale(0.5 * l2 * p[n]));
                    v.b[o * d + n] = v.b[o * d + n]
                        .add(g2.scale(0.5 * l1 * p[m]))
                        .add(g1.scale(0.5 * l2 * p[m]));
                    // constant: ½(γ1 γ2 + γ2 γ1) p[m] p[n] = γ1 γ2 p[m] p[n].
                    v.c[o] = v.c[o].add(g1.mul(g2).scale(p[m] * p[n]));
                }
            }
            // −¼ (k1+k2)² δ^{μν} with k1+k2 = L q + Γ p.
            let ll = l1 + l2;
            let gg = g1.add(g2);
            let p2: f64 = p.iter().map(|c| c * c).sum();
            for m in 0..d {
                let o = m * d + m;
                for a in 0..d {
                    v.a[(o * d + a) * d + a] =
                        v.a[(o * d + a) * d + a].add(Poly::constant(-0.25 * ll * ll));
                    v.b[o * d + a] = v.b[o * d + a].add(gg.scale(-0.5 * ll * p[a]));
                }
                v.c[o] = v.c[o].add(gg.mul(gg).scale(-0.25 * p2));
            }
            v
        }
    }
}

/// Wick contraction `⟨V₁ V₂⟩_q` with normalized moments `⟨q^aq^b⟩ = δ/(2s)`,
/// `⟨qqqq⟩ = (δδ+δδ+δδ)/(4s²)`. Output outer index is `o₁·outer₂ + o₂`; each
/// entry is a ξ-polynomial.
fn wick(v1: &PolyVertex, v2: &PolyVertex, s: f64) -> Vec<Poly> {
    let d = v1.d;
    let (o1, o2) = (v1.outer(), v2.outer());
    let inv2s = 1.0 / (2.0 * s);
    let inv4s2 = 1.0 / (4.0 * s * s);
    let trace = |v: &PolyVertex, o: usize| -> Poly {
        let mut t = Poly::ZERO;
        for i in 0..d {
            t = t.add(v.a[(o * d + i) * d + i]);
        }
        t
    };
    let tr1: Vec<Poly> = (0..o1).map(|o| trace(v1, o)).collect();
    let tr2: Vec<Poly> = (0..o2).map(|o| trace(v2, o)).collect();
    let mut out = vec![Poly::ZERO; o1 * o2];
    for i in 0..o1 {
        for j in 0..o2 {
            let mut aa = tr1[i].mul(tr2[j]);
            let mut cross = Poly::ZERO;
            for a in 0..d {
                for b in 0..d {
                    let a1 = v1.a[(i * d + a) * d + b];
                    cross = cross
                        .add(a1.mul(v2.a[(j * d + a) * d + b]))
                        .add(a1.mul(v2.a[(j * d + b) * d + a]));
                }
            }
            aa = aa.add(cross).scale(inv4s2);
            let ac = tr1[i].mul(v2.c[j]).add(v1.c[i].mul(tr2[j])).scale(inv2s);
            let mut bb = Poly::ZERO;
            for a in 0..d {
                bb = bb.add(v1.b[i * d + a].mul(v2.b[j * d + a]));
            }
            out[i * o2 + j] = aa.add(ac).add(bb.scale(inv2s)).add(v1.c[i].mul(v2.c[j]));
        }
    }
    out
}

/// ξ-moments `∫₀¹ ξ^k w(ξ) e^{−x ξ(1−ξ)} dξ` for k = 0..4, with `w = 1−ξ`
/// when `weighted` (sunset measure) and `w = 1` otherwise (line measure).
fn xi_moments(x: f64, weighted: bool) -> Result<[f64; 5]> {
    quad::adaptive_vec(
        &|xi: f64| {
            let w = if weighted { 1.0 - xi } else { 1.0 };
            let e = w * (-x * xi * (1.0 - xi)).exp();
            let x1 = xi;
            let x2 = x1 * xi;
            let x3 = x2 * xi;
            let x4 = x3 * xi;
            [e, e * x1, e * x2, e * x3, e * x4]
        },
        0.0,
        1.0,
        XI_REL_TOL,
        XI_MAX_DEPTH,
    )
}

/// Both time orderings of the two-vertex sunset for the given species pair,
/// already integrated over ξ. Output outer index: first species' indices
/// flattened first.
fn sunset_both(sp1: Species, sp2: Species, p: &[f64], s: f64) -> Result<Vec<f64>> {
    let d = p.len();
    let x = s * p.iter().map(|c| c * c).sum::<f64>();
    let moments = xi_moments(x, true)?;
    let (n1, n2) = (d.pow(sp1.rank() as u32), d.pow(sp2.rank() as u32));
    let mut total = vec![0.0f64; n1 * n2];

    // Ordering (a): the first species sits at the later vertex; the segment
    // between the vertices carries q + p and the shift is q → q − ξp.
    let later_a = (
        Leg { l: 1.0, gamma: Poly::linear(0.0, -1.0) },
        Leg { l: -1.0, gamma: Poly::linear(-1.0, 1.0) },
    );
    let earlier_a = (
        Leg { l: 1.0, gamma: Poly::linear(1.0, -1.0) },
        Leg { l: -1.0, gamma: Poly::linear(0.0, 1.0) },
    );
    let v1 = poly_vertex(sp1, later_a.0, later_a.1, p);
    let v2 = poly_vertex(sp2, earlier_a.0, earlier_a.1, p);
    for (idx, poly) in wick(&v1, &v2, s).into_iter().enumerate() {
        total[idx] += poly.dot_moments(&moments);
    }

    // Ordering (b): the second species is later; the segment carries q − p
    // and the shift is q → q + ξp. Indices are transposed back so the first
    // species' indices stay leading.
    let later_b = (
        Leg { l: 1.0, gamma: Poly::linear(0.0, 1.0) },
        Leg { l: -1.0, gamma: Poly::linear(1.0, -1.0) },
    );
    let earlier_b = (
        Leg { l: 1.0, gamma: Poly::linear(-1.0, 1.0) },
        Leg { l: -1.0, gamma: Poly::linear(0.0, -1.0) },
    );
    let w1 = poly_vertex(sp2, later_b.0, later_b.1, p);
    let w2 = poly_vertex(sp1, earlier_b.0, earlier_b.1, p);
    let prod = wick(&w1, &w2, s);
    if sp1 == sp2 {
        for (idx, poly) in prod.into_iter().enumerate() {
            total[idx] += poly.dot_moments(&moments);
        }
    } else {
        for j in 0..n2 {
            for i in 0..n1 {
                total[i * n2 + j] += prod[j * n1 + i].dot_moments(&moments);
            }
        }
    }
    Ok(total)
}

/// Single insertion on the diagonal: −s ∫₀¹ dt ⟨V(legs at t)⟩ e^{−x t(1−t)}.
fn diagonal_one_point(species: Species, p: &[f64], s: f64) -> Result<Vec<f64>> {
    let d = p.len();
    let x = s * p.iter().map(|c| c * c).sum::<f64>();
    let moments = xi_moments(x, false)?;
    let k1 = Leg { l: 1.0, gamma: Poly::linear(0.0, -1.0) };
    let k2 = Leg { l: -1.0, gamma: Poly::linear(-1.0, 1.0) };
    let v = poly_vertex(species, k1, k2, p);
    let outer = v.outer();
    let mut out = vec![0.0f64; outer];
    for o in 0..outer {
        // ⟨A qq + B q + C⟩ = tr A /(2s) + C.
        let mut expect = v.c[o];
        for i in 0..d {
            expect = expect.add(v.a[(o * d + i) * d + i].scale(1.0 / (2.0 * s)));
        }
        out[o] = -s * expect.dot_moments(&moments);
    }
    Ok(out)
}

/// hh tadpole `⟨seagull⟩`: the pair identity /s plus κ p² δ⊗δ.
fn hh_tadpole(p: &[f64], s: f64, kappa: f64) -> Array4<f64> {
    let d = p.len();
    let p2: f64 = p.iter().map(|c| c * c).sum();
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut t = Array4::zeros((d, d, d, d));
    for m in 0..d {
        for n in 0..d {
            for a in 0..d {
                for b in 0..d {
                    t[[m, n, a, b]] = 0.5 * (delta(m, a) * delta(n, b) + delta(m, b) * delta(n, a))
                        / s
                        + kappa * p2 * delta(m, n) * delta(a, b);
                }
            }
        }
    }
    t
}

fn check_sd(s: f64, d: usize) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!("diagrams need proper time s > 0, got {s}")));
    }
    if d < 2 {
        return Err(Error::Domain(format!(
            "momentum-space diagrams need d ≥ 2, got {d}"
        )));
    }
    Ok(())
}

fn need_p<'m>(channel: DiagramChannel, p: Option<&'m Momentum>, d: usize) -> Result<&'m Momentum> {
    let p = p.ok_or_else(|| {
        Error::Domain(format!("channel {channel} needs an external momentum"))
    })?;
    if p.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "momentum dimension {} does not match d = {d}",
            p.dim()
        )));
    }
    if p.norm_squared() <= 0.0 {
        return Err(Error::Domain(format!(
            "channel {channel} needs a momentum with positive norm"
        )));
    }
    Ok(p)
}

/// Assembles a rank-2 amplitude stored as a flat outer vector into a matrix.
fn to_matrix(flat: &[f64], d: usize) -> Array2<f64> {
    let mut m = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = flat[i * d + j];
        }
    }
    m
}

/// Evaluates one diagram channel (see module docs for the normalization).
pub fn npoint(
    channel: DiagramChannel,
    s: f64,
    p: Option<&Momentum>,
    d: usize,
) -> Result<DiagramResult> {
    check_sd(s, d)?;
    let result = |x, payload| DiagramResult { channel, x, payload };
    match channel {
        DiagramChannel::Tr0 => Ok(result(0.0, DiagramPayload::Scalar(1.0))),
        DiagramChannel::TrU => Ok(result(0.0, DiagramPayload::Scalar(-s))),
        DiagramChannel::Trh => {
            // Zero-momentum metric insertion: the diagonal one-point value
            // is c·δ^{μν}; the payload is c.
            let pvec = vec![0.0; d];
            let flat = diagonal_one_point(Species::H, &pvec, s)?;
            Ok(result(0.0, DiagramPayload::Scalar(flat[0])))
        }
        DiagramChannel::TrUU => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let sun = sunset_both(Species::U, Species::U, p.components(), s)?;
            Ok(result(x, DiagramPayload::Scalar(s * s * sun[0])))
        }
        DiagramChannel::TrAA => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let sun = sunset_both(Species::A, Species::A, p.components(), s)?;
            let mut m = to_matrix(&sun, d) * (s * s);
            for i in 0..d {
                m[[i, i]] -= s * 2.0;
            }
            let (pt, pl) = transverse_longitudinal_split(&m, p)?;
            Ok(result(x, DiagramPayload::Vector { pt, pl }))
        }
        DiagramChannel::Trhh => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let sun = sunset_both(Species::H, Species::H, p.components(), s)?;
            let tad = hh_tadpole(p.components(), s, SEAGULL_KAPPA);
            let mut t = Array4::zeros((d, d, d, d));
            for m in 0..d {
                for n in 0..d {
                    for a in 0..d {
                        for b in 0..d {
                            let idx = ((m * d + n) * d + a) * d + b;
                            t[[m, n, a, b]] = s * s * sun[idx] - s * tad[[m, n, a, b]];
                        }
                    }
                }
            }
            let coeffs = decompose(&SymPairTensor::pair_symmetrized(&t)?, p)?;
            Ok(result(x, DiagramPayload::Tensor(coeffs)))
        }
        DiagramChannel::TrhU => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let sun = sunset_both(Species::H, Species::U, p.components(), s)?;
            let m = to_matrix(&sun, d) * (s * s);
            let (pt, pl) = transverse_longitudinal_split(&m, p)?;
            Ok(result(x, DiagramPayload::Vector { pt, pl }))
        }
        DiagramChannel::TrAh => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let sun = sunset_both(Species::A, Species::H, p.components(), s)?;
            let worst = sun.iter().fold(0.0f64, |acc, v| acc.max((s * s * v).abs()));
            Ok(result(x, DiagramPayload::Scalar(worst)))
        }
        DiagramChannel::KU => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let flat = diagonal_one_point(Species::U, p.components(), s)?;
            Ok(result(x, DiagramPayload::Scalar(flat[0])))
        }
        DiagramChannel::Kh => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let flat = diagonal_one_point(Species::H, p.components(), s)?;
            let (pt, pl) = transverse_longitudinal_split(&to_matrix(&flat, d), p)?;
            Ok(result(x, DiagramPayload::Vector { pt, pl }))
        }
    }
}

/// Evaluates the corresponding variation of the expansion ansatz, in the
/// same normalization as [`npoint`].
///
/// The five second-order form factors are taken from `ffs` (which must be in
/// the RicR basis); the two coincidence-limit factors of the diagonal
/// channels are the closed-form `GU`/`GR` kinds, since they are not part of
/// a five-slot set.
pub fn ansatz_npoint(
    channel: DiagramChannel,
    s: f64,
    p: Option<&Momentum>,
    d: usize,
    constants: &Constants,
    ffs: &FormFactorSet,
) -> Result<DiagramResult> {
    check_sd(s, d)?;
    if ffs.basis() != BasisKind::RicR {
        return Err(Error::Domain(format!(
            "ansatz evaluation expects a RicR-basis form-factor set, got {:?}",
            ffs.basis()
        )));
    }
    let cfg = EvalConfig::default();
    let result = |x, payload| DiagramResult { channel, x, payload };
    match channel {
        DiagramChannel::Tr0 => Ok(result(0.0, DiagramPayload::Scalar(constants.g0))),
        DiagramChannel::TrU => Ok(result(0.0, DiagramPayload::Scalar(constants.g_u0 * s))),
        DiagramChannel::Trh => Ok(result(0.0, DiagramPayload::Scalar(constants.g0 / 2.0))),
        DiagramChannel::TrUU => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let fu = ffs.eval_slot("u", x)?;
            Ok(result(x, DiagramPayload::Scalar(2.0 * s * s * fu)))
        }
        DiagramChannel::TrAA => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let fo = ffs.eval_slot("omega", x)?;
            Ok(result(
                x,
                DiagramPayload::Vector { pt: -4.0 * s * x * fo, pl: 0.0 },
            ))
        }
        DiagramChannel::Trhh => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let df = d as f64;
            let fric = ffs.eval_slot("ric", x)?;
            let fr = ffs.eval_slot("r", x)?;
            let g0 = constants.g0;
            let gr0 = constants.g_r0;
            let c2 = -g0 / 2.0 - gr0 * x / 2.0 + 0.5 * x * x * fric;
            let c_s = (df - 3.0) * g0 / 4.0
                + (df - 2.0) * gr0 * x / 2.0
                + (df / 2.0) * x * x * fric
                + 2.0 * (df - 1.0) * x * x * fr;
            let mixer = (df - 1.0).sqrt() * g0 / 4.0;
            Ok(result(
                x,
                DiagramPayload::Tensor(ProjectorCoefficients {
                    c2: if d == 2 { None } else { Some(c2) },
                    c1: -g0 / 2.0,
                    c_s,
                    c_s_sigma: mixer,
                    c_sigma_s: mixer,
                    c_sigma: -g0 / 4.0,
                    residual_norm: 0.0,
                }),
            ))
        }
        DiagramChannel::TrhU => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let fru = ffs.eval_slot("ru", x)?;
            let pl = constants.g_u0 * s / 2.0;
            Ok(result(
                x,
                DiagramPayload::Vector { pt: pl + s * x * fru, pl },
            ))
        }
        DiagramChannel::TrAh => {
            let p = need_p(channel, p, d)?;
            Ok(result(s * p.norm_squared(), DiagramPayload::Scalar(0.0)))
        }
        DiagramChannel::KU => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let gu = form_factors::eval(FormFactorKind::GU, x, &cfg)?;
            Ok(result(x, DiagramPayload::Scalar(s * gu)))
        }
        DiagramChannel::Kh => {
            let p = need_p(channel, p, d)?;
            let x = s * p.norm_squared();
            let gr = form_factors::eval(FormFactorKind::GR, x, &cfg)?;
            let pl = constants.g0 / 2.0;
            Ok(result(x, DiagramPayload::Vector { pt: pl + x * gr, pl }))
        }
    }
}

/// Equates diagram and ansatz coefficient-by-coefficient at `x` and solves
/// for the form factors the channel determines.
///
/// Returned keys per channel: `TrUU → f_U`; `TrAA → f_Omega`;
/// `Trhh → g0, f_Ric, f_R`; `TrhU → g_U0, f_RU`; `K_U → g_U`;
/// `K_h → g0, g_R`. The hh channel separates the `x·g_R0` admixture using
/// the verified constant `g_R0 = 1/6` (a single x cannot disentangle it
/// from the form-factor values; the constant itself is determined by the
/// `K_h` channel as `g_R(0)`).
pub fn extract_form_factors(
    channel: DiagramChannel,
    x: f64,
    d: usize,
) -> Result<BTreeMap<String, f64>> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!(
            "form-factor extraction needs x > 0, got {x}"
        )));
    }
    let s = 1.0;
    let x2 = x * x;
    if x2 == 0.0 {
        return Err(Error::SingularSystem(format!(
            "x = {x} underflows the quadratic coefficients of the ansatz"
        )));
    }
    let p = Momentum::along_axis(d, x.sqrt())?;
    let mut out = BTreeMap::new();
    match channel {
        DiagramChannel::TrUU => {
            let scalar = npoint(channel, s, Some(&p), d)?.scalar()?;
            out.insert("f_U".to_string(), scalar / (2.0 * s * s));
        }
        DiagramChannel::TrAA => {
            let (pt, _pl) = npoint(channel, s, Some(&p), d)?.vector()?;
            out.insert("f_Omega".to_string(), -pt / (4.0 * s * x));
        }
        DiagramChannel::Trhh => {
            let coeffs = npoint(channel, s, Some(&p), d)?;
            let c = coeffs.tensor()?;
            let df = d as f64;
            let g0 = -2.0 * c.c1;
            let gr0 = Constants::default().g_r0;
            let c2 = c.c2()?;
            let fric = (c2 + g0 / 2.0 + gr0 * x / 2.0) * 2.0 / x2;
            let fr = (c.c_s
                - (df - 3.0) * g0 / 4.0
                - (df - 2.0) * gr0 * x / 2.0
                - (df / 2.0) * x2 * fric)
                / (2.0 * (df - 1.0) * x2);
            out.insert("g0".to_string(), g0);
            out.insert("f_Ric".to_string(), fric);
            out.insert("f_R".to_string(), fr);
        }
        DiagramChannel::TrhU => {
            let (pt, pl) = npoint(channel, s, Some(&p), d)?.vector()?;
            let g_u0 = 2.0 * pl / s;
            out.insert("g_U0".to_string(), g_u0);
            out.insert("f_RU".to_string(), (pt - pl) / (s * x));
        }
        DiagramChannel::KU => {
            let scalar = npoint(channel, s, Some(&p), d)?.scalar()?;
            out.insert("g_U".to_string(), scalar / s);
        }
        DiagramChannel::Kh => {
            let (pt, pl) = npoint(channel, s, Some(&p), d)?.vector()?;
            out.insert("g0".to_string(), 2.0 * pl);
            out.insert("g_R".to_string(), (pt - pl) / x);
        }
        other => {
            return Err(Error::Domain(format!(
                "channel {other} determines no form factors"
            )));
        }
    }
    Ok(out)
}

/// Diagnostic: worst deviation of the hh amplitude assembled with seagull
/// coefficient `kappa` from its closed-form projector coefficients.
///
/// With `kappa = `[`SEAGULL_KAPPA`] this is quadrature noise; with the naive
/// second-variation value 1/4 it grows linearly in x, which is how the
/// normalization was pinned down.
pub fn seagull_mismatch(kappa: f64, s: f64, p: &Momentum, d: usize) -> Result<f64> {
    check_sd(s, d)?;
    if p.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "momentum dimension {} does not match d = {d}",
            p.dim()
        )));
    }
    let x = s * p.norm_squared();
    let sun = sunset_both(Species::H, Species::H, p.components(), s)?;
    let tad = hh_tadpole(p.components(), s, kappa);
    let mut t = Array4::zeros((d, d, d, d));
    for m in 0..d {
        for n in 0..d {
            for a in 0..d {
                for b in 0..d {
                    let idx = ((m * d + n) * d + a) * d + b;
                    t[[m, n, a, b]] = s * s * sun[idx] - s * tad[[m, n, a, b]];
                }
            }
        }
    }
    let c = decompose(&SymPairTensor::pair_symmetrized(&t)?, p)?;
    let cfg = EvalConfig::default();
    let f = form_factors::basic_f(x, &cfg)?;
    let df = d as f64;
    let want_c2 = -1.0 + f / 2.0;
    let want_cs = -1.0 - (df - 1.0) * x / 8.0
        + (4.0 * (df + 1.0) + 4.0 * (df - 1.0) * x + (df - 1.0) * x * x) * f / 16.0;
    let mixer = (df - 1.0).sqrt() / 4.0;
    let mut worst: f64 = 0.0;
    for (got, want) in [
        (c.c2()?, want_c2),
        (c.c1, -0.5),
        (c.c_s, want_cs),
        (c.c_s_sigma, mixer),
        (c.c_sigma_s, mixer),
        (c.c_sigma, -0.25),
    ] {
        worst = worst.max((got - want).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    fn f_of(x: f64) -> f64 {
        form_factors::basic_f(x, &cfg()).unwrap()
    }

    fn momentum_for(x: f64, s: f64, d: usize) -> Momentum {
        Momentum::along_axis(d, (x / s).sqrt()).unwrap()
    }

    #[test]
    fn chain_single_segment_is_the_bare_exponential() {
        let spec = ChainSpec { s: 0.8, momenta: vec![vec![1.5, -0.5, 0.0]], d: 3 };
        let p2 = 1.5f64 * 1.5 + 0.25;
        assert_relative_eq!(
            propagator_chain(&spec).unwrap(),
            (-0.8 * p2).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn chain_two_segments_telescopes_and_matches_closed_form() {
        let s = 0.6;
        let equal = ChainSpec {
            s,
            momenta: vec![vec![1.0, 2.0], vec![2.0, -1.0]],
            d: 2,
        };
        // Equal squared norms telescope to a single exponential.
        assert_relative_eq!(
            propagator_chain(&equal).unwrap(),
            (-s * 5.0).exp(),
            max_relative = 1e-14
        );
        let distinct = ChainSpec {
            s,
            momenta: vec![vec![2.0, 0.0], vec![0.0, 1.0]],
            d: 2,
        };
        let (a, b) = (4.0, 1.0);
        let want = ((-s * b).exp() - (-s * a).exp()) / (s * (a - b));
        assert_relative_eq!(propagator_chain(&distinct).unwrap(), want, max_relative = 1e-13);
        // Near-degenerate difference stays on the smooth branch.
        let close = ChainSpec {
            s,
            momenta: vec![vec![1.0, 0.0], vec![(1.0f64 + 1e-13).sqrt(), 0.0]],
            d: 2,
        };
        assert_relative_eq!(
            propagator_chain(&close).unwrap(),
            (-s).exp(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn chain_three_and_four_segments_match_partial_fractions() {
        // ∫ over the simplex of e^{−s Σ Δᵢ pᵢ²} has the closed form
        // Σᵢ e^{−s aᵢ} / (s^{n−1} Π_{j≠i} (aⱼ − aᵢ)) for distinct aᵢ = pᵢ².
        let s = 0.9;
        let sq3: [f64; 3] = [0.5, 1.3, 2.2];
        let chain3 = ChainSpec {
            s,
            momenta: sq3.iter().map(|a| vec![a.sqrt(), 0.0]).collect(),
            d: 2,
        };
        let mut want3 = 0.0;
        for i in 0..3 {
            let mut denom = s * s;
            for j in 0..3 {
                if j != i {
                    denom *= sq3[j] - sq3[i];
                }
            }
            want3 += (-s * sq3[i]).exp() / denom;
        }
        assert_relative_eq!(propagator_chain(&chain3).unwrap(), want3, max_relative = 1e-9);

        let sq4: [f64; 4] = [0.3, 0.9, 1.6, 2.8];
        let chain4 = ChainSpec {
            s,
            momenta: sq4.iter().map(|a| vec![a.sqrt(), 0.0]).collect(),
            d: 2,
        };
        let mut want4 = 0.0;
        for i in 0..4 {
            let mut denom = s * s * s;
            for j in 0..4 {
                if j != i {
                    denom *= sq4[j] - sq4[i];
                }
            }
            want4 += (-s * sq4[i]).exp() / denom;
        }
        assert_relative_eq!(propagator_chain(&chain4).unwrap(), want4, max_relative = 1e-8);
    }

    #[test]
    fn chain_arity_and_domain_errors() {
        let bad = ChainSpec { s: 1.0, momenta: vec![vec![1.0, 0.0]; 5], d: 2 };
        assert!(matches!(propagator_chain(&bad), Err(Error::UnsupportedArity(5))));
        let empty = ChainSpec { s: 1.0, momenta: vec![], d: 2 };
        assert!(matches!(propagator_chain(&empty), Err(Error::UnsupportedArity(0))));
        let negative = ChainSpec { s: -1.0, momenta: vec![vec![1.0, 0.0]], d: 2 };
        assert!(matches!(propagator_chain(&negative), Err(Error::Domain(_))));
        let mismatched = ChainSpec { s: 1.0, momenta: vec![vec![1.0]], d: 2 };
        assert!(matches!(
            propagator_chain(&mismatched),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gaussian_moments_take_their_closed_forms() {
        let s = 0.37;
        let d = 5;
        match gaussian_moment(0, s, d).unwrap() {
            VertexTensor::Scalar(v) => assert_eq!(v, 1.0),
            _ => panic!("rank 0 is scalar"),
        }
        match gaussian_moment(2, s, d).unwrap() {
            VertexTensor::Rank2(m) => {
                let trace: f64 = (0..d).map(|i| m[[i, i]]).sum();
                assert_relative_eq!(trace, d as f64 / (2.0 * s), max_relative = 1e-14);
                assert_eq!(m[[0, 1]], 0.0);
            }
            _ => panic!("rank 2 is a matrix"),
        }
        match gaussian_moment(4, s, d).unwrap() {
            VertexTensor::Rank4(t) => {
                let w = 1.0 / (4.0 * s * s);
                assert_relative_eq!(t[[0, 0, 0, 0]], 3.0 * w, max_relative = 1e-14);
                assert_relative_eq!(t[[0, 0, 1, 1]], w, max_relative = 1e-14);
                assert_relative_eq!(t[[0, 1, 0, 1]], w, max_relative = 1e-14);
                assert_eq!(t[[0, 0, 0, 1]], 0.0);
            }
            _ => panic!("rank 4 is a rank-4 tensor"),
        }
        assert!(matches!(gaussian_moment(1, s, d).unwrap(), VertexTensor::Rank1(_)));
        match gaussian_moment(3, s, d).unwrap() {
            VertexTensor::Rank3(t) => assert!(t.iter().all(|c| *c == 0.0)),
            _ => panic!("rank 3 is a (vanishing) rank-3 tensor"),
        }
        assert!(matches!(
            gaussian_moment(5, s, d),
            Err(Error::UnsupportedRank(5))
        ));
    }

    #[test]
    fn vertices_match_their_printed_forms() {
        let d = 4;
        let k = [0.7, -0.2, 0.4, 0.1];
        let mk: Vec<f64> = k.iter().map(|c| -c).collect();
        // Two-endomorphism vertex vanishes.
        match vertex(VertexKind::U2, VertexKinematics::Legs { k1: &k, k2: &mk }, d).unwrap() {
            VertexTensor::Scalar(v) => assert_eq!(v, 0.0),
            _ => panic!(),
        }
        // Antisymmetric connection vertex vanishes at equal legs.
        match vertex(VertexKind::A1, VertexKinematics::Legs { k1: &k, k2: &k }, d).unwrap() {
            VertexTensor::Rank1(v) => assert!(v.iter().all(|c| *c == 0.0)),
            _ => panic!(),
        }
        // h1 at legs (k, −k): the symmetrized product −k^μ k^ν with no trace
        // part, since k1 + k2 = 0.
        match vertex(VertexKind::H1, VertexKinematics::Legs { k1: &k, k2: &mk }, d).unwrap() {
            VertexTensor::Rank2(m) => {
                for i in 0..d {
                    for j in 0..d {
                        assert_relative_eq!(m[[i, j]], -k[i] * k[j], max_relative = 1e-15);
                    }
                }
            }
            _ => panic!(),
        }
        // The seagull averages to the hh tadpole under the loop moments.
        let p = [0.9, 0.0, 0.0, 0.0];
        let q = [0.3, -0.6, 0.2, 0.5];
        match vertex(VertexKind::H2, VertexKinematics::Seagull { p: &p, q: &q }, d).unwrap() {
            VertexTensor::Rank4(t) => {
                assert_relative_eq!(
                    t[[0, 1, 0, 1]],
                    0.5 * (q[0] * q[0] + q[1] * q[1]),
                    max_relative = 1e-15
                );
                assert_relative_eq!(t[[0, 0, 0, 1]], q[0] * q[1], max_relative = 1e-15);
                assert_relative_eq!(
                    t[[1, 1, 2, 2]],
                    SEAGULL_KAPPA * 0.81,
                    max_relative = 1e-12
                );
            }
            _ => panic!(),
        }
        // Kinematic guards.
        assert!(matches!(
            vertex(VertexKind::H2, VertexKinematics::Legs { k1: &k, k2: &mk }, d),
            Err(Error::UnsupportedKinematics(_))
        ));
        assert!(matches!(
            vertex(VertexKind::H1, VertexKinematics::Seagull { p: &p, q: &q }, d),
            Err(Error::UnsupportedKinematics(_))
        ));
        match vertex(VertexKind::Uh, VertexKinematics::Legs { k1: &k, k2: &mk }, d).unwrap() {
            VertexTensor::Rank2(m) => assert!(m.iter().all(|c| *c == 0.0)),
            _ => panic!(),
        }
    }

    #[test]
    fn zero_one_point_channels() {
        let d = 4;
        assert_eq!(npoint(DiagramChannel::Tr0, 0.7, None, d).unwrap().scalar().unwrap(), 1.0);
        assert_eq!(npoint(DiagramChannel::TrU, 0.7, None, d).unwrap().scalar().unwrap(), -0.7);
        // The metric one-point insertion is δ^{μν}/2.
        assert_relative_eq!(
            npoint(DiagramChannel::Trh, 0.7, None, d).unwrap().scalar().unwrap(),
            0.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn two_point_scalar_channels_match_their_closed_forms() {
        for d in [4usize, 6] {
            for &x in &[0.3, 1.7] {
                let s = 0.7;
                let p = momentum_for(x, s, d);
                let f = f_of(x);
                let uu = npoint(DiagramChannel::TrUU, s, Some(&p), d).unwrap();
                assert_relative_eq!(uu.scalar().unwrap(), s * s * f, max_relative = 1e-12);

                let (pt, pl) = npoint(DiagramChannel::TrAA, s, Some(&p), d)
                    .unwrap()
                    .vector()
                    .unwrap();
                assert_relative_eq!(pt, 2.0 * s * (f - 1.0), max_relative = 1e-11);
                assert_abs_diff_eq!(pl, 0.0, epsilon = 1e-12);

                let (pt, pl) = npoint(DiagramChannel::TrhU, s, Some(&p), d)
                    .unwrap()
                    .vector()
                    .unwrap();
                assert_relative_eq!(pt, -(s / 2.0 + s * x / 4.0) * f, max_relative = 1e-11);
                assert_relative_eq!(pl, -s / 2.0, max_relative = 1e-11);

                let ah = npoint(DiagramChannel::TrAh, s, Some(&p), d).unwrap();
                assert_abs_diff_eq!(ah.scalar().unwrap(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn metric_two_point_matches_all_six_projector_coefficients() {
        for d in [4usize, 6] {
            for &x in &[0.3, 1.7] {
                let s = 0.7;
                let df = d as f64;
                let p = momentum_for(x, s, d);
                let f = f_of(x);
                let res = npoint(DiagramChannel::Trhh, s, Some(&p), d).unwrap();
                let c = res.tensor().unwrap();
                assert_relative_eq!(c.c2.unwrap(), -1.0 + f / 2.0, max_relative = 1e-11);
                let want_cs = -1.0 - (df - 1.0) * x / 8.0
                    + (4.0 * (df + 1.0) + 4.0 * (df - 1.0) * x + (df - 1.0) * x * x) * f / 16.0;
                assert_relative_eq!(c.c_s, want_cs, max_relative = 1e-11);
                assert_relative_eq!(c.c1, -0.5, max_relative = 1e-11);
                assert_relative_eq!(c.c_sigma, -0.25, max_relative = 1e-11);
                let mixer = (df - 1.0).sqrt() / 4.0;
                assert_relative_eq!(c.c_s_sigma, mixer, max_relative = 1e-11);
                assert_relative_eq!(c.c_sigma_s, mixer, max_relative = 1e-11);
                assert!(c.residual_norm <= 1e-10, "residual {}", c.residual_norm);
            }
        }
    }

    #[test]
    fn diagonal_channels_match_their_closed_forms() {
        let d = 4;
        for &x in &[0.4, 2.5] {
            let s = 0.9;
            let p = momentum_for(x, s, d);
            let f = f_of(x);
            let ku = npoint(DiagramChannel::KU, s, Some(&p), d).unwrap();
            assert_relative_eq!(ku.scalar().unwrap(), -s * f, max_relative = 1e-12);
            let (pt, pl) = npoint(DiagramChannel::Kh, s, Some(&p), d)
                .unwrap()
                .vector()
                .unwrap();
            assert_relative_eq!(pt, (0.5 + x / 4.0) * f, max_relative = 1e-11);
            assert_relative_eq!(pl, 0.5, max_relative = 1e-11);
        }
    }

    #[test]
    fn ansatz_agrees_with_diagrams_on_every_channel() {
        let ffs = FormFactorSet::closed_form_ricr(cfg());
        let constants = Constants::default();
        let d = 4;
        let s = 0.7;
        for &x in &[0.3, 1.7, 8.0] {
            let p = momentum_for(x, s, d);
            for channel in [
                DiagramChannel::Tr0,
                DiagramChannel::TrU,
                DiagramChannel::Trh,
                DiagramChannel::TrUU,
                DiagramChannel::TrAA,
                DiagramChannel::Trhh,
                DiagramChannel::TrhU,
                DiagramChannel::TrAh,
                DiagramChannel::KU,
                DiagramChannel::Kh,
            ] {
                let needs_p = !matches!(
                    channel,
                    DiagramChannel::Tr0 | DiagramChannel::TrU | DiagramChannel::Trh
                );
                let po = needs_p.then_some(&p);
                let got = npoint(channel, s, po, d).unwrap();
                let want = ansatz_npoint(channel, s, po, d, &constants, &ffs).unwrap();
                match (&got.payload, &want.payload) {
                    (DiagramPayload::Scalar(a), DiagramPayload::Scalar(b)) => {
                        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                    }
                    (
                        DiagramPayload::Vector { pt: a1, pl: a2 },
                        DiagramPayload::Vector { pt: b1, pl: b2 },
                    ) => {
                        assert_abs_diff_eq!(a1, b1, epsilon = 1e-10);
                        assert_abs_diff_eq!(a2, b2, epsilon = 1e-10);
                    }
                    (DiagramPayload::Tensor(a), DiagramPayload::Tensor(b)) => {
                        assert_abs_diff_eq!(a.c2.unwrap(), b.c2.unwrap(), epsilon = 1e-9);
                        assert_abs_diff_eq!(a.c1, b.c1, epsilon = 1e-10);
                        assert_abs_diff_eq!(a.c_s, b.c_s, epsilon = 1e-9);
                        assert_abs_diff_eq!(a.c_s_sigma, b.c_s_sigma, epsilon = 1e-10);
                        assert_abs_diff_eq!(a.c_sigma_s, b.c_sigma_s, epsilon = 1e-10);
                        assert_abs_diff_eq!(a.c_sigma, b.c_sigma, epsilon = 1e-10);
                    }
                    _ => panic!("payload shapes differ on {channel}"),
                }
            }
        }
    }

    #[test]
    fn extraction_reproduces_the_closed_forms() {
        let c = cfg();
        for &x in &[0.5, 3.0] {
            let d = 4;
            let f = f_of(x);
            let uu = extract_form_factors(DiagramChannel::TrUU, x, d).unwrap();
            assert_relative_eq!(uu["f_U"], f / 2.0, max_relative = 1e-11);

            let aa = extract_form_factors(DiagramChannel::TrAA, x, d).unwrap();
            assert_relative_eq!(
                aa["f_Omega"],
                form_factors::eval(FormFactorKind::Omega, x, &c).unwrap(),
                max_relative = 1e-10
            );

            let hh = extract_form_factors(DiagramChannel::Trhh, x, d).unwrap();
            assert_relative_eq!(hh["g0"], 1.0, max_relative = 1e-11);
            assert_relative_eq!(
                hh["f_Ric"],
                form_factors::eval(FormFactorKind::Ric, x, &c).unwrap(),
                max_relative = 1e-9
            );
            assert_relative_eq!(
                hh["f_R"],
                form_factors::eval(FormFactorKind::R, x, &c).unwrap(),
                max_relative = 1e-8
            );

            let hu = extract_form_factors(DiagramChannel::TrhU, x, d).unwrap();
            assert_relative_eq!(hu["g_U0"], -1.0, max_relative = 1e-11);
            assert_relative_eq!(
                hu["f_RU"],
                form_factors::eval(FormFactorKind::RU, x, &c).unwrap(),
                max_relative = 1e-10
            );

            let ku = extract_form_factors(DiagramChannel::KU, x, d).unwrap();
            assert_relative_eq!(ku["g_U"], -f, max_relative = 1e-11);

            let kh = extract_form_factors(DiagramChannel::Kh, x, d).unwrap();
            assert_relative_eq!(kh["g0"], 1.0, max_relative = 1e-11);
            assert_relative_eq!(
                kh["g_R"],
                form_factors::eval(FormFactorKind::GR, x, &c).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn extracted_values_are_dimension_independent() {
        let x = 1.3;
        let scalar_channels = [
            (DiagramChannel::TrUU, "f_U"),
            (DiagramChannel::TrAA, "f_Omega"),
            (DiagramChannel::TrhU, "f_RU"),
            (DiagramChannel::KU, "g_U"),
            (DiagramChannel::Kh, "g_R"),
        ];
        for (channel, key) in scalar_channels {
            let at3 = extract_form_factors(channel, x, 3).unwrap()[key];
            let at4 = extract_form_factors(channel, x, 4).unwrap()[key];
            let at6 = extract_form_factors(channel, x, 6).unwrap()[key];
            assert_relative_eq!(at3, at4, max_relative = 1e-11);
            assert_relative_eq!(at4, at6, max_relative = 1e-11);
        }
        for key in ["f_Ric", "f_R"] {
            let at4 = extract_form_factors(DiagramChannel::Trhh, x, 4).unwrap()[key];
            let at6 = extract_form_factors(DiagramChannel::Trhh, x, 6).unwrap()[key];
            assert_relative_eq!(at4, at6, max_relative = 1e-9);
        }
    }

    #[test]
    fn seagull_normalization_is_pinned_by_consistency() {
        let s = 0.7;
        let d = 4;
        let p = momentum_for(1.7, s, d);
        let good = seagull_mismatch(SEAGULL_KAPPA, s, &p, d).unwrap();
        let naive = seagull_mismatch(0.25, s, &p, d).unwrap();
        assert!(good <= 1e-10, "consistent assembly off by {good}");
        assert!(naive > 1e-2, "naive normalization should fail, got {naive}");
    }

    #[test]
    fn channel_preconditions_are_enforced() {
        assert!(matches!(
            npoint(DiagramChannel::TrAA, 1.0, None, 4),
            Err(Error::Domain(_))
        ));
        let p = Momentum::along_axis(3, 1.0).unwrap();
        assert!(matches!(
            npoint(DiagramChannel::TrAA, 1.0, Some(&p), 4),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            npoint(DiagramChannel::TrUU, -1.0, Some(&p), 3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            extract_form_factors(DiagramChannel::Tr0, 1.0, 4),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            extract_form_factors(DiagramChannel::TrUU, 0.0, 4),
            Err(Error::Domain(_))
        ));
    }
}
