//! The basic proper-time form factor and its derived family.
//!
//! Everything in this module is built around the single integral
//!
//! ```text
//! f(x) = ∫₀¹ exp(−x ξ(1−ξ)) dξ ,      x = s p² ≥ 0,
//! ```
//!
//! which interpolates between f(0) = 1 and f(x) ~ 2/x at large x. Every
//! other form factor appearing in a second-order heat-kernel trace is an
//! exact linear combination
//!
//! ```text
//! F(x) = a·f + b·f/x + c·f/x² + d + e/x + g/x²
//! ```
//!
//! with rational coefficients satisfying `c + g = 0` and `b + e = c/6`, the
//! two conditions that cancel the poles at x = 0 and make F smooth on the
//! whole half-line. Evaluation never relies on that cancellation happening
//! in floating point: below [`EvalConfig::small_x_cut`] each kind uses its
//! own Taylor series, and above it the combination is regrouped as
//!
//! ```text
//! F(x) = a·f + d + [b(f−1) + c/6]/x + c(f−1)/x² ,
//! ```
//!
//! where `(f−1)/x` is benign for x ≳ 0.5.
//!
//! The basic integral itself is computed on three branches: a Taylor series
//! in `x` below `small_x_cut`, adaptive Gauss–Legendre quadrature on the
//! half-domain `[0, 1/2]` in the middle, and the divergent asymptotic series
//! `f ~ 2/x + 4/x² + 24/x³ + …` above `large_x_cut`. The asymptotic branch
//! is adaptive in order: it sums terms only while they shrink, accepts the
//! partial sum only when the first omitted term is small enough for the
//! requested tolerance, and otherwise falls back to quadrature, so the
//! accuracy contract holds for every `x` regardless of where the cut is
//! placed.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quad;

/// Hard cap on series orders; beyond this the factorials in the closed-form
/// coefficients exceed what the callers can sensibly use and requests are
/// rejected rather than silently truncated.
pub const SERIES_ORDER_CAP: usize = 40;

/// Identifies one member of the form-factor family.
///
/// `C` and `Rbis` are the curvature-squared factors in the Weyl basis and
/// carry the spacetime dimension explicitly (the `C` coefficient has a
/// `1/(d−3)` pole, so both require `d ≥ 4`). All other kinds are
/// dimension-independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormFactorKind {
    /// The basic integral f(x) itself.
    Basic,
    /// Coefficient of the Ricci-tensor square R_{μν} R^{μν}.
    Ric,
    /// Coefficient of the Ricci-scalar square R².
    R,
    /// Coefficient of the mixed R·U term.
    RU,
    /// Coefficient of the potential square U².
    U,
    /// Coefficient of the field-strength square Ω_{μν} Ω^{μν}.
    Omega,
    /// Two-dimensional curvature-squared factor (single independent
    /// curvature invariant in d = 2).
    R2d,
    /// Weyl-basis coefficient of C_{μνρσ} C^{μνρσ}.
    C { d: u32 },
    /// Weyl-basis coefficient of R² (differs from `R` by a Ricci admixture).
    Rbis { d: u32 },
    /// First slot of the five-factor basis (equals `Ric`).
    BV1,
    /// Second slot of the five-factor basis.
    BV2,
    /// Third slot of the five-factor basis.
    BV3,
    /// Fourth slot of the five-factor basis (equals `U`).
    BV4,
    /// Fifth slot of the five-factor basis (equals `Omega`).
    BV5,
    /// Coincidence-limit factor multiplying U in the diagonal kernel.
    GU,
    /// Coincidence-limit factor multiplying R in the diagonal kernel.
    GR,
}

impl FormFactorKind {
    /// The kinds that carry no dimension parameter, in a stable order.
    pub const DIMENSION_FREE: [FormFactorKind; 14] = [
        FormFactorKind::Basic,
        FormFactorKind::Ric,
        FormFactorKind::R,
        FormFactorKind::RU,
        FormFactorKind::U,
        FormFactorKind::Omega,
        FormFactorKind::R2d,
        FormFactorKind::BV1,
        FormFactorKind::BV2,
        FormFactorKind::BV3,
        FormFactorKind::BV4,
        FormFactorKind::BV5,
        FormFactorKind::GU,
        FormFactorKind::GR,
    ];
}

impl std::fmt::Display for FormFactorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormFactorKind::Basic => write!(f, "basic"),
            FormFactorKind::Ric => write!(f, "ric"),
            FormFactorKind::R => write!(f, "r"),
            FormFactorKind::RU => write!(f, "ru"),
            FormFactorKind::U => write!(f, "u"),
            FormFactorKind::Omega => write!(f, "omega"),
            FormFactorKind::R2d => write!(f, "r2d"),
            FormFactorKind::C { d } => write!(f, "c(d={d})"),
            FormFactorKind::Rbis { d } => write!(f, "rbis(d={d})"),
            FormFactorKind::BV1 => write!(f, "bv1"),
            FormFactorKind::BV2 => write!(f, "bv2"),
            FormFactorKind::BV3 => write!(f, "bv3"),
            FormFactorKind::BV4 => write!(f, "bv4"),
            FormFactorKind::BV5 => write!(f, "bv5"),
            FormFactorKind::GU => write!(f, "gu"),
            FormFactorKind::GR => write!(f, "gr"),
        }
    }
}

/// Evaluation controls shared by every operation in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Below this argument the Taylor branch is used (must be ≥ 0).
    pub small_x_cut: f64,
    /// Above this argument the asymptotic branch is attempted
    /// (must exceed `small_x_cut`).
    pub large_x_cut: f64,
    /// Number of Taylor terms kept on the small-x branch (2..=40).
    pub series_order: usize,
    /// Relative accuracy target, also used by the quadrature fallback
    /// (must lie in (0, 1e−6]).
    pub quad_rel_tol: f64,
    /// Maximum bisection depth of the adaptive quadrature.
    pub quad_max_depth: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        // 20 Taylor terms at x = 0.5 truncate below 1e−16, and the
        // asymptotic branch self-reports whether it can meet the tolerance,
        // so both default cuts are safe for any requested accuracy.
        EvalConfig {
            small_x_cut: 0.5,
            large_x_cut: 60.0,
            series_order: 20,
            quad_rel_tol: 1e-12,
            quad_max_depth: 48,
        }
    }
}

impl EvalConfig {
    /// Checks the documented field invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.small_x_cut.is_finite() || self.small_x_cut < 0.0 {
            return Err(Error::Domain(format!(
                "small_x_cut must be finite and ≥ 0, got {}",
                self.small_x_cut
            )));
        }
        if !self.large_x_cut.is_finite() || self.large_x_cut <= self.small_x_cut {
            return Err(Error::Domain(format!(
                "large_x_cut must be finite and exceed small_x_cut ({}), got {}",
                self.small_x_cut, self.large_x_cut
            )));
        }
        if self.series_order < 2 {
            return Err(Error::Domain(format!(
                "series_order must be ≥ 2, got {}",
                self.series_order
            )));
        }
        if self.series_order > SERIES_ORDER_CAP {
            return Err(Error::UnsupportedOrder {
                requested: self.series_order,
                cap: SERIES_ORDER_CAP,
            });
        }
        if !(self.quad_rel_tol > 0.0 && self.quad_rel_tol <= 1e-6) {
            return Err(Error::Domain(format!(
                "quad_rel_tol must lie in (0, 1e-6], got {}",
                self.quad_rel_tol
            )));
        }
        if self.quad_max_depth == 0 {
            return Err(Error::Domain("quad_max_depth must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Which end of the domain a series expands around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    /// Taylor series in x about x = 0.
    SmallX,
    /// Asymptotic series in 1/x for x → ∞.
    LargeX,
}

/// An expansion with exact rational coefficients.
///
/// For `SmallX` the coefficients multiply `x^0, x^1, …` (so `leading_power`
/// is 0). For `LargeX` they multiply `x^{leading_power}, x^{leading_power−1},
/// …` with `leading_power` negative; leading zero coefficients are trimmed,
/// so the first entry is always the true leading behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub kind: SeriesKind,
    pub coefficients: Vec<BigRational>,
    pub leading_power: i32,
}

impl SeriesExpansion {
    /// The exact coefficient of `x^power`, if it is within the computed range.
    pub fn coefficient(&self, power: i32) -> Option<&BigRational> {
        let idx = match self.kind {
            SeriesKind::SmallX => power.checked_sub(self.leading_power)?,
            SeriesKind::LargeX => self.leading_power.checked_sub(power)?,
        };
        if idx < 0 {
            return None;
        }
        self.coefficients.get(idx as usize)
    }

    /// The coefficients rounded to `f64`, in stored order.
    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| c.to_f64().expect("series coefficient fits in f64"))
            .collect()
    }

    /// Evaluates the truncated expansion at `x` in floating point.
    ///
    /// For `LargeX` this is the partial sum of an asymptotic (divergent)
    /// series: it is only meaningful for large `x` and carries no accuracy
    /// guarantee of its own.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let coeffs = self.coefficients_f64();
        match self.kind {
            SeriesKind::SmallX => {
                let horner = coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                horner * x.powi(self.leading_power)
            }
            SeriesKind::LargeX => {
                let inv = 1.0 / x;
                let horner = coeffs.iter().rev().fold(0.0, |acc, &c| acc * inv + c);
                horner * x.powi(self.leading_power)
            }
        }
    }
}

/// The three scheme-independent constants of the zeroth-order trace
/// coefficients: the overall tensor normalization `g0`, the constant part
/// `g_u0` of the coincidence-limit factor multiplying U, and the constant
/// part `g_r0` of the one multiplying R. Their values (1, −1, 1/6) are
/// reproduced independently by the two-point functions in `diagram_engine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub g0: f64,
    pub g_u0: f64,
    pub g_r0: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            g0: 1.0,
            g_u0: -1.0,
            g_r0: 1.0 / 6.0,
        }
    }
}

/// Exact coefficients of `F = a·f + b·f/x + c·f/x² + d + e/x + g/x²`.
#[derive(Debug, Clone, PartialEq)]
struct Row {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
    e: BigRational,
    g: BigRational,
}

fn rat(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

impl Row {
    fn new(parts: [(i64, i64); 6]) -> Self {
        let [a, b, c, d, e, g] = parts.map(|(n, m)| rat(n, m));
        Row { a, b, c, d, e, g }
    }

    fn scaled(&self, factor: &BigRational) -> Self {
        Row {
            a: &self.a * factor,
            b: &self.b * factor,
            c: &self.c * factor,
            d: &self.d * factor,
            e: &self.e * factor,
            g: &self.g * factor,
        }
    }

    fn plus(&self, other: &Row) -> Self {
        Row {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            c: &self.c + &other.c,
            d: &self.d + &other.d,
            e: &self.e + &other.e,
            g: &self.g + &other.g,
        }
    }

    fn abcd_f64(&self) -> (f64, f64, f64, f64) {
        let to = |r: &BigRational| r.to_f64().expect("row coefficient fits in f64");
        (to(&self.a), to(&self.b), to(&self.c), to(&self.d))
    }
}

fn ric_row() -> Row {
    Row::new([(0, 1), (0, 1), (1, 1), (0, 1), (1, 6), (-1, 1)])
}

fn r_row() -> Row {
    Row::new([(1, 32), (1, 8), (-1, 8), (0, 1), (-7, 48), (1, 8)])
}

fn row(kind: FormFactorKind) -> Result<Row> {
    let row = match kind {
        FormFactorKind::Basic => Row::new([(1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)]),
        FormFactorKind::Ric | FormFactorKind::BV1 => ric_row(),
        FormFactorKind::R => r_row(),
        FormFactorKind::RU => Row::new([(-1, 4), (-1, 2), (0, 1), (0, 1), (1, 2), (0, 1)]),
        FormFactorKind::U | FormFactorKind::BV4 => {
            Row::new([(1, 2), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)])
        }
        FormFactorKind::Omega | FormFactorKind::BV5 => {
            Row::new([(0, 1), (-1, 2), (0, 1), (0, 1), (1, 2), (0, 1)])
        }
        FormFactorKind::R2d => Row::new([(1, 32), (1, 8), (3, 8), (0, 1), (-1, 16), (-3, 8)]),
        FormFactorKind::C { d } => {
            if d < 4 {
                return Err(Error::Domain(format!(
                    "form factor c requires d ≥ 4 (its coefficient has a 1/(d-3) pole), got d = {d}"
                )));
            }
            let factor = rat(i64::from(d) - 2, 4 * (i64::from(d) - 3));
            ric_row().scaled(&factor)
        }
        FormFactorKind::Rbis { d } => {
            if d < 4 {
                return Err(Error::Domain(format!(
                    "form factor rbis is defined alongside c and requires d ≥ 4, got d = {d}"
                )));
            }
            let factor = rat(i64::from(d), 4 * (i64::from(d) - 1));
            ric_row().scaled(&factor).plus(&r_row())
        }
        FormFactorKind::BV2 => Row::new([(1, 288), (1, 24), (-1, 8), (0, 1), (-1, 16), (1, 8)]),
        FormFactorKind::BV3 => Row::new([(1, 12), (1, 2), (0, 1), (0, 1), (-1, 2), (0, 1)]),
        FormFactorKind::GU => Row::new([(-1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)]),
        FormFactorKind::GR => Row::new([(1, 4), (1, 2), (0, 1), (0, 1), (-1, 2), (0, 1)]),
    };
    Ok(row)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// Taylor coefficient of x^n in f(x): (−1)^n n! / (2n+1)!.
fn basic_small_coeff(n: u64) -> BigRational {
    let c = BigRational::new(factorial(n), factorial(2 * n + 1));
    if n % 2 == 0 {
        c
    } else {
        -c
    }
}

/// Asymptotic coefficient of x^{−k} in f(x): 2 (2k−2)! / (k−1)! for k ≥ 1.
fn basic_large_coeff(k: i64) -> BigRational {
    if k < 1 {
        return BigRational::zero();
    }
    let k = k as u64;
    BigRational::from_integer(BigInt::from(2) * factorial(2 * k - 2) / factorial(k - 1))
}

/// Taylor coefficient of x^n in the row combination: a·f contributes its own
/// coefficient, while b·f/x and c·f/x² shift the index up (the poles cancel
/// against e/x and g/x² by the row invariants).
fn small_coeff_exact(row: &Row, n: u64) -> BigRational {
    let mut c = &row.a * basic_small_coeff(n)
        + &row.b * basic_small_coeff(n + 1)
        + &row.c * basic_small_coeff(n + 2);
    if n == 0 {
        c += &row.d;
    }
    c
}

/// Asymptotic coefficient of x^{−m} in the row combination.
fn large_coeff_exact(row: &Row, m: i64) -> BigRational {
    let mut c = &row.a * basic_large_coeff(m)
        + &row.b * basic_large_coeff(m - 1)
        + &row.c * basic_large_coeff(m - 2);
    if m == 1 {
        c += &row.e;
    }
    if m == 2 {
        c += &row.g;
    }
    c
}

/// Floating-point Taylor evaluation of a row at small x (Horner form).
fn small_x_eval_f64(row: &Row, x: f64, order: usize) -> f64 {
    debug_assert!(order >= 2 && order <= SERIES_ORDER_CAP);
    // a_n = (−1)^n n!/(2n+1)! via a_{n+1} = −a_n (n+1)/((2n+2)(2n+3)).
    let mut an = [0.0f64; SERIES_ORDER_CAP + 3];
    an[0] = 1.0;
    for n in 0..(order + 2) {
        let nf = n as f64;
        an[n + 1] = -an[n] * (nf + 1.0) / ((2.0 * nf + 2.0) * (2.0 * nf + 3.0));
    }
    let (a, b, c, d) = row.abcd_f64();
    let mut acc = 0.0;
    for n in (0..order).rev() {
        let coeff = a * an[n] + b * an[n + 1] + c * an[n + 2] + if n == 0 { d } else { 0.0 };
        acc = acc * x + coeff;
    }
    acc
}

/// Attempts the asymptotic branch. Returns `None` when the series hits its
/// accuracy floor (smallest term) before meeting `rel_tol`, in which case the
/// caller must fall back to quadrature.
fn basic_f_asymptotic(x: f64, rel_tol: f64) -> Option<f64> {
    let mut term = 2.0 / x;
    let mut partial = term;
    for k in 1..=(SERIES_ORDER_CAP as u32) {
        let kf = f64::from(k);
        let next = term * (2.0 * kf) * (2.0 * kf - 1.0) / (kf * x);
        // The remainder of the truncated series is of the order of the first
        // omitted term; the factor 4 is a safety margin.
        if 4.0 * next.abs() <= rel_tol * partial.abs() {
            return Some(partial);
        }
        if next.abs() >= term.abs() {
            return None;
        }
        partial += next;
        term = next;
    }
    None
}

/// Quadrature branch: the integrand is symmetric about ξ = 1/2, so integrate
/// the half-domain and double.
fn basic_f_quadrature(x: f64, cfg: &EvalConfig) -> Result<f64> {
    let half = quad::adaptive(
        &|xi: f64| (-x * xi * (1.0 - xi)).exp(),
        0.0,
        0.5,
        cfg.quad_rel_tol,
        cfg.quad_max_depth,
    )?;
    Ok(2.0 * half)
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "form-factor argument must be finite and ≥ 0, got {x}"
        )));
    }
    Ok(())
}

fn basic_f_unchecked(x: f64, cfg: &EvalConfig) -> Result<f64> {
    if x < cfg.small_x_cut || x == 0.0 {
        return Ok(small_x_eval_f64(&row(FormFactorKind::Basic)?, x, cfg.series_order));
    }
    if x > cfg.large_x_cut {
        if let Some(value) = basic_f_asymptotic(x, cfg.quad_rel_tol) {
            return Ok(value);
        }
    }
    basic_f_quadrature(x, cfg)
}

/// Evaluates the basic form factor `f(x) = ∫₀¹ exp(−x ξ(1−ξ)) dξ` with
/// relative error at most `cfg.quad_rel_tol`.
pub fn basic_f(x: f64, cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    check_x(x)?;
    basic_f_unchecked(x, cfg)
}

/// Evaluates any member of the form-factor family.
///
/// Values at and near x = 0 come from the kind's own Taylor series, so the
/// removable singularities of the defining expressions are never formed in
/// floating point.
pub fn eval(kind: FormFactorKind, x: f64, cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    check_x(x)?;
    let row = row(kind)?;
    if x < cfg.small_x_cut || x == 0.0 {
        return Ok(small_x_eval_f64(&row, x, cfg.series_order));
    }
    let f = basic_f_unchecked(x, cfg)?;
    let (a, b, c, d) = row.abcd_f64();
    let fm1 = f - 1.0;
    Ok(a * f + d + (b * fm1 + c / 6.0) / x + c * fm1 / (x * x))
}

/// Produces the exact expansion of a form factor at either end of the domain.
///
/// `order` counts returned coefficients. Large-x expansions are trimmed to
/// their true leading power (several kinds start only at x⁻² or x⁻³).
pub fn series(kind: FormFactorKind, which: SeriesKind, order: usize) -> Result<SeriesExpansion> {
    if order == 0 {
        return Err(Error::Domain("series order must be ≥ 1".into()));
    }
    if order > SERIES_ORDER_CAP {
        return Err(Error::UnsupportedOrder {
            requested: order,
            cap: SERIES_ORDER_CAP,
        });
    }
    let row = row(kind)?;
    match which {
        SeriesKind::SmallX => {
            let coefficients = (0..order as u64).map(|n| small_coeff_exact(&row, n)).collect();
            Ok(SeriesExpansion {
                kind: which,
                coefficients,
                leading_power: 0,
            })
        }
        SeriesKind::LargeX => {
            let mut coefficients = Vec::with_capacity(order);
            let mut leading_power = None;
            let mut m = 1i64;
            // The trim never needs to scan far: every row has a nonzero
            // coefficient by x⁻³ at the latest.
            while coefficients.len() < order && m <= SERIES_ORDER_CAP as i64 + 8 {
                let coeff = large_coeff_exact(&row, m);
                if leading_power.is_none() {
                    if coeff.is_zero() {
                        m += 1;
                        continue;
                    }
                    leading_power = Some(-(m as i32));
                }
                coefficients.push(coeff);
                m += 1;
            }
            Ok(SeriesExpansion {
                kind: which,
                coefficients,
                leading_power: leading_power.unwrap_or(-1),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    /// Independent high-precision values of f(x) (32 significant digits,
    /// rounded here to f64), spanning all three evaluation branches.
    const BASIC_F_ORACLE: &[(f64, f64)] = &[
        (1e-8, 0.99999999833333333),
        (0.01, 0.99833499881018488),
        (0.25, 0.95935665425159285),
        (0.4999, 0.92070365145939074),
        (0.5, 0.92068856523896973),
        (0.7, 0.89110705432754171),
        (1.0, 0.84887276700404459),
        (2.0, 0.72477845900707633),
        (4.0, 0.53807950691276842),
        (10.0, 0.25629214044352465),
        (25.0, 0.089233488866974192),
        (59.9, 0.034640755322875),
        (60.0, 0.034580650431417254),
        (100.0, 0.020426814884855367),
        (200.0, 0.010103161564918599),
        (400.0, 0.0050253847187598528),
        (800.0, 0.0025062974714286780),
        (1e4, 0.00020004002402403366),
    ];

    #[test]
    fn basic_f_matches_reference_values_on_all_branches() {
        for &(x, want) in BASIC_F_ORACLE {
            let got = basic_f(x, &cfg()).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn basic_f_at_zero_is_one() {
        assert_eq!(basic_f(0.0, &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn negative_and_non_finite_arguments_are_rejected() {
        assert!(matches!(basic_f(-1.0, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(basic_f(f64::NAN, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(
            eval(FormFactorKind::Ric, f64::INFINITY, &cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn config_invariants_are_enforced() {
        let mut bad = cfg();
        bad.quad_rel_tol = 0.0;
        assert!(matches!(basic_f(1.0, &bad), Err(Error::Domain(_))));
        bad = cfg();
        bad.quad_rel_tol = 1e-5; // looser than the documented ceiling
        assert!(matches!(basic_f(1.0, &bad), Err(Error::Domain(_))));
        bad = cfg();
        bad.series_order = 50;
        assert!(matches!(
            basic_f(1.0, &bad),
            Err(Error::UnsupportedOrder { requested: 50, cap: SERIES_ORDER_CAP })
        ));
        bad = cfg();
        bad.large_x_cut = 0.1;
        assert!(matches!(basic_f(1.0, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn quadrature_depth_exhaustion_surfaces_as_convergence_error() {
        let narrow = EvalConfig {
            quad_max_depth: 2,
            ..cfg()
        };
        // At x = 5000 the integrand has boundary layers of width ~1/x that
        // two bisections cannot resolve to 1e−12.
        assert!(matches!(
            basic_f(5000.0, &EvalConfig { large_x_cut: 1e9, ..narrow }),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn values_at_zero_match_the_short_time_constants() {
        let cases: &[(FormFactorKind, f64)] = &[
            (FormFactorKind::Ric, 1.0 / 60.0),
            (FormFactorKind::R, 1.0 / 120.0),
            (FormFactorKind::RU, -1.0 / 6.0),
            (FormFactorKind::U, 0.5),
            (FormFactorKind::Omega, 1.0 / 12.0),
            (FormFactorKind::R2d, 1.0 / 60.0),
            (FormFactorKind::GU, -1.0),
            (FormFactorKind::GR, 1.0 / 6.0),
            (FormFactorKind::BV1, 1.0 / 60.0),
            (FormFactorKind::BV2, -1.0 / 180.0),
            (FormFactorKind::BV3, 0.0),
            (FormFactorKind::BV4, 0.5),
            (FormFactorKind::BV5, 1.0 / 12.0),
            // c(d) = (d−2)/(4(d−3))·ric, so c(4) halves the 1/60.
            (FormFactorKind::C { d: 4 }, 1.0 / 120.0),
            (FormFactorKind::Rbis { d: 4 }, 1.0 / 72.0),
            (FormFactorKind::C { d: 6 }, 1.0 / 180.0),
        ];
        for &(kind, want) in cases {
            let got = eval(kind, 0.0, &cfg()).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn weyl_kinds_require_d_at_least_four() {
        assert!(matches!(
            eval(FormFactorKind::C { d: 3 }, 1.0, &cfg()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval(FormFactorKind::Rbis { d: 2 }, 1.0, &cfg()),
            Err(Error::Domain(_))
        ));
        assert!(eval(FormFactorKind::C { d: 4 }, 1.0, &cfg()).is_ok());
    }

    #[test]
    fn every_row_extends_smoothly_to_zero() {
        let mut kinds: Vec<FormFactorKind> = FormFactorKind::DIMENSION_FREE.to_vec();
        for d in 4..=8 {
            kinds.push(FormFactorKind::C { d });
            kinds.push(FormFactorKind::Rbis { d });
        }
        for kind in kinds {
            let r = row(kind).unwrap();
            // c + g = 0 cancels the x⁻² pole, b + e = c/6 the x⁻¹ pole.
            assert_eq!(&r.c + &r.g, BigRational::zero(), "{kind}");
            assert_eq!(&r.b + &r.e, &r.c / rat(6, 1), "{kind}");
        }
    }

    #[test]
    fn taylor_coefficients_of_basic_follow_the_factorial_rule() {
        let s = series(FormFactorKind::Basic, SeriesKind::SmallX, 21).unwrap();
        assert_eq!(s.leading_power, 0);
        // Independent recurrence: a_0 = 1, a_n = −a_{n−1}·n/((2n)(2n+1)).
        let mut expect = BigRational::from_integer(1.into());
        assert_eq!(s.coefficients[0], expect);
        for n in 1..21i64 {
            expect = -expect * rat(n, (2 * n) * (2 * n + 1));
            assert_eq!(s.coefficients[n as usize], expect, "coefficient of x^{n}");
        }
        assert_eq!(s.coefficients[1], rat(-1, 6));
        assert_eq!(s.coefficients[2], rat(1, 60));
        assert_eq!(s.coefficients[3], rat(-1, 840));
    }

    #[test]
    fn small_x_expansions_match_the_printed_tables() {
        let expect: &[(FormFactorKind, [(i64, i64); 3])] = &[
            (FormFactorKind::Ric, [(1, 60), (-1, 840), (1, 15120)]),
            (FormFactorKind::R, [(1, 120), (-1, 336), (11, 30240)]),
            (FormFactorKind::RU, [(-1, 6), (1, 30), (-1, 280)]),
            (FormFactorKind::U, [(1, 2), (-1, 12), (1, 120)]),
            (FormFactorKind::Omega, [(1, 12), (-1, 120), (1, 1680)]),
        ];
        for &(kind, coeffs) in expect {
            let s = series(kind, SeriesKind::SmallX, 3).unwrap();
            for (i, (n, d)) in coeffs.into_iter().enumerate() {
                assert_eq!(s.coefficients[i], rat(n, d), "{kind} x^{i}");
            }
        }
    }

    #[test]
    fn coincidence_factors_recover_the_local_linear_coefficients() {
        // g_U = −f = −1 + x/6 − …, so the linear coefficient is 1/6.
        let gu = series(FormFactorKind::GU, SeriesKind::SmallX, 2).unwrap();
        assert_eq!(gu.coefficients[0], rat(-1, 1));
        assert_eq!(gu.coefficients[1], rat(1, 6));
        // g_R = f/4 + (f−1)/(2x) = 1/6 − x/30 + x²/280 − …; the magnitude of
        // the linear coefficient is the local 1/30, with the sign fixed by
        // the closed form.
        let gr = series(FormFactorKind::GR, SeriesKind::SmallX, 3).unwrap();
        assert_eq!(gr.coefficients[0], rat(1, 6));
        assert_eq!(gr.coefficients[1], rat(-1, 30));
        assert_eq!(gr.coefficients[2], rat(1, 280));
    }

    #[test]
    fn large_x_expansions_match_the_printed_tables() {
        let expect: &[(FormFactorKind, i32, &[(i64, i64)])] = &[
            (FormFactorKind::Basic, -1, &[(2, 1), (4, 1), (24, 1), (240, 1)]),
            (FormFactorKind::Ric, -1, &[(1, 6), (-1, 1)]),
            (FormFactorKind::R, -1, &[(-1, 12), (1, 2)]),
            // The x⁻¹ term of ru cancels exactly; the series starts at x⁻².
            (FormFactorKind::RU, -2, &[(-2, 1), (-8, 1)]),
            (FormFactorKind::U, -1, &[(1, 1), (2, 1)]),
            (FormFactorKind::Omega, -1, &[(1, 2), (-1, 1)]),
            // In d = 2 both the x⁻¹ and x⁻² terms cancel.
            (FormFactorKind::R2d, -3, &[(2, 1), (12, 1)]),
        ];
        for &(kind, leading, coeffs) in expect {
            let s = series(kind, SeriesKind::LargeX, coeffs.len()).unwrap();
            assert_eq!(s.leading_power, leading, "{kind}");
            for (i, &(n, d)) in coeffs.iter().enumerate() {
                assert_eq!(s.coefficients[i], rat(n, d), "{kind} term {i}");
            }
        }
    }

    #[test]
    fn series_order_cap_is_enforced() {
        assert!(matches!(
            series(FormFactorKind::Basic, SeriesKind::SmallX, 41),
            Err(Error::UnsupportedOrder { requested: 41, cap: SERIES_ORDER_CAP })
        ));
        assert!(matches!(
            series(FormFactorKind::Basic, SeriesKind::SmallX, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn series_coefficient_lookup_respects_leading_power() {
        let s = series(FormFactorKind::RU, SeriesKind::LargeX, 2).unwrap();
        assert_eq!(s.coefficient(-2), Some(&rat(-2, 1)));
        assert_eq!(s.coefficient(-3), Some(&rat(-8, 1)));
        assert_eq!(s.coefficient(-1), None);
        let t = series(FormFactorKind::U, SeriesKind::SmallX, 3).unwrap();
        assert_eq!(t.coefficient(0), Some(&rat(1, 2)));
        assert_eq!(t.coefficient(5), None);
    }

    #[test]
    fn truncated_series_evaluate_close_to_the_integral() {
        let s = series(FormFactorKind::Basic, SeriesKind::SmallX, 20).unwrap();
        let f = basic_f(0.3, &cfg()).unwrap();
        assert_relative_eq!(s.eval_f64(0.3), f, max_relative = 1e-14);
        let l = series(FormFactorKind::Basic, SeriesKind::LargeX, 4).unwrap();
        let f800 = basic_f(800.0, &cfg()).unwrap();
        assert_relative_eq!(l.eval_f64(800.0), f800, max_relative = 1e-8);
    }

    /// Independent high-precision values (28 significant digits) of the
    /// derived factors, one point per evaluation branch plus x = 100.
    #[test]
    fn derived_factors_match_reference_values() {
        use FormFactorKind as K;
        let cases: &[(FormFactorKind, f64, f64)] = &[
            (K::U, 0.01, 0.49916749940509244),
            (K::U, 1.0, 0.42443638350202230),
            (K::U, 10.0, 0.12814607022176232),
            (K::U, 100.0, 0.010213407442427684),
            (K::Omega, 0.01, 0.083250059490755766),
            (K::Omega, 1.0, 0.075563616497977704),
            (K::Omega, 10.0, 0.037185392977823768),
            (K::Omega, 100.0, 0.0048978659255757232),
            (K::Ric, 0.01, 0.016654768515513421),
            (K::Ric, 1.0, 0.015539433670711259),
            (K::Ric, 10.0, 0.0092295880711019131),
            (K::Ric, 100.0, 0.0015687093481551522),
            (K::R, 0.01, 0.0083036077756901584),
            (K::R, 1.0, 0.0056939406355430602),
            (K::R, 10.0, -0.0024409173644835358),
            (K::R, 100.0, -0.00078221718476159460),
            (K::RU, 0.01, -0.16633369021179045),
            (K::RU, 1.0, -0.13665457525303344),
            (K::RU, 10.0, -0.026887642133057394),
            (K::RU, 100.0, -0.00020883779563811861),
            (K::R2d, 0.01, 0.016630992033446869),
            (K::R2d, 1.0, 0.013463657470898689),
            (K::R2d, 10.0, 0.0021738766710674208),
            (K::GU, 1.0, -0.84887276700404459),
            (K::GR, 1.0, 0.13665457525303344),
        ];
        for &(kind, x, want) in cases {
            let got = eval(kind, x, &cfg()).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
        // At x = 100 the three pieces of the r2d row cancel to ~1e−6, which
        // costs a few digits; the reference value is still reproduced well
        // inside the amplified error bound.
        let got = eval(K::R2d, 100.0, &cfg()).unwrap();
        assert_relative_eq!(got, 2.1374893159815066e-6, max_relative = 1e-8);
    }

    #[test]
    fn u_and_gu_are_exact_multiples_of_basic() {
        for &x in &[0.0, 0.3, 0.5, 1.0, 7.0, 60.0, 120.0, 1e3] {
            let f = basic_f(x, &cfg()).unwrap();
            assert_relative_eq!(
                eval(FormFactorKind::U, x, &cfg()).unwrap(),
                0.5 * f,
                max_relative = 1e-15
            );
            assert_relative_eq!(
                eval(FormFactorKind::GU, x, &cfg()).unwrap(),
                -f,
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn two_dimensional_factor_is_the_stated_combination() {
        for &x in &[0.0, 0.01, 0.3, 0.5, 2.0, 10.0, 60.0, 200.0] {
            let lhs = eval(FormFactorKind::R2d, x, &cfg()).unwrap();
            let rhs = eval(FormFactorKind::R, x, &cfg()).unwrap()
                + 0.5 * eval(FormFactorKind::Ric, x, &cfg()).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        // The identity also holds exactly at the level of rational series.
        let r2d = series(FormFactorKind::R2d, SeriesKind::SmallX, 10).unwrap();
        let r = series(FormFactorKind::R, SeriesKind::SmallX, 10).unwrap();
        let ric = series(FormFactorKind::Ric, SeriesKind::SmallX, 10).unwrap();
        for n in 0..10 {
            let combo = &r.coefficients[n] + &ric.coefficients[n] / rat(2, 1);
            assert_eq!(r2d.coefficients[n], combo, "x^{n}");
        }
    }

    #[test]
    fn coincidence_factor_gr_is_minus_ru() {
        for &x in &[0.0, 0.2, 1.0, 30.0, 400.0] {
            let gr = eval(FormFactorKind::GR, x, &cfg()).unwrap();
            let ru = eval(FormFactorKind::RU, x, &cfg()).unwrap();
            assert_relative_eq!(gr, -ru, max_relative = 1e-14, epsilon = 1e-16);
        }
    }

    #[test]
    fn basic_f_is_bounded_and_non_increasing() {
        let xs = [
            0.0, 1e-6, 1e-3, 0.01, 0.1, 0.25, 0.49, 0.5, 0.51, 1.0, 2.0, 5.0, 10.0, 30.0, 59.0,
            60.0, 61.0, 100.0, 150.0, 300.0, 1e3, 1e4,
        ];
        let mut prev = 1.0 + 1e-15;
        for &x in &xs {
            let f = basic_f(x, &cfg()).unwrap();
            assert!(f > 0.0 && f <= 1.0, "f({x}) = {f} escapes (0, 1]");
            assert!(
                f <= prev * (1.0 + 1e-12),
                "f not monotone: f({x}) = {f} after {prev}"
            );
            prev = f;
        }
    }

    #[test]
    fn weighted_moment_identity_holds_on_a_log_grid() {
        // (1/2)∫₀¹ (1−2ξ)² e^{−xξ(1−ξ)} dξ = (1−f)/x = 2·omega(x).
        for i in 0..20 {
            let x = 10f64.powf(-2.0 + 4.0 * (i as f64) / 19.0);
            let lhs = 0.5
                * quad::adaptive(
                    &|xi: f64| {
                        let w = 1.0 - 2.0 * xi;
                        w * w * (-x * xi * (1.0 - xi)).exp()
                    },
                    0.0,
                    1.0,
                    1e-13,
                    48,
                )
                .unwrap();
            let rhs = 2.0 * eval(FormFactorKind::Omega, x, &cfg()).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn branch_values_agree_at_the_cut_points() {
        // x = 0.5 through the Taylor branch vs. the quadrature branch.
        let series_side = basic_f(0.5, &EvalConfig { small_x_cut: 0.6, ..cfg() }).unwrap();
        let quad_side = basic_f(0.5, &cfg()).unwrap();
        assert_relative_eq!(series_side, quad_side, max_relative = 1e-11);

        // x = 100 through the asymptotic branch vs. the quadrature branch.
        // At a 1e−6 tolerance the asymptotic sum is accepted at x = 100;
        // at tighter tolerances it would decline and fall back.
        let loose = EvalConfig { quad_rel_tol: 1e-6, ..cfg() };
        let asym_side = basic_f(100.0, &loose).unwrap();
        let quad_side = basic_f(100.0, &EvalConfig { large_x_cut: 1e3, ..loose }).unwrap();
        assert_relative_eq!(asym_side, quad_side, max_relative = 1e-5);
        // The fallback path is exercised by the oracle battery: at the
        // default 1e−12 tolerance, x = 100 declines the asymptotic sum yet
        // still matches the reference value.
    }

    #[test]
    fn default_constants_are_the_verified_normalizations() {
        let c = Constants::default();
        assert_eq!(c.g0, 1.0);
        assert_eq!(c.g_u0, -1.0);
        assert_relative_eq!(c.g_r0, 1.0 / 6.0, max_relative = 1e-16);
    }
}
