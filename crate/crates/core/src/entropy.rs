//! The catalog of test functions: Rényi/von Neumann entropy functions, the
//! homogeneous and logarithmic model functions, the Table-1 decomposition used
//! at fixed density, and the concavity-defect functional U.
//!
//! Values below the floor 1e-300 are treated as exactly 0; all evaluations are
//! arranged so that 0·log 0 never forms.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{adaptive_gk_with_breaks, QuadratureSpec};

const T_FLOOR: f64 = 1e-300;

/// Tagged family of test functions f. `singular_set` is the finite set of
/// points where f fails to be C²; `hoelder_exponent` the δ of the two-sided
/// growth bounds |f^(k)(t)| ≲ Σ |t-u|^(δ-k).
#[derive(Clone)]
pub struct EntropyFunction {
    pub kind: EntropyKind,
    pub singular_set: Vec<f64>,
    pub hoelder_exponent: f64,
}

#[derive(Clone)]
pub enum EntropyKind {
    /// η_γ(t) = (1-γ)^{-1} ln[t^γ + (1-t)^γ] on (0,1), 0 outside.
    Renyi(f64),
    /// η_1(t) = -t ln t - (1-t) ln(1-t); the γ → 1 limit.
    VonNeumann,
    /// η(t) = -t ln|t| on all of ℝ.
    EtaLog,
    /// f_0(t) = M |t|^δ.
    Power { coeff: f64, exponent: f64 },
    /// η_γ^eff of Table 1 (the small-t effective contribution of f_γ).
    Effective(f64),
    /// f_γ of Table 1: η_γ minus its linear part at 0.
    LinearShifted(f64),
    /// η_∞(t) = min{-ln(1-t), -ln t} on [0,1], 0 outside.
    EtaInfinity,
    /// ln t on (0, ∞); enters through the η_∞ closed forms.
    Log,
    /// αt + β. The operator difference vanishes identically for these.
    Affine { slope: f64, intercept: f64 },
    /// Escape hatch: a black-box f with declared singular set and Hölder
    /// exponent. Not covered by closed-form fast paths.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        tag: String,
    },
}

impl std::fmt::Debug for EntropyFunction {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "EntropyFunction({})", self.tag())
    }
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Rényi index must be a positive real, got {gamma}"
        )));
    }
    Ok(gamma)
}

impl EntropyFunction {
    /// η_γ. Indices within 1e-12 of 1 snap to the von Neumann function.
    pub fn renyi(gamma: f64) -> Result<Self> {
        let gamma = check_gamma(gamma)?;
        if (gamma - 1.0).abs() < 1e-12 {
            return Ok(Self::von_neumann());
        }
        Ok(EntropyFunction {
            kind: EntropyKind::Renyi(gamma),
            singular_set: vec![0.0, 1.0],
            hoelder_exponent: 0.999 * gamma.min(1.0),
        })
    }

    pub fn von_neumann() -> Self {
        EntropyFunction {
            kind: EntropyKind::VonNeumann,
            singular_set: vec![0.0, 1.0],
            hoelder_exponent: 0.999,
        }
    }

    pub fn eta_log() -> Self {
        EntropyFunction {
            kind: EntropyKind::EtaLog,
            singular_set: vec![0.0],
            hoelder_exponent: 0.999,
        }
    }

    pub fn power(coeff: f64, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must be positive, got {exponent}"
            )));
        }
        Ok(EntropyFunction {
            kind: EntropyKind::Power { coeff, exponent },
            singular_set: vec![0.0],
            hoelder_exponent: exponent,
        })
    }

    /// f(t) = c t², the quadratic test function.
    pub fn quadratic(coeff: f64) -> Self {
        Self::power(coeff, 2.0).expect("exponent 2 is valid")
    }

    pub fn effective(gamma: f64) -> Result<Self> {
        let gamma = check_gamma(gamma)?;
        Ok(EntropyFunction {
            kind: EntropyKind::Effective(gamma),
            singular_set: vec![0.0],
            hoelder_exponent: delta_gamma(gamma),
        })
    }

    pub fn linear_shifted(gamma: f64) -> Result<Self> {
        let gamma = check_gamma(gamma)?;
        Ok(EntropyFunction {
            kind: EntropyKind::LinearShifted(gamma),
            singular_set: vec![0.0, 1.0],
            hoelder_exponent: 0.999 * gamma.min(1.0),
        })
    }

    pub fn eta_infinity() -> Self {
        EntropyFunction {
            kind: EntropyKind::EtaInfinity,
            singular_set: vec![0.0, 0.5, 1.0],
            hoelder_exponent: 0.999,
        }
    }

    pub fn log() -> Self {
        EntropyFunction {
            kind: EntropyKind::Log,
            singular_set: vec![0.0],
            hoelder_exponent: 0.5,
        }
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        EntropyFunction {
            kind: EntropyKind::Affine { slope, intercept },
            singular_set: vec![],
            hoelder_exponent: 1.0,
        }
    }

    pub fn custom<F>(f: F, tag: &str, singular_set: Vec<f64>, hoelder_exponent: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        EntropyFunction {
            kind: EntropyKind::Custom {
                f: Arc::new(f),
                tag: tag.to_owned(),
            },
            singular_set,
            hoelder_exponent,
        }
    }

    /// Short label used in reports and JSON records.
    pub fn tag(&self) -> String {
        match &self.kind {
            EntropyKind::Renyi(g) => format!("eta_{g}"),
            EntropyKind::VonNeumann => "eta_1".into(),
            EntropyKind::EtaLog => "eta_log".into(),
            EntropyKind::Power { coeff, exponent } => format!("power_{coeff}x{exponent}"),
            EntropyKind::Effective(g) => format!("eta_eff_{g}"),
            EntropyKind::LinearShifted(g) => format!("f_{g}"),
            EntropyKind::EtaInfinity => "eta_inf".into(),
            EntropyKind::Log => "ln".into(),
            EntropyKind::Affine { slope, intercept } => format!("affine_{slope}t+{intercept}"),
            EntropyKind::Custom { tag, .. } => tag.clone(),
        }
    }

    /// Point-wise evaluation. Entropy kinds vanish outside (0,1) by definition.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            EntropyKind::Renyi(g) => eta_gamma(*g, t),
            EntropyKind::VonNeumann => eta_one(t),
            EntropyKind::EtaLog => {
                let a = t.abs();
                if a < T_FLOOR {
                    0.0
                } else {
                    -t * a.ln()
                }
            }
            EntropyKind::Power { coeff, exponent } => {
                let a = t.abs();
                if a < T_FLOOR {
                    0.0
                } else {
                    coeff * a.powf(*exponent)
                }
            }
            EntropyKind::Effective(g) => eta_eff(*g, t),
            EntropyKind::LinearShifted(g) => eta_gamma_or_one(*g, t) - linear_coeff(*g) * t,
            EntropyKind::EtaInfinity => {
                if t <= 0.0 || t >= 1.0 {
                    0.0
                } else {
                    (-t.ln()).min(-(-t).ln_1p())
                }
            }
            EntropyKind::Log => t.ln(),
            EntropyKind::Affine { slope, intercept } => slope * t + intercept,
            EntropyKind::Custom { f, .. } => f(t),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, EntropyKind::Affine { .. })
    }

    /// Some(c) if f(t) = c t² exactly.
    pub fn quadratic_coefficient(&self) -> Option<f64> {
        match &self.kind {
            EntropyKind::Power { coeff, exponent } if *exponent == 2.0 => Some(*coeff),
            EntropyKind::Effective(g) if *g > 2.0 => Some(*g / (2.0 * (*g - 1.0))),
            _ => None,
        }
    }
}

fn eta_gamma_or_one(g: f64, t: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        eta_one(t)
    } else {
        eta_gamma(g, t)
    }
}

/// η_γ for γ ≠ 1, factoring out the larger of t^γ, (1-t)^γ so the log never
/// overflows.
fn eta_gamma(g: f64, t: f64) -> f64 {
    if t <= T_FLOOR || t >= 1.0 - 1e-16 {
        return 0.0;
    }
    // ln(p^γ + q^γ) = γ ln p + ln(1 + (q/p)^γ) with q = min(t, 1-t).
    // ln p = ln(1-q) goes through ln_1p so the small-q digits survive;
    // the Table-1 remainder scans probe cancellations down to O(q⁴).
    let q = t.min(1.0 - t);
    let ln_p = (-q).ln_1p();
    let ratio_pow = (g * (q.ln() - ln_p)).exp();
    (g * ln_p + ratio_pow.ln_1p()) / (1.0 - g)
}

fn eta_one(t: f64) -> f64 {
    if t <= T_FLOOR || t >= 1.0 - 1e-16 {
        return 0.0;
    }
    -t * t.ln() - (1.0 - t) * (-t).ln_1p()
}

/// The linear coefficient subtracted in the Table-1 function f_γ.
fn linear_coeff(g: f64) -> f64 {
    if g < 1.0 - 1e-12 {
        0.0
    } else if (g - 1.0).abs() <= 1e-12 {
        1.0
    } else {
        g / (g - 1.0)
    }
}

/// δ_γ of Table 1; the homogeneity order of η_γ^eff at 0.
pub fn delta_gamma(g: f64) -> f64 {
    if (g - 1.0).abs() <= 1e-12 {
        1.0
    } else if (g - 2.0).abs() <= 1e-12 {
        3.0
    } else if g > 2.0 {
        2.0
    } else {
        g
    }
}

fn eta_eff(g: f64, t: f64) -> f64 {
    let s = t.abs();
    if s < T_FLOOR {
        return 0.0;
    }
    if (g - 1.0).abs() <= 1e-12 {
        -s * s.ln()
    } else if (g - 2.0).abs() <= 1e-12 {
        -4.0 / 3.0 * s * s * s
    } else if g > 2.0 {
        g / (2.0 * (g - 1.0)) * s * s
    } else {
        s.powf(g) / (1.0 - g)
    }
}

/// η_γ'(t) on (0,1), analytic.
pub fn eta_prime(gamma: f64, t: f64) -> f64 {
    assert!(t > 0.0 && t < 1.0, "eta_prime needs t strictly inside (0,1)");
    if (gamma - 1.0).abs() <= 1e-12 {
        (-t).ln_1p() - t.ln()
    } else {
        let g = gamma;
        let num = g * (t.powf(g - 1.0) - (1.0 - t).powf(g - 1.0));
        num / ((1.0 - g) * (t.powf(g) + (1.0 - t).powf(g)))
    }
}

/// η_γ''(t) on (0,1), by the closed formula
/// η''[t^γ+(1-t)^γ]² = -γ[t(1-t)]^{γ-2} - γ/(1-γ)·[t^{γ-1} - (1-t)^{γ-1}]².
/// For γ = 1 the explicit η₁''(t) = -1/(t(1-t)) is used.
pub fn second_derivative_eta(gamma: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "second_derivative_eta: t = {t} must lie strictly inside (0,1)"
        )));
    }
    if (gamma - 1.0).abs() <= 1e-12 {
        return Ok(-1.0 / (t * (1.0 - t)));
    }
    let g = gamma;
    let num =
        -g * (t * (1.0 - t)).powf(g - 2.0) - g / (1.0 - g) * {
            let d = t.powf(g - 1.0) - (1.0 - t).powf(g - 1.0);
            d * d
        };
    let den = {
        let s = t.powf(g) + (1.0 - t).powf(g);
        s * s
    };
    Ok(num / den)
}

/// One row of Table 1: (δ_γ, f_γ, η_γ^eff) for the regime containing γ.
pub fn table1(gamma: f64) -> Result<(f64, EntropyFunction, EntropyFunction)> {
    let gamma = check_gamma(gamma)?;
    Ok((
        delta_gamma(gamma),
        EntropyFunction::linear_shifted(gamma)?,
        EntropyFunction::effective(gamma)?,
    ))
}

/// The concavity-defect functional
/// U(u,v;f) = ∫₀¹ [f(tu+(1-t)v) - t f(u) - (1-t) f(v)] / (t(1-t)) dt.
///
/// Closed forms: quadratic kinds give -c(u-v)²; ln gives -½(ln u - ln v)²;
/// η_∞ reduces to the ln form when u,v sit on the same side of 1/2; affine
/// kinds vanish. Everything else goes through adaptive quadrature with break
/// points where the chord crosses the singular set of f.
pub fn u_value(f: &EntropyFunction, u: f64, v: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if u == v {
        return Ok(0.0);
    }
    if f.is_affine() {
        return Ok(0.0);
    }
    if let Some(c) = f.quadratic_coefficient() {
        let d = u - v;
        return Ok(-c * d * d);
    }
    if matches!(f.kind, EntropyKind::Log) && u > 0.0 && v > 0.0 {
        // U(u,v;ln) = +½(ln u - ln v)²; positive, as it must be for concave f.
        let d = u.ln() - v.ln();
        return Ok(0.5 * d * d);
    }
    if matches!(f.kind, EntropyKind::EtaInfinity) {
        // On [0,1/2] the min picks -ln(1-t); on [1/2,1] it picks -ln t.
        if u <= 0.5 && v <= 0.5 && u > 0.0 && v > 0.0 {
            let d = (-u).ln_1p() - (-v).ln_1p();
            return Ok(-0.5 * d * d);
        }
        if u >= 0.5 && v >= 0.5 && u < 1.0 && v < 1.0 {
            let d = u.ln() - v.ln();
            return Ok(-0.5 * d * d);
        }
    }
    u_value_quadrature(f, u, v, quad)
}

/// The generic quadrature route of `u_value`, exposed for cross-checks of the
/// closed-form fast paths.
pub fn u_value_quadrature(
    f: &EntropyFunction,
    u: f64,
    v: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let fu = f.eval(u);
    let fv = f.eval(v);
    let integrand = |t: f64| {
        let arg = t * u + (1.0 - t) * v;
        (f.eval(arg) - t * fu - (1.0 - t) * fv) / (t * (1.0 - t))
    };
    // Break where the chord from v to u crosses a singular point of f.
    let mut breaks: Vec<f64> = f
        .singular_set
        .iter()
        .map(|&s| (s - v) / (u - v))
        .filter(|&ts| ts > 0.0 && ts < 1.0)
        .collect();
    breaks.push(0.5);
    let (val, _err) = adaptive_gk_with_breaks(&integrand, 0.0, 1.0, &breaks, quad.tolerance)?;
    Ok(val)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concavity {
    Concave,
    Neither,
}

/// Samples η_γ'' on a grid of (0,1) (endpoint offset 1e-6, with extra
/// log-spaced points toward both ends where the sign flip for γ > 2 lives).
pub fn concavity_classify(gamma: f64, grid_size: usize) -> Result<Concavity> {
    check_gamma(gamma)?;
    if grid_size < 100 {
        return Err(Error::InvalidParameter(
            "concavity_classify needs grid_size >= 100".into(),
        ));
    }
    let mut grid = Vec::with_capacity(grid_size + 60);
    for i in 0..grid_size {
        let t = 1e-6 + (1.0 - 2e-6) * (i as f64 + 0.5) / grid_size as f64;
        grid.push(t);
    }
    for k in 0..30 {
        let t = 1e-6 * 10f64.powf(5.0 * k as f64 / 29.0); // 1e-6 .. 1e-1
        grid.push(t);
        grid.push(1.0 - t);
    }
    for &t in &grid {
        if second_derivative_eta(gamma, t)? > 1e-10 {
            return Ok(Concavity::Neither);
        }
    }
    Ok(Concavity::Concave)
}

/// t^{k-δ_γ} (d/dt)^k (f_γ(t) - η_γ^eff(t)) along `t_list`; tends to 0 as
/// t ↓ 0 in every Table-1 regime. Derivatives are analytic.
pub fn remainder_limit_scan(gamma: f64, k: usize, t_list: &[f64]) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    if k > 2 {
        return Err(Error::InvalidParameter(
            "remainder_limit_scan supports k in {0,1,2}".into(),
        ));
    }
    for pair in t_list.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::InvalidParameter(
                "t_list must be strictly decreasing".into(),
            ));
        }
    }
    if t_list.iter().any(|&t| !(t > 0.0 && t < 0.5)) {
        return Err(Error::InvalidParameter(
            "t_list entries must lie in (0, 1/2)".into(),
        ));
    }
    let dg = delta_gamma(gamma);
    let c = linear_coeff(gamma);
    let out = t_list
        .iter()
        .map(|&t| -> Result<f64> {
            let diff = match k {
                0 => eta_gamma_or_one(gamma, t) - c * t - eta_eff(gamma, t),
                1 => eta_prime(gamma, t) - c - eta_eff_prime(gamma, t),
                _ => second_derivative_eta(gamma, t)? - eta_eff_second(gamma, t),
            };
            Ok(t.powf(k as f64 - dg) * diff)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out)
}

fn eta_eff_prime(g: f64, t: f64) -> f64 {
    if (g - 1.0).abs() <= 1e-12 {
        -t.ln() - 1.0
    } else if (g - 2.0).abs() <= 1e-12 {
        -4.0 * t * t
    } else if g > 2.0 {
        g / (g - 1.0) * t
    } else {
        g * t.powf(g - 1.0) / (1.0 - g)
    }
}

fn eta_eff_second(g: f64, t: f64) -> f64 {
    if (g - 1.0).abs() <= 1e-12 {
        -1.0 / t
    } else if (g - 2.0).abs() <= 1e-12 {
        -8.0 * t
    } else if g > 2.0 {
        g / (g - 1.0)
    } else {
        -g * t.powf(g - 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn renyi_midpoint_is_ln2_for_every_gamma() {
        for g in [0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 10.0, 50.0] {
            let f = EntropyFunction::renyi(g).unwrap();
            assert_abs_diff_eq!(f.eval(0.5), LN2, epsilon = 1e-12);
        }
    }

    #[test]
    fn renyi2_quarter_point() {
        // η_2(1/4) = -ln(1/16 + 9/16) = ln(8/5)
        let f = EntropyFunction::renyi(2.0).unwrap();
        assert_abs_diff_eq!(f.eval(0.25), (8.0f64 / 5.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn eta_infinity_quarter_point() {
        let f = EntropyFunction::eta_infinity();
        assert_abs_diff_eq!(f.eval(0.25), (4.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(0.5), LN2, epsilon = 1e-12);
    }

    #[test]
    fn entropy_kinds_vanish_outside_unit_interval() {
        for f in [
            EntropyFunction::renyi(0.7).unwrap(),
            EntropyFunction::von_neumann(),
            EntropyFunction::eta_infinity(),
        ] {
            assert_eq!(f.eval(-0.3), 0.0);
            assert_eq!(f.eval(1.0), 0.0);
            assert_eq!(f.eval(17.0), 0.0);
            assert_eq!(f.eval(0.0), 0.0);
        }
    }

    #[test]
    fn renyi_limit_matches_von_neumann() {
        let up = EntropyFunction::renyi(1.0 + 1e-6).unwrap();
        let dn = EntropyFunction::renyi(1.0 - 1e-6).unwrap();
        let vn = EntropyFunction::von_neumann();
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!((up.eval(t) - vn.eval(t)).abs() <= 1e-5);
            assert!((dn.eval(t) - vn.eval(t)).abs() <= 1e-5);
        }
    }

    #[test]
    fn renyi_stable_near_endpoints() {
        let f = EntropyFunction::renyi(0.5).unwrap();
        for t in [1e-308, 1e-200, 1e-20, 1e-10] {
            let v = f.eval(t);
            assert!(v.is_finite() && v >= 0.0, "t={t} gave {v}");
        }
        assert_eq!(f.eval(1e-301), 0.0);
    }

    #[test]
    fn second_derivative_spot_values() {
        assert_abs_diff_eq!(second_derivative_eta(1.0, 0.5).unwrap(), -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(second_derivative_eta(3.0, 0.5).unwrap(), -12.0, epsilon = 1e-10);
        for g in [0.5, 1.0, 2.0, 3.0] {
            assert_abs_diff_eq!(
                second_derivative_eta(g, 0.5).unwrap(),
                -4.0 * g,
                epsilon = 1e-8
            );
        }
        // η_γ''(t) → γ/(γ-1) as t → 0 for γ > 2
        assert_abs_diff_eq!(
            second_derivative_eta(3.0, 1e-9).unwrap(),
            1.5,
            epsilon = 1e-6
        );
    }

    #[test]
    fn second_derivative_rejects_endpoints() {
        assert!(second_derivative_eta(2.0, 0.0).is_err());
        assert!(second_derivative_eta(2.0, 1.0).is_err());
    }

    #[test]
    fn second_derivative_matches_central_differences() {
        // 5-point stencil keeps the truncation error below the comparison
        // threshold.
        let h = 1e-3;
        for g in [0.4, 1.0, 1.3, 2.0, 2.7] {
            let f = EntropyFunction::renyi(g).unwrap();
            for t in [0.1, 0.3, 0.5, 0.77] {
                let fd = (-f.eval(t + 2.0 * h) + 16.0 * f.eval(t + h) - 30.0 * f.eval(t)
                    + 16.0 * f.eval(t - h)
                    - f.eval(t - 2.0 * h))
                    / (12.0 * h * h);
                let an = second_derivative_eta(g, t).unwrap();
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1.0),
                    "γ={g} t={t}: fd={fd} analytic={an}"
                );
            }
        }
    }

    #[test]
    fn table1_rows() {
        let (d, f, eff) = table1(0.5).unwrap();
        assert_eq!(d, 0.5);
        // f = η_1/2 itself, η_eff(t) = 2 t^{1/2}
        assert_abs_diff_eq!(
            f.eval(0.3),
            EntropyFunction::renyi(0.5).unwrap().eval(0.3),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(eff.eval(0.25), 2.0 * 0.5, epsilon = 1e-14);

        let (d, f, eff) = table1(2.0).unwrap();
        assert_eq!(d, 3.0);
        assert_abs_diff_eq!(
            f.eval(0.3),
            EntropyFunction::renyi(2.0).unwrap().eval(0.3) - 2.0 * 0.3,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(eff.eval(0.5), -4.0 / 3.0 * 0.125, epsilon = 1e-14);

        let (d, f, eff) = table1(1.0).unwrap();
        assert_eq!(d, 1.0);
        assert_abs_diff_eq!(
            f.eval(0.3),
            EntropyFunction::von_neumann().eval(0.3) - 0.3,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(eff.eval(0.25), -0.25 * 0.25f64.ln(), epsilon = 1e-14);

        // snapping of near-boundary indices
        let (d, _, _) = table1(2.0 + 1e-13).unwrap();
        assert_eq!(d, 3.0);
        // γ > 2 row
        let (d, _, eff) = table1(3.0).unwrap();
        assert_eq!(d, 2.0);
        assert_abs_diff_eq!(eff.eval(0.2), 1.5 / 2.0 * 0.04, epsilon = 1e-14);
        assert_eq!(eff.quadratic_coefficient(), Some(0.75));
    }

    #[test]
    fn u_value_degenerate_and_affine() {
        let q = QuadratureSpec::default();
        let f = EntropyFunction::von_neumann();
        assert_eq!(u_value(&f, 0.4, 0.4, &q).unwrap(), 0.0);
        let aff = EntropyFunction::affine(2.0, -0.3);
        assert_eq!(u_value(&aff, 0.9, 0.1, &q).unwrap(), 0.0);
    }

    #[test]
    fn u_value_quadratic_closed_form() {
        let q = QuadratureSpec::default();
        let f = EntropyFunction::quadratic(1.0);
        assert_abs_diff_eq!(u_value(&f, 0.3, 0.1, &q).unwrap(), -0.04, epsilon = 1e-12);
    }

    #[test]
    fn u_value_log_closed_form() {
        // U(e^{-1}, e^{-2}; ln) = ½(ln u - ln v)² = ½. Positive: ln is
        // concave and U ≥ 0 for concave f by its defining integral.
        let q = QuadratureSpec::default();
        let f = EntropyFunction::log();
        let (u, v) = ((-1.0f64).exp(), (-2.0f64).exp());
        assert_abs_diff_eq!(u_value(&f, u, v, &q).unwrap(), 0.5, epsilon = 1e-12);
        // and the quadrature route reproduces it
        assert_abs_diff_eq!(
            u_value_quadrature(&f, u, v, &q).unwrap(),
            0.5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn u_value_eta1_frozen_oracle() {
        // Independent oracle: adaptive quadrature of the defining integral at
        // tolerance 1e-10, cross-checked at a second refinement level.
        let tight = QuadratureSpec {
            tolerance: 1e-10,
            ..Default::default()
        };
        let tighter = QuadratureSpec {
            tolerance: 1e-12,
            ..Default::default()
        };
        let f = EntropyFunction::von_neumann();
        let a = u_value_quadrature(&f, 0.5, 0.25, &tight).unwrap();
        let b = u_value_quadrature(&f, 0.5, 0.25, &tighter).unwrap();
        assert!((a - b).abs() < 1e-10);
        // frozen value from the oracle
        assert_abs_diff_eq!(a, 0.1359563239, epsilon = 1e-9);
    }

    #[test]
    fn u_value_closed_forms_match_quadrature() {
        let q = QuadratureSpec {
            tolerance: 1e-11,
            ..Default::default()
        };
        let quadratic = EntropyFunction::quadratic(0.7);
        let log = EntropyFunction::log();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..100 {
            let u = 0.02 + 0.96 * next();
            let v = 0.02 + 0.96 * next();
            if (u - v).abs() < 1e-3 {
                continue;
            }
            let cf = u_value(&quadratic, u, v, &q).unwrap();
            let qd = u_value_quadrature(&quadratic, u, v, &q).unwrap();
            assert!((cf - qd).abs() <= 1e-8, "quadratic u={u} v={v}: {cf} vs {qd}");
            let cf = u_value(&log, u, v, &q).unwrap();
            let qd = u_value_quadrature(&log, u, v, &q).unwrap();
            assert!((cf - qd).abs() <= 1e-8, "log u={u} v={v}: {cf} vs {qd}");
        }
    }

    #[test]
    fn u_value_positive_for_concave_f() {
        let q = QuadratureSpec::default();
        for g in [0.5, 1.0, 2.0] {
            let f = EntropyFunction::renyi(g).unwrap();
            for (u, v) in [(0.1, 0.9), (0.02, 0.5), (0.3, 0.31)] {
                assert!(u_value(&f, u, v, &q).unwrap() >= 0.0, "γ={g} u={u} v={v}");
            }
        }
    }

    #[test]
    fn u_value_eta_infinity_split_at_half() {
        let q = QuadratureSpec {
            tolerance: 1e-11,
            ..Default::default()
        };
        let f = EntropyFunction::eta_infinity();
        // same side: closed form against quadrature
        let cf = u_value(&f, 0.4, 0.2, &q).unwrap();
        let qd = u_value_quadrature(&f, 0.4, 0.2, &q).unwrap();
        assert_abs_diff_eq!(cf, qd, epsilon = 1e-8);
        // crossing 1/2: quadrature with a kink break must still run
        let v = u_value(&f, 0.7, 0.2, &q).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn concavity_classification() {
        assert_eq!(concavity_classify(1.7, 200).unwrap(), Concavity::Concave);
        assert_eq!(concavity_classify(2.0, 200).unwrap(), Concavity::Concave);
        assert_eq!(concavity_classify(3.0, 200).unwrap(), Concavity::Neither);
        for g in [2.5, 3.0, 5.0] {
            // positive second derivative exists below t = 0.05, negative at 1/2
            let mut found = false;
            for k in 0..200 {
                let t = 1e-6 * (0.05f64 / 1e-6).powf(k as f64 / 199.0);
                if second_derivative_eta(g, t).unwrap() > 0.0 {
                    found = true;
                    break;
                }
            }
            assert!(found, "no positive η'' below 0.05 for γ={g}");
            assert!(second_derivative_eta(g, 0.5).unwrap() < 0.0);
        }
    }

    #[test]
    fn concavity_lemma_grid_bound() {
        // η_γ'' ≤ 1e-10 everywhere on the grid for γ ≤ 2
        for g in [0.3, 0.8, 1.0, 1.5, 1.9, 2.0] {
            for i in 1..400 {
                let t = i as f64 / 400.0;
                assert!(second_derivative_eta(g, t).unwrap() <= 1e-10, "γ={g} t={t}");
            }
        }
    }

    #[test]
    fn remainder_scan_decreases_in_every_regime() {
        let ts: Vec<f64> = (1..=5).map(|j| 10f64.powi(-j)).collect();
        for g in [0.5, 1.0, 1.5, 2.0, 3.0] {
            for k in 0..=2 {
                let vals = remainder_limit_scan(g, k, &ts).unwrap();
                let absvals: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
                // tends to 0: final value small and smaller than the first
                assert!(
                    absvals[4] <= 1e-2 && absvals[4] <= absvals[0] + 1e-14,
                    "γ={g} k={k}: {absvals:?}"
                );
            }
        }
    }

    #[test]
    fn remainder_scan_single_point_finite() {
        let vals = remainder_limit_scan(0.5, 0, &[0.25]).unwrap();
        assert!(vals[0].is_finite());
    }

    #[test]
    fn remainder_scan_rejects_bad_lists() {
        assert!(remainder_limit_scan(1.0, 0, &[0.1, 0.2]).is_err());
        assert!(remainder_limit_scan(1.0, 0, &[0.7]).is_err());
        assert!(remainder_limit_scan(1.0, 3, &[0.1]).is_err());
    }

    #[test]
    fn gamma_validation() {
        assert!(EntropyFunction::renyi(0.0).is_err());
        assert!(EntropyFunction::renyi(-2.0).is_err());
        assert!(EntropyFunction::renyi(f64::NAN).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn renyi_range_and_symmetry(g in 0.05f64..20.0, t in 0.0f64..=1.0) {
                let f = EntropyFunction::renyi(g).unwrap();
                let v = f.eval(t);
                prop_assert!((0.0..=LN2 + 1e-12).contains(&v));
                prop_assert!((v - f.eval(1.0 - t)).abs() <= 1e-12);
            }

            #[test]
            fn u_value_symmetric(u in 0.05f64..0.95, v in 0.05f64..0.95) {
                let q = QuadratureSpec { tolerance: 1e-10, ..Default::default() };
                let f = EntropyFunction::von_neumann();
                let a = u_value(&f, u, v, &q).unwrap();
                let b = u_value(&f, v, u, &q).unwrap();
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
