//! Quadrature building blocks: Gauss-Legendre rules, composite panels, and an
//! adaptive Gauss-Kronrod (G7/K15) integrator used wherever an integrand needs
//! local refinement.

use crate::error::{Error, Result};

/// Knobs for every quadrature-backed operation. The fields discretize the
/// ε ↓ 0 limit of the principal-value integral and the momentum/transversal
/// truncations.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    /// Principal-value cutoff ε; the pv integral is evaluated at ε, ε/2, ε/4
    /// and extrapolated.
    pub pv_cutoff: f64,
    /// Transversal domain |t| ≤ t_max before the analytic 1/t tail takes over.
    /// Non-positive means "choose from the symbol support".
    pub t_max: f64,
    /// Momentum-space truncation radius R_ξ. Non-positive means automatic.
    pub xi_radius: f64,
    /// Gauss-Legendre nodes per panel/axis.
    pub nodes_per_axis: usize,
    /// Absolute/relative tolerance target for the enclosing operation.
    pub tolerance: f64,
    /// Refinement levels used by self-convergence error estimates.
    pub refinement_levels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            pv_cutoff: 1e-4,
            t_max: 0.0,
            xi_radius: 0.0,
            nodes_per_axis: 8,
            tolerance: 1e-8,
            refinement_levels: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pv_cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pv_cutoff must be positive, got {}",
                self.pv_cutoff
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.nodes_per_axis < 2 {
            return Err(Error::InvalidParameter(
                "nodes_per_axis must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// A cheaper spec used for inner integrals so the outer tolerance is not
    /// swamped by inner-loop cost.
    pub fn inner(&self) -> QuadratureSpec {
        QuadratureSpec {
            tolerance: (self.tolerance * 1e-2).max(1e-13),
            ..self.clone()
        }
    }
}

/// Gauss-Legendre nodes and weights on (-1, 1), by Newton iteration on the
/// Legendre polynomial. Accurate to ~1e-15 for the sizes used here (n ≤ 128).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Scaled GL rule on [a, b].
pub fn gl_on_interval(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(n);
    xs.iter()
        .zip(&ws)
        .map(|(&x, &w)| (0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w))
        .collect()
}

/// Composite GL rule over consecutive panels delimited by `edges`.
pub fn gl_on_panels(edges: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * edges.len().saturating_sub(1));
    for pair in edges.windows(2) {
        out.extend(gl_on_interval(pair[0], pair[1], n));
    }
    out
}

/// Geometrically spaced edges from `a` to `b` (both positive), `count` panels.
pub fn geometric_edges(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && count >= 1);
    let ratio = (b / a).powf(1.0 / count as f64);
    let mut edges = Vec::with_capacity(count + 1);
    let mut x = a;
    for _ in 0..count {
        edges.push(x);
        x *= ratio;
    }
    edges.push(b);
    edges
}

/// Uniformly spaced edges from `a` to `b`, `count` panels.
pub fn linear_edges(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    (0..=count)
        .map(|i| a + (b - a) * i as f64 / count as f64)
        .collect()
}

// QUADPACK G7/K15 pair.
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One G7/K15 application on [a, b]: returns (K15 value, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut res_g = WG7[3] * fc;
    let mut res_k = WGK15[7] * fc;
    for j in 0..7 {
        let dx = half * XGK15[j];
        let fsum = f(mid - dx) + f(mid + dx);
        res_k += WGK15[j] * fsum;
        if j % 2 == 1 {
            res_g += WG7[j / 2] * fsum;
        }
    }
    (res_k * half, ((res_k - res_g) * half).abs())
}

/// Adaptive bisection of G7/K15 panels until the summed error estimate drops
/// below `tol` (absolute). Returns (value, error_estimate).
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const MAX_PANELS: usize = 4000;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(f, a, b);
    // (neg error, a, b, value, err) max-heap on error via sorted Vec stack
    let mut stack = vec![(a, b, v, e)];
    let mut total_v = v;
    let mut total_e = e;
    let mut panels = 1;
    while total_e > tol && panels < MAX_PANELS {
        // split the worst panel
        let (idx, _) = stack
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("stack nonempty");
        let (pa, pb, pv, pe) = stack.swap_remove(idx);
        let pm = 0.5 * (pa + pb);
        if pm <= pa || pm >= pb {
            // interval exhausted at machine precision
            stack.push((pa, pb, pv, pe));
            break;
        }
        let (v1, e1) = gk15(f, pa, pm);
        let (v2, e2) = gk15(f, pm, pb);
        total_v += v1 + v2 - pv;
        total_e += e1 + e2 - pe;
        stack.push((pa, pm, v1, e1));
        stack.push((pm, pb, v2, e2));
        panels += 1;
    }
    if total_e > tol.max(1e-12 * total_v.abs()) && panels >= MAX_PANELS {
        return Err(Error::QuadratureNotConverged {
            residual: total_e,
            tolerance: tol,
        });
    }
    Ok((total_v, total_e))
}

/// Adaptive integral with interior break points (used when the integrand has
/// known kinks); each sub-interval gets its own tolerance share.
pub fn adaptive_gk_with_breaks<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<(f64, f64)> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let share = tol / (cuts.len() - 1) as f64;
    let mut value = 0.0;
    let mut err = 0.0;
    for pair in cuts.windows(2) {
        let (v, e) = adaptive_gk(f, pair[0], pair[1], share)?;
        value += v;
        err += e;
    }
    Ok((value, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // degree 2n-1 exact
        for n in [2usize, 5, 16, 64] {
            let rule = gl_on_interval(0.0, 1.0, n);
            let deg = 2 * n - 1;
            let val: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_abs_diff_eq!(val, 1.0 / (deg as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn gl_weights_sum_to_length() {
        let rule = gl_on_panels(&linear_edges(-3.0, 5.0, 7), 12);
        let s: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(s, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_handles_integrable_endpoint_singularity() {
        // ∫_0^1 1/sqrt(x) dx = 2
        let (v, _) = adaptive_gk(&|x: f64| x.sqrt().recip(), 1e-12, 1.0, 1e-9).unwrap();
        assert_abs_diff_eq!(v, 2.0 - 2e-6, epsilon = 1e-5);
    }

    #[test]
    fn adaptive_matches_gaussian_integral() {
        let (v, e) = adaptive_gk(&|x: f64| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-10);
        assert!(e < 1e-10);
    }

    #[test]
    fn breaks_split_kinked_integrand() {
        // |x - 0.3| on [0,1]: exact 0.3^2/2 + 0.7^2/2
        let f = |x: f64| (x - 0.3).abs();
        let (v, _) = adaptive_gk_with_breaks(&f, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.5 * (0.09 + 0.49), epsilon = 1e-12);
    }

    #[test]
    fn geometric_edges_cover_range() {
        let e = geometric_edges(1e-4, 1.0, 10);
        assert_eq!(e.len(), 11);
        assert_abs_diff_eq!(e[0], 1e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(*e.last().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            pv_cutoff: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
