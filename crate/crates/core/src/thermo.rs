//! Single-particle Hamiltonians, Fermi/model symbols, thermodynamic densities,
//! and the fixed-density chemical-potential solver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;

/// Surface area of the unit sphere S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => {
            // 2 π^{d/2} / Γ(d/2); only d ≤ 4 is exercised
            let g = if d % 2 == 0 {
                let mut v = 1.0;
                for k in 1..(d / 2) {
                    v *= k as f64;
                }
                v
            } else {
                // Γ(d/2) for odd d via Γ(1/2) = √π
                let mut v = std::f64::consts::PI.sqrt();
                let mut x = 0.5;
                while x < d as f64 / 2.0 - 0.25 {
                    v *= x;
                    x += 1.0;
                }
                v
            };
            2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / g
        }
    }
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Energy-momentum relation h with its homogeneous large-|ξ| limit h_∞ of
/// degree 2m and non-degeneracy constant ν.
#[derive(Clone)]
pub struct Hamiltonian {
    eval: VectorFn,
    limit: VectorFn,
    radial_eval: Option<RadialFn>,
    radial_limit: Option<RadialFn>,
    pub degree_half: u32,
    pub nondegeneracy: f64,
    pub dimension: usize,
    tag: String,
}

impl std::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hamiltonian({}, d={})", self.tag, self.dimension)
    }
}

impl Hamiltonian {
    /// h(ξ) = |ξ|²/2 (the ideal Fermi gas), m = 1, ν = 1/4.
    pub fn quadratic(dimension: usize) -> Result<Self> {
        check_dim(dimension)?;
        Ok(Hamiltonian {
            eval: Arc::new(|xi: &[f64]| 0.5 * norm_sq(xi)),
            limit: Arc::new(|xi: &[f64]| 0.5 * norm_sq(xi)),
            radial_eval: Some(Arc::new(|r| 0.5 * r * r)),
            radial_limit: Some(Arc::new(|r| 0.5 * r * r)),
            degree_half: 1,
            nondegeneracy: 0.25,
            dimension,
            tag: "quadratic".into(),
        })
    }

    /// h(ξ) = |ξ|⁴, m = 2, ν = 1/2.
    pub fn quartic(dimension: usize) -> Result<Self> {
        check_dim(dimension)?;
        Ok(Hamiltonian {
            eval: Arc::new(|xi: &[f64]| norm_sq(xi) * norm_sq(xi)),
            limit: Arc::new(|xi: &[f64]| norm_sq(xi) * norm_sq(xi)),
            radial_eval: Some(Arc::new(|r| r.powi(4))),
            radial_limit: Some(Arc::new(|r| r.powi(4))),
            degree_half: 2,
            nondegeneracy: 0.5,
            dimension,
            tag: "quartic".into(),
        })
    }

    /// h(ξ) = |ξ|²/2 + (1+|ξ|²)^{-1}: quadratic plus a bounded perturbation
    /// that dies at infinity; h_∞ = |ξ|²/2.
    pub fn quadratic_perturbed(dimension: usize) -> Result<Self> {
        check_dim(dimension)?;
        Ok(Hamiltonian {
            eval: Arc::new(|xi: &[f64]| {
                let s = norm_sq(xi);
                0.5 * s + 1.0 / (1.0 + s)
            }),
            limit: Arc::new(|xi: &[f64]| 0.5 * norm_sq(xi)),
            radial_eval: Some(Arc::new(|r| 0.5 * r * r + 1.0 / (1.0 + r * r))),
            radial_limit: Some(Arc::new(|r| 0.5 * r * r)),
            degree_half: 1,
            nondegeneracy: 0.25,
            dimension,
            tag: "quadratic_perturbed".into(),
        })
    }

    /// Escape hatch: a radial Hamiltonian h(r) with homogeneous limit
    /// h_∞(r) = coeff·r^{2m}. The caller supplies ν.
    pub fn custom_radial<F>(
        dimension: usize,
        h: F,
        limit_coeff: f64,
        degree_half: u32,
        nondegeneracy: f64,
        tag: &str,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    {
        check_dim(dimension)?;
        let h2 = h.clone();
        let m2 = 2 * degree_half as i32;
        let limit_radial = move |r: f64| limit_coeff * r.powi(m2);
        let lr = limit_radial.clone();
        Ok(Hamiltonian {
            eval: Arc::new(move |xi: &[f64]| h2(norm_sq(xi).sqrt())),
            limit: Arc::new(move |xi: &[f64]| lr(norm_sq(xi).sqrt())),
            radial_eval: Some(Arc::new(h)),
            radial_limit: Some(Arc::new(limit_radial)),
            degree_half,
            nondegeneracy,
            dimension,
            tag: tag.to_owned(),
        })
    }

    pub fn is_radial(&self) -> bool {
        self.radial_eval.is_some()
    }

    pub fn is_exactly_quadratic(&self) -> bool {
        self.tag == "quadratic"
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dimension);
        (self.eval)(xi)
    }

    pub fn eval_limit(&self, xi: &[f64]) -> f64 {
        (self.limit)(xi)
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        match &self.radial_eval {
            Some(f) => f(r),
            None => {
                let mut xi = vec![0.0; self.dimension];
                xi[0] = r;
                (self.eval)(&xi)
            }
        }
    }

    pub fn eval_limit_radial(&self, r: f64) -> f64 {
        match &self.radial_limit {
            Some(f) => f(r),
            None => {
                let mut xi = vec![0.0; self.dimension];
                xi[0] = r;
                (self.limit)(&xi)
            }
        }
    }

    /// Checks the structural conditions on (h, h_∞, m, ν) by sampling:
    /// homogeneity of h_∞, the lower bound min_{|ξ|=1} h_∞ ≥ 2ν, and decay of
    /// |ξ|^{-2m} |h - h_∞| along a ray.
    pub fn verify(&self) -> Result<()> {
        let m2 = 2.0 * self.degree_half as f64;
        let dirs = unit_directions(self.dimension);
        for dir in &dirs {
            for &t in &[0.5, 2.0, 7.5] {
                let scaled: Vec<f64> = dir.iter().map(|x| x * t).collect();
                let lhs = self.eval_limit(&scaled);
                let rhs = t.powf(m2) * self.eval_limit(dir);
                if (lhs - rhs).abs() > 1e-10 * rhs.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "h_inf not homogeneous of degree {m2}: {lhs} vs {rhs}"
                    )));
                }
            }
            if self.eval_limit(dir) < 2.0 * self.nondegeneracy - 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "h_inf violates non-degeneracy 2ν = {}",
                    2.0 * self.nondegeneracy
                )));
            }
        }
        let dir = &dirs[0];
        let mut prev = f64::INFINITY;
        for &t in &[4.0, 16.0, 64.0, 256.0] {
            let scaled: Vec<f64> = dir.iter().map(|x| x * t).collect();
            let rel = (self.eval(&scaled) - self.eval_limit(&scaled)).abs() / t.powf(m2);
            if rel > prev + 1e-12 {
                return Err(Error::InvalidParameter(
                    "|ξ|^{-2m} |h - h_inf| is not decreasing along the sampled ray".into(),
                ));
            }
            prev = rel;
        }
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 2 or 3, got {d}"
        )));
    }
    Ok(())
}

fn norm_sq(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum()
}

fn unit_directions(d: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e);
    }
    let mut diag = vec![1.0 / (d as f64).sqrt(); d];
    diag[0] = -diag[0];
    dirs.push(diag);
    dirs
}

/// Overflow-safe logistic 1/(1+e^w).
#[inline]
pub fn logistic_neg(w: f64) -> f64 {
    if w >= 0.0 {
        let e = (-w).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + w.exp())
    }
}

/// Momentum-space symbol a(ξ): the Fermi symbol and its high-temperature
/// relatives. All catalog symbols are even; the catalog Hamiltonians make them
/// radial as well.
#[derive(Clone)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub dimension: usize,
}

#[derive(Clone)]
pub enum SymbolKind {
    /// a_{T,μ}(ξ) = 1/(1 + e^{(h(ξ)-μ)/T}).
    Fermi {
        h: Hamiltonian,
        temperature: f64,
        mu: f64,
    },
    /// p_T(ξ) = 1/(φ_T + ω_T e^{h(ξ)/T}).
    Model {
        h: Hamiltonian,
        phi: f64,
        omega: f64,
        temperature: f64,
    },
    /// p_∞(ξ) = (1 + e^{h_∞(ξ)})^{-1} ≤ 1/2.
    LimitFermi { h: Hamiltonian },
    /// e^{-h_∞(ξ)} ≤ 1, the classical Boltzmann factor.
    Boltzmann { h: Hamiltonian },
    /// e^{-scale·|ξ|²/2}.
    Gaussian { scale: f64 },
    /// Black-box even symbol; `radial_profile` unlocks the radial fast paths.
    Custom {
        f: VectorFn,
        radial_profile: Option<RadialFn>,
        tag: String,
    },
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Symbol({}, d={})", self.tag(), self.dimension)
    }
}

impl Symbol {
    pub fn fermi(h: Hamiltonian, temperature: f64, mu: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        let dimension = h.dimension;
        Ok(Symbol {
            kind: SymbolKind::Fermi {
                h,
                temperature,
                mu,
            },
            dimension,
        })
    }

    pub fn model(h: Hamiltonian, phi: f64, omega: f64, temperature: f64) -> Result<Self> {
        if phi < 0.0 || !(omega > 0.0) || !(temperature > 0.0) {
            return Err(Error::InvalidParameter(
                "model symbol needs φ ≥ 0, ω > 0, T > 0".into(),
            ));
        }
        let dimension = h.dimension;
        Ok(Symbol {
            kind: SymbolKind::Model {
                h,
                phi,
                omega,
                temperature,
            },
            dimension,
        })
    }

    pub fn limit_fermi(h: Hamiltonian) -> Self {
        let dimension = h.dimension;
        Symbol {
            kind: SymbolKind::LimitFermi { h },
            dimension,
        }
    }

    pub fn boltzmann(h: Hamiltonian) -> Self {
        let dimension = h.dimension;
        Symbol {
            kind: SymbolKind::Boltzmann { h },
            dimension,
        }
    }

    pub fn gaussian(dimension: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter("gaussian scale must be > 0".into()));
        }
        check_dim(dimension)?;
        Ok(Symbol {
            kind: SymbolKind::Gaussian { scale },
            dimension,
        })
    }

    pub fn custom<F>(dimension: usize, f: F, tag: &str) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Symbol {
            kind: SymbolKind::Custom {
                f: Arc::new(f),
                radial_profile: None,
                tag: tag.to_owned(),
            },
            dimension,
        }
    }

    pub fn custom_radial<F>(dimension: usize, f: F, tag: &str) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Symbol {
            kind: SymbolKind::Custom {
                f: Arc::new(move |_: &[f64]| unreachable!("radial profile used")),
                radial_profile: Some(Arc::new(f)),
                tag: tag.to_owned(),
            },
            dimension,
        }
    }

    pub fn tag(&self) -> String {
        match &self.kind {
            SymbolKind::Fermi {
                temperature, mu, h, ..
            } => format!("fermi_{}_T{}_mu{}", h.tag(), temperature, mu),
            SymbolKind::Model { phi, omega, h, .. } => {
                format!("model_{}_phi{}_om{}", h.tag(), phi, omega)
            }
            SymbolKind::LimitFermi { h } => format!("limit_fermi_{}", h.tag()),
            SymbolKind::Boltzmann { h } => format!("boltzmann_{}", h.tag()),
            SymbolKind::Gaussian { scale } => format!("gaussian_{scale}"),
            SymbolKind::Custom { tag, .. } => tag.clone(),
        }
    }

    pub fn is_radial(&self) -> bool {
        match &self.kind {
            SymbolKind::Fermi { h, .. } | SymbolKind::Model { h, .. } => h.is_radial(),
            SymbolKind::LimitFermi { h } | SymbolKind::Boltzmann { h } => h.is_radial(),
            SymbolKind::Gaussian { .. } => true,
            SymbolKind::Custom { radial_profile, .. } => radial_profile.is_some(),
        }
    }

    /// Catalog symbols are even by construction; customs declare evenness by
    /// providing a radial profile (general even customs are accepted too, the
    /// caller vouches for them).
    pub fn is_even(&self) -> bool {
        true
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match &self.kind {
            SymbolKind::Fermi {
                h,
                temperature,
                mu,
            } => logistic_neg((h.eval(xi) - mu) / temperature),
            SymbolKind::Model {
                h,
                phi,
                omega,
                temperature,
            } => model_value(h.eval(xi) / temperature, *phi, *omega),
            SymbolKind::LimitFermi { h } => logistic_neg(h.eval_limit(xi)),
            SymbolKind::Boltzmann { h } => (-h.eval_limit(xi)).exp(),
            SymbolKind::Gaussian { scale } => (-0.5 * scale * norm_sq(xi)).exp(),
            SymbolKind::Custom {
                f, radial_profile, ..
            } => match radial_profile {
                Some(g) => g(norm_sq(xi).sqrt()),
                None => f(xi),
            },
        }
    }

    /// Radial profile a(r); falls back to the first axis for non-radial
    /// symbols (callers check `is_radial` first).
    pub fn eval_radial(&self, r: f64) -> f64 {
        match &self.kind {
            SymbolKind::Fermi {
                h,
                temperature,
                mu,
            } => logistic_neg((h.eval_radial(r) - mu) / temperature),
            SymbolKind::Model {
                h,
                phi,
                omega,
                temperature,
            } => model_value(h.eval_radial(r) / temperature, *phi, *omega),
            SymbolKind::LimitFermi { h } => logistic_neg(h.eval_limit_radial(r)),
            SymbolKind::Boltzmann { h } => (-h.eval_limit_radial(r)).exp(),
            SymbolKind::Gaussian { scale } => (-0.5 * scale * r * r).exp(),
            SymbolKind::Custom { radial_profile, f, .. } => match radial_profile {
                Some(g) => g(r),
                None => {
                    let mut xi = vec![0.0; self.dimension];
                    xi[0] = r;
                    f(&xi)
                }
            },
        }
    }

    /// Radius beyond which the symbol is below ~1e-14, found by doubling.
    pub fn support_radius(&self) -> f64 {
        let mut r = 1.0;
        while self.eval_radial(r).abs() > 1e-14 && r < 1e4 {
            r *= 1.25;
        }
        r
    }

    /// The high-temperature change of variables ξ ↦ T^{1/2m} ξ applied to a
    /// Fermi/model symbol. For the exactly quadratic Hamiltonian this is again
    /// a Fermi symbol at temperature 1 with chemical potential μ/T, which
    /// keeps the closed-form kernel route available.
    pub fn rescale_high_t(&self) -> Result<Symbol> {
        match &self.kind {
            SymbolKind::Fermi {
                h,
                temperature,
                mu,
            } => {
                if h.is_exactly_quadratic() {
                    return Symbol::fermi(h.clone(), 1.0, mu / temperature);
                }
                let hh = h.clone();
                let (t, m) = (*temperature, *mu);
                let scale = t.powf(1.0 / (2.0 * h.degree_half as f64));
                let d = self.dimension;
                if h.is_radial() {
                    Ok(Symbol::custom_radial(
                        d,
                        move |r| logistic_neg((hh.eval_radial(scale * r) - m) / t),
                        &format!("fermi_rescaled_{}_T{}", h.tag(), t),
                    ))
                } else {
                    Ok(Symbol::custom(
                        d,
                        move |xi| {
                            let scaled: Vec<f64> = xi.iter().map(|x| scale * x).collect();
                            logistic_neg((hh.eval(&scaled) - m) / t)
                        },
                        &format!("fermi_rescaled_{}_T{}", h.tag(), t),
                    ))
                }
            }
            SymbolKind::Model {
                h,
                phi,
                omega,
                temperature,
            } => {
                let hh = h.clone();
                let (t, p, o) = (*temperature, *phi, *omega);
                let scale = t.powf(1.0 / (2.0 * h.degree_half as f64));
                Ok(Symbol::custom_radial(
                    self.dimension,
                    move |r| model_value(hh.eval_radial(scale * r) / t, p, o),
                    &format!("model_rescaled_{}_T{}", h.tag(), t),
                ))
            }
            _ => Ok(self.clone()),
        }
    }
}

#[inline]
fn model_value(w: f64, phi: f64, omega: f64) -> f64 {
    // 1/(φ + ω e^w), safe for large w
    if w > 0.0 {
        let e = (-w).exp();
        e / (phi * e + omega)
    } else {
        1.0 / (phi + omega * w.exp())
    }
}

/// eval_symbol per the module contract; thin wrapper kept for parity with the
/// operation catalog.
pub fn eval_symbol(a: &Symbol, xi: &[f64]) -> Result<f64> {
    if xi.len() != a.dimension {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: symbol is {}-d, point is {}-d",
            a.dimension,
            xi.len()
        )));
    }
    Ok(a.eval(xi))
}

/// ∫_{ℝ^d} g(a(ξ)) dξ for a radial symbol, by composite GL with geometric
/// domain doubling until the increment falls below the tolerance.
fn radial_momentum_integral<G: Fn(f64) -> f64>(
    a: &Symbol,
    g: G,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let d = a.dimension;
    let area = sphere_area(d);
    let nodes = quad.nodes_per_axis.max(16);
    let mut upper = if quad.xi_radius > 0.0 {
        quad.xi_radius
    } else {
        a.support_radius().max(4.0)
    };
    let integrate_to = |hi: f64| -> f64 {
        let panels = ((hi * 2.0).ceil() as usize).clamp(8, 400);
        let mut acc = 0.0;
        for (r, w) in gl_on_panels_cached(hi, panels, nodes) {
            acc += w * g(a.eval_radial(r)) * r.powi(d as i32 - 1);
        }
        acc
    };
    let mut value = integrate_to(upper);
    for _ in 0..12 {
        let wider = integrate_to(upper * 1.5);
        let diff = (wider - value).abs();
        if diff <= quad.tolerance * 0.1 * value.abs().max(1e-30) {
            return Ok(area * wider);
        }
        upper *= 1.5;
        value = wider;
    }
    Err(Error::QuadratureNotConverged {
        residual: f64::NAN,
        tolerance: quad.tolerance,
    })
}

fn gl_on_panels_cached(hi: f64, panels: usize, nodes: usize) -> Vec<(f64, f64)> {
    crate::quad::gl_on_panels(&crate::quad::linear_edges(0.0, hi, panels), nodes)
}

/// Tensor-product integral ∫ g(a(ξ)) dξ over [-R, R]^d for non-radial symbols.
fn tensor_momentum_integral<G: Fn(f64) -> f64 + Sync>(
    a: &Symbol,
    g: G,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let d = a.dimension;
    let hi = if quad.xi_radius > 0.0 {
        quad.xi_radius
    } else {
        a.support_radius().max(4.0) * 1.5
    };
    let per_axis = quad.nodes_per_axis.max(12);
    let panels = (hi.ceil() as usize * 2).clamp(8, if d == 3 { 24 } else { 96 });
    let rule = gl_on_panels_cached(hi, panels, per_axis);
    let full: Vec<(f64, f64)> = rule
        .iter()
        .flat_map(|&(x, w)| [(x, w), (-x, w)])
        .collect();
    let mut acc = 0.0;
    match d {
        2 => {
            for &(x, wx) in &full {
                for &(y, wy) in &full {
                    acc += wx * wy * g(a.eval(&[x, y]));
                }
            }
        }
        3 => {
            for &(x, wx) in &full {
                for &(y, wy) in &full {
                    for &(z, wz) in &full {
                        acc += wx * wy * wz * g(a.eval(&[x, y, z]));
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidParameter(
                "tensor quadrature supports d in {2,3}".into(),
            ))
        }
    }
    Ok(acc)
}

/// ∫ g(a(ξ)) dξ / (2π)^d with the radial fast path.
pub fn momentum_average<G: Fn(f64) -> f64 + Sync>(
    a: &Symbol,
    g: G,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let raw = if a.is_radial() {
        radial_momentum_integral(a, g, quad)?
    } else {
        tensor_momentum_integral(a, g, quad)?
    };
    Ok(raw / (2.0 * std::f64::consts::PI).powi(a.dimension as i32))
}

/// Mean particle density ϱ(T,μ) = (2π)^{-d} ∫ a_{T,μ}(ξ) dξ.
pub fn particle_density(
    h: &Hamiltonian,
    temperature: f64,
    mu: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let a = Symbol::fermi(h.clone(), temperature, mu)?;
    momentum_average(&a, |v| v, quad)
}

/// Entropy density s_γ(T,μ) = (2π)^{-d} ∫ η_γ(a_{T,μ}(ξ)) dξ ≥ 0.
pub fn entropy_density(
    h: &Hamiltonian,
    temperature: f64,
    mu: f64,
    gamma: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let f = crate::entropy::EntropyFunction::renyi(gamma)?;
    let a = Symbol::fermi(h.clone(), temperature, mu)?;
    momentum_average(&a, |v| f.eval(v), quad)
}

/// Symbol-space density (2π)^{-d} ∫ f(a(ξ)) dξ for arbitrary f and symbol.
pub fn symbol_density(
    a: &Symbol,
    f: &crate::entropy::EntropyFunction,
    quad: &QuadratureSpec,
) -> Result<f64> {
    momentum_average(a, |v| f.eval(v), quad)
}

/// Integrated density of states 𝒩(E) = (2π)^{-d} vol{h < E}, radial route:
/// the sub-level set is a union of shells located by sampling + bisection.
pub fn integrated_dos(h: &Hamiltonian, level: f64) -> Result<f64> {
    if !h.is_radial() {
        return Err(Error::InvalidParameter(
            "integrated_dos implements the radial fast path only".into(),
        ));
    }
    if !(level > 0.0) {
        return Ok(0.0);
    }
    let d = h.dimension;
    // Find an outer radius beyond which h stays above the level.
    let mut outer = 1.0;
    let mut guard = 0;
    loop {
        if (1..=8).all(|k| h.eval_radial(outer * (1.0 + 0.1 * k as f64)) > level) {
            break;
        }
        outer *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::UnboundedSubLevelSet(level));
        }
    }
    outer *= 2.0;
    // Locate sign changes of h - level on a fine grid, refine by bisection.
    let n = 20_000;
    let mut crossings = vec![0.0f64];
    let mut prev_inside = h.eval_radial(0.0) < level;
    let mut prev_r = 0.0;
    for i in 1..=n {
        let r = outer * i as f64 / n as f64;
        let inside = h.eval_radial(r) < level;
        if inside != prev_inside {
            let (mut lo, mut hi) = (prev_r, r);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (h.eval_radial(mid) < level) == prev_inside {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(0.5 * (lo + hi));
            prev_inside = inside;
        }
        prev_r = r;
    }
    crossings.push(outer);
    // Sum |shell| = ω_{d-1} (r2^d - r1^d)/d over inside-shells.
    let mut vol = 0.0;
    let mut inside = h.eval_radial(0.0) < level;
    for pair in crossings.windows(2) {
        if inside {
            vol += (pair[1].powi(d as i32) - pair[0].powi(d as i32)) / d as f64;
        }
        inside = !inside;
    }
    vol *= sphere_area(d);
    Ok(vol / (2.0 * std::f64::consts::PI).powi(d as i32))
}

/// κ = (2π)^{-d} ∫ e^{-h_∞(ξ)} dξ.
pub fn kappa(h: &Hamiltonian, quad: &QuadratureSpec) -> Result<f64> {
    let b = Symbol::boltzmann(h.clone());
    momentum_average(&b, |v| v, quad)
}

/// λ_T = ρ T^{-d/2m} / κ.
pub fn lambda_t(rho: f64, temperature: f64, h: &Hamiltonian, quad: &QuadratureSpec) -> Result<f64> {
    if !(rho > 0.0) || !(temperature > 0.0) {
        return Err(Error::InvalidParameter("lambda_T needs ρ > 0, T > 0".into()));
    }
    let k = kappa(h, quad)?;
    let expo = -(h.dimension as f64) / (2.0 * h.degree_half as f64);
    Ok(rho * temperature.powf(expo) / k)
}

/// Result of the chemical-potential solve at fixed density.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MuSolution {
    pub mu: f64,
    /// |ϱ(T, μ*) - ρ| at the returned μ*.
    pub density_residual: f64,
    /// e^{-μ*/T} λ_T, which tends to 1 in the high-temperature limit.
    pub fugacity_diagnostic: f64,
}

/// Solves ϱ(T, μ) = ρ for μ by bracketing + bisection; ϱ is strictly
/// increasing in μ.
pub fn solve_mu(h: &Hamiltonian, temperature: f64, rho: f64, tol: f64) -> Result<MuSolution> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "solve_mu needs ρ > 0, got {rho}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("solve_mu needs tol > 0".into()));
    }
    let quad = QuadratureSpec {
        tolerance: (tol * 1e-2).max(1e-13),
        ..Default::default()
    };
    let density = |mu: f64| particle_density(h, temperature, mu, &quad);

    // Geometric bracket expansion starting at ±50 T.
    let cap = 1e6 * temperature.max(1.0);
    let mut lo = -50.0 * temperature.max(1.0);
    let mut hi = 50.0 * temperature.max(1.0);
    let mut f_lo = density(lo)? - rho;
    let mut f_hi = density(hi)? - rho;
    let mut guard = 0;
    while f_lo > 0.0 {
        lo *= 2.0;
        if lo < -cap || guard > 40 {
            return Err(Error::BracketNotFound { lo, hi });
        }
        f_lo = density(lo)? - rho;
        guard += 1;
    }
    while f_hi < 0.0 {
        hi *= 2.0;
        if hi > cap || guard > 80 {
            return Err(Error::BracketNotFound { lo, hi });
        }
        f_hi = density(hi)? - rho;
        guard += 1;
    }
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        mu = 0.5 * (lo + hi);
        let f_mid = density(mu)? - rho;
        if f_mid.abs() <= tol {
            break;
        }
        if f_mid < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
    }
    let residual = (density(mu)? - rho).abs();
    if residual > tol {
        return Err(Error::QuadratureNotConverged {
            residual,
            tolerance: tol,
        });
    }
    let lam = lambda_t(rho, temperature, h, &quad)?;
    Ok(MuSolution {
        mu,
        density_residual: residual,
        fugacity_diagnostic: (-mu / temperature).exp() * lam,
    })
}
