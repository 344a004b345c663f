//! Dirichlet, Beta and Generalized Dirichlet sampling and densities.
//!
//! The Generalized Dirichlet uses the stick-breaking parameterization: for
//! `X ~ GD(a_1..a_k; b_1..b_k)` the fractions `zeta_j = X_j / (1 - X_1 - ... - X_{j-1})`
//! are independent `Beta(a_j, b_j)` and `X_{k+1}` is the residual.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

use crate::error::{Error, Result};

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_positive(name: &str, params: &[f64]) -> Result<()> {
    if params.is_empty() {
        return Err(Error::Dimension(format!("{name} is empty")));
    }
    if let Some(p) = params.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::Parameter(format!("{name} contains non-positive value {p}")));
    }
    Ok(())
}

pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0)
        .map_err(|e| Error::Parameter(format!("gamma shape {shape}: {e}")))?;
    Ok(g.sample(rng))
}

pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let beta = Beta::new(a, b).map_err(|e| Error::Parameter(format!("beta({a}, {b}): {e}")))?;
    Ok(beta.sample(rng))
}

/// Normalized independent Gamma draws.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_positive("alpha", alpha)?;
    let mut x = Vec::with_capacity(alpha.len());
    for &a in alpha {
        x.push(sample_gamma(a, rng)?);
    }
    let total: f64 = x.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("all gamma draws underflowed".into()));
    }
    x.iter_mut().for_each(|v| *v /= total);
    Ok(x)
}

/// Log-density of `Dirichlet(alpha)` at a full simplex point `x`.
pub fn dirichlet_logpdf(x: &[f64], alpha: &[f64]) -> Result<f64> {
    check_positive("alpha", alpha)?;
    if x.len() != alpha.len() {
        return Err(Error::Dimension(format!(
            "point has {} components, alpha has {}",
            x.len(),
            alpha.len()
        )));
    }
    if x.iter().any(|&v| !(v > 0.0 && v < 1.0)) && x.len() > 1 {
        return Err(Error::Domain("point on the simplex boundary".into()));
    }
    let a0: f64 = alpha.iter().sum();
    let mut lp = ln_gamma(a0);
    for (&xi, &ai) in x.iter().zip(alpha) {
        lp += (ai - 1.0) * xi.ln() - ln_gamma(ai);
    }
    Ok(lp)
}

/// Shape parameters `(a_1..a_k; b_1..b_k)` of a Generalized Dirichlet.
#[derive(Debug, Clone, PartialEq)]
pub struct GDParams {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl GDParams {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "GD shapes have lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        check_positive("a", &a)?;
        check_positive("b", &b)?;
        Ok(GDParams { a, b })
    }

    /// Number of free components `k`; draws have `k + 1` entries.
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Mean of the full `(k+1)`-vector; the sticks are independent so the
    /// expectation factorizes.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim() + 1);
        let mut rest = 1.0;
        for (&a, &b) in self.a.iter().zip(&self.b) {
            let m = a / (a + b);
            out.push(m * rest);
            rest *= 1.0 - m;
        }
        out.push(rest);
        out
    }
}

/// Log-density at the free components `x_1..x_k`.
pub fn gd_logpdf(x: &[f64], p: &GDParams) -> Result<f64> {
    let k = p.dim();
    if x.len() != k {
        return Err(Error::Dimension(format!(
            "point has {} free components, expected {k}",
            x.len()
        )));
    }
    let mut lp = 0.0;
    let mut remaining = 1.0;
    for j in 0..k {
        let xj = x[j];
        remaining -= xj;
        if !(xj > 0.0) || !(remaining > 0.0) {
            return Err(Error::Domain(format!(
                "component {} on the simplex boundary",
                j + 1
            )));
        }
        let exponent = if j + 1 < k {
            p.b[j] - p.a[j + 1] - p.b[j + 1]
        } else {
            p.b[j] - 1.0
        };
        lp += (p.a[j] - 1.0) * xj.ln() + exponent * remaining.ln() - ln_beta(p.a[j], p.b[j]);
    }
    Ok(lp)
}

/// Stick-breaking draw; returns all `k + 1` components.
pub fn sample_gd<R: Rng + ?Sized>(p: &GDParams, rng: &mut R) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(p.dim() + 1);
    let mut rest = 1.0;
    for (&a, &b) in p.a.iter().zip(&p.b) {
        let zeta = sample_beta(a, b, rng)?;
        out.push(zeta * rest);
        rest *= 1.0 - zeta;
    }
    out.push(rest);
    Ok(out)
}
