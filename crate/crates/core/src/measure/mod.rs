//! Probability-measure models: 1D grid measures built from potentials by
//! trapezoidal quadrature, n-dimensional product-plus-perturbation and
//! radial models, their moments and curvature tails, and seeded samplers.

pub mod hessian;
pub mod nd;
pub mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation threshold relative to the density peak.
pub const TAIL_TOL: f64 = 1e-14;

/// One-dimensional potential V defining dmu = e^{-V} dx / Z.
///
/// `d2v` of `|x|^p` with p < 2 is regularized as `p (p-1) (|x|+eps)^{p-2}`,
/// eps = 1e-8, only where second derivatives are evaluated; the potential
/// itself is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Potential1D {
    /// `x^2 / 2` on the line (standard Gaussian weight).
    Gaussian,
    /// `|x|^p` on the line.
    Subbotin { p: f64 },
    /// 0 on the open interval (a, b).
    Uniform { a: f64, b: f64 },
    /// `a (x^2 - 1)^2`: two wells at +-1, barrier height a. Not convex;
    /// negative `a` gives a non-normalizable density for failure-path tests.
    DoubleWell { a: f64 },
    /// Piecewise-linear potential on the closed span of its knots.
    Custom1d { knots: Vec<(f64, f64)> },
}

const D2_REG_EPS: f64 = 1e-8;

impl Potential1D {
    pub fn v(&self, x: f64) -> f64 {
        match self {
            Potential1D::Gaussian => 0.5 * x * x,
            Potential1D::Subbotin { p } => x.abs().powf(*p),
            Potential1D::Uniform { .. } => 0.0,
            Potential1D::DoubleWell { a } => a * (x * x - 1.0).powi(2),
            Potential1D::Custom1d { knots } => {
                let (i, w) = locate(knots, x);
                knots[i].1 + w * (knots[i + 1].1 - knots[i].1)
            }
        }
    }

    pub fn dv(&self, x: f64) -> f64 {
        match self {
            Potential1D::Gaussian => x,
            Potential1D::Subbotin { p } => {
                if x == 0.0 {
                    0.0
                } else {
                    p * x.abs().powf(p - 1.0) * x.signum()
                }
            }
            Potential1D::Uniform { .. } => 0.0,
            Potential1D::DoubleWell { a } => 4.0 * a * x * (x * x - 1.0),
            Potential1D::Custom1d { knots } => {
                let (i, _) = locate(knots, x);
                (knots[i + 1].1 - knots[i].1) / (knots[i + 1].0 - knots[i].0)
            }
        }
    }

    pub fn d2v(&self, x: f64) -> f64 {
        match self {
            Potential1D::Gaussian => 1.0,
            Potential1D::Subbotin { p } => {
                if *p < 2.0 {
                    p * (p - 1.0) * (x.abs() + D2_REG_EPS).powf(p - 2.0)
                } else {
                    p * (p - 1.0) * x.abs().powf(p - 2.0)
                }
            }
            Potential1D::Uniform { .. } => 0.0,
            Potential1D::DoubleWell { a } => a * (12.0 * x * x - 4.0),
            Potential1D::Custom1d { .. } => 0.0,
        }
    }

    /// Working domain; unbounded ends are +-inf.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Potential1D::Gaussian | Potential1D::Subbotin { .. } | Potential1D::DoubleWell { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Potential1D::Uniform { a, b } => (*a, *b),
            Potential1D::Custom1d { knots } => (knots[0].0, knots[knots.len() - 1].0),
        }
    }

    /// Symmetric under x -> -x (domain included).
    pub fn is_even(&self) -> bool {
        match self {
            Potential1D::Gaussian
            | Potential1D::Subbotin { .. }
            | Potential1D::DoubleWell { .. } => true,
            Potential1D::Uniform { a, b } => (a + b).abs() < 1e-12,
            Potential1D::Custom1d { knots } => {
                let (lo, hi) = (knots[0].0, knots[knots.len() - 1].0);
                if (lo + hi).abs() > 1e-12 {
                    return false;
                }
                (0..=100).all(|i| {
                    let x = lo + (hi - lo) * i as f64 / 100.0;
                    (self.v(x) - self.v(-x)).abs() < 1e-9
                })
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Potential1D::Gaussian | Potential1D::Uniform { .. } => true,
            Potential1D::Subbotin { p } => *p >= 1.0,
            Potential1D::DoubleWell { .. } => false,
            Potential1D::Custom1d { knots } => {
                knots.windows(3).all(|w| {
                    let s0 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    let s1 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
                    s1 >= s0 - 1e-12
                })
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential1D::Gaussian => Ok(()),
            Potential1D::Subbotin { p } => {
                if p.is_finite() && *p > 0.0 {
                    Ok(())
                } else {
                    Err(Error::model(format!("subbotin exponent must be positive, got {p}")))
                }
            }
            Potential1D::Uniform { a, b } => {
                if a.is_finite() && b.is_finite() && a < b {
                    Ok(())
                } else {
                    Err(Error::model(format!("uniform needs finite a < b, got ({a}, {b})")))
                }
            }
            Potential1D::DoubleWell { a } => {
                if a.is_finite() && *a != 0.0 {
                    Ok(())
                } else {
                    Err(Error::model("double well needs a nonzero height"))
                }
            }
            Potential1D::Custom1d { knots } => {
                if knots.len() < 2 {
                    return Err(Error::model("custom potential needs at least 2 knots"));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::model("custom knots must be strictly increasing in x"));
                    }
                }
                if knots.iter().any(|&(x, v)| !x.is_finite() || !v.is_finite()) {
                    return Err(Error::model("custom knots must be finite"));
                }
                Ok(())
            }
        }?;
        // probe: v finite across the working domain (bounded part)
        let (lo, hi) = self.domain();
        let (lo, hi) = (lo.max(-1e3), hi.min(1e3));
        for i in 0..=10_000 {
            let x = lo + (hi - lo) * i as f64 / 10_000.0;
            if !self.v(x).is_finite() {
                return Err(Error::model(format!("potential not finite at x = {x}")));
            }
        }
        // probe: claimed convexity backed by the second derivative
        if self.is_convex() {
            for i in 0..=256 {
                let x = lo + (hi - lo) * i as f64 / 256.0;
                if self.d2v(x) < -1e-9 {
                    return Err(Error::model(format!(
                        "convexity violated: d2v({x}) = {}",
                        self.d2v(x)
                    )));
                }
            }
        }
        Ok(())
    }
}

fn locate(knots: &[(f64, f64)], x: f64) -> (usize, f64) {
    let n = knots.len();
    if x <= knots[0].0 {
        return (0, 0.0);
    }
    if x >= knots[n - 1].0 {
        return (n - 2, 1.0);
    }
    let i = knots.partition_point(|&(k, _)| k <= x) - 1;
    let i = i.min(n - 2);
    let w = (x - knots[i].0) / (knots[i + 1].0 - knots[i].0);
    (i, w)
}

/// A probability measure on a uniform 1D grid: trapezoidal quadrature of
/// e^{-V}, normalized. The numerical stand-in for the continuum measure.
#[derive(Clone, Debug)]
pub struct GridMeasure1D {
    potential: Potential1D,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
    /// log-density shift (min of V on the grid) used to avoid underflow.
    vshift: f64,
    /// normalization in shifted units: sum of e^{-(V-vshift)} * cell.
    zt: f64,
    /// working interval after truncation.
    span: (f64, f64),
}

/// Mean, variance, oscillation and gradient energy of a grid function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub mean: f64,
    pub variance: f64,
    pub osc: f64,
    pub grad_energy: f64,
}

/// Truncate the domain where the density drops below `tail_tol` times its
/// peak, lay a uniform grid of `resolution` nodes, and normalize.
pub fn build_grid(pot: &Potential1D, resolution: usize, tail_tol: f64) -> Result<GridMeasure1D> {
    pot.validate()?;
    if resolution < 16 {
        return Err(Error::config(format!("resolution must be >= 16, got {resolution}")));
    }
    if resolution > 1_000_000 {
        return Err(Error::config(format!("resolution {resolution} is unreasonably large")));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::config(format!("tail_tol must lie in (0,1), got {tail_tol}")));
    }
    let (dlo, dhi) = pot.domain();
    let (a, b, vmin) = if dlo.is_finite() && dhi.is_finite() {
        let vmin = scan_min(pot, dlo, dhi);
        (dlo, dhi, vmin)
    } else {
        truncate_domain(pot, (1.0 / tail_tol).ln())?
    };

    let n = resolution;
    let h = (b - a) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    let mut weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cell = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            (-(pot.v(x) - vmin)).exp() * cell
        })
        .collect();
    let zt: f64 = weights.iter().sum();
    if !(zt.is_finite() && zt > 0.0) {
        return Err(Error::model("density quadrature degenerate: normalization is not positive"));
    }
    for w in &mut weights {
        *w /= zt;
    }

    // Tail check: one extra doubling of the domain must carry < 1e-10 of the
    // mass. Bounded native domains are exact and skip it.
    if !(dlo.is_finite() && dhi.is_finite()) {
        let half = 0.5 * (b - a);
        let extra = side_mass(pot, vmin, b, b + half) + side_mass(pot, vmin, a - half, a);
        if extra / zt >= 1e-10 {
            return Err(Error::model(format!(
                "truncated tail mass {:.3e} exceeds 1e-10: density decays too slowly",
                extra / zt
            )));
        }
    }

    let total: f64 = weights.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-12);
    Ok(GridMeasure1D { potential: pot.clone(), nodes, weights, h, vshift: vmin, zt, span: (a, b) })
}

fn scan_min(pot: &Potential1D, lo: f64, hi: f64) -> f64 {
    (0..=4096)
        .map(|i| pot.v(lo + (hi - lo) * i as f64 / 4096.0))
        .fold(f64::INFINITY, f64::min)
}

/// Expand symmetrically by doubling until V - Vmin exceeds `target` at both
/// ends, then tighten each edge to the crossing by bisection.
fn truncate_domain(pot: &Potential1D, target: f64) -> Result<(f64, f64, f64)> {
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    let mut vmin = scan_min(pot, lo, hi);
    let mut ok = false;
    for _ in 0..56 {
        if pot.v(lo) - vmin >= target && pot.v(hi) - vmin >= target {
            ok = true;
            break;
        }
        if pot.v(lo) - vmin < target {
            lo *= 2.0;
        }
        if pot.v(hi) - vmin < target {
            hi *= 2.0;
        }
        vmin = vmin.min(scan_min(pot, lo, hi));
    }
    if !ok {
        return Err(Error::model(
            "density is not integrable: domain doubling never exhausted the mass",
        ));
    }
    // argmin for the edge bisections
    let xmin = (0..=4096)
        .map(|i| lo + (hi - lo) * i as f64 / 4096.0)
        .min_by(|a, b| pot.v(*a).partial_cmp(&pot.v(*b)).expect("finite"))
        .expect("nonempty scan");
    let cut = |mut inner: f64, mut outer: f64| -> f64 {
        // V - vmin crosses `target` between inner (< target) and outer (>=)
        for _ in 0..80 {
            let m = 0.5 * (inner + outer);
            if pot.v(m) - vmin >= target {
                outer = m;
            } else {
                inner = m;
            }
        }
        outer
    };
    let a = cut(xmin, lo);
    let b = cut(xmin, hi);
    Ok((a, b, vmin))
}

fn side_mass(pot: &Potential1D, vshift: f64, lo: f64, hi: f64) -> f64 {
    let n = 512;
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let x = lo + h * i as f64;
            let cell = if i == 0 || i == n { 0.5 * h } else { h };
            (-(pot.v(x) - vshift)).exp() * cell
        })
        .sum()
}

impl GridMeasure1D {
    pub fn potential(&self) -> &Potential1D {
        &self.potential
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    /// Estimate of the continuum normalization Z = int e^{-V} dx.
    pub fn z(&self) -> f64 {
        self.zt * (-self.vshift).exp()
    }

    /// Normalized density at an arbitrary point of the working interval
    /// (used for the conductances of the discrete generator).
    pub fn normalized_density(&self, x: f64) -> f64 {
        (-(self.potential.v(x) - self.vshift)).exp() / self.zt
    }

    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x)
    }

    pub fn second_moment(&self) -> f64 {
        self.expectation(|x| x * x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// mu(|x| >= r).
    pub fn tail_mass(&self, r: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(&x, _)| x.abs() >= r)
            .map(|(_, &w)| w)
            .sum()
    }

    /// Smallest node at which the cumulative mass reaches q.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w;
            if acc >= q {
                return x;
            }
        }
        *self.nodes.last().expect("nonempty grid")
    }

    /// Mean, variance, oscillation, and gradient energy of a grid function
    /// (centered differences inside, one-sided at the ends).
    pub fn functionals(&self, f: &[f64]) -> Result<Functionals> {
        if f.len() != self.nodes.len() {
            return Err(Error::model(format!(
                "grid function has {} values for {} nodes",
                f.len(),
                self.nodes.len()
            )));
        }
        let mean: f64 = f.iter().zip(&self.weights).map(|(&v, &w)| w * v).sum();
        let variance: f64 =
            f.iter().zip(&self.weights).map(|(&v, &w)| w * v * v).sum::<f64>() - mean * mean;
        let osc = f.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - f.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let n = f.len();
        let grad_energy: f64 = (0..n)
            .map(|i| {
                let g = if i == 0 {
                    (f[1] - f[0]) / self.h
                } else if i == n - 1 {
                    (f[n - 1] - f[n - 2]) / self.h
                } else {
                    (f[i + 1] - f[i - 1]) / (2.0 * self.h)
                };
                self.weights[i] * g * g
            })
            .sum();
        Ok(Functionals { mean, variance: variance.max(0.0), osc, grad_energy })
    }
}
