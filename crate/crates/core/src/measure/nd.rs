//! n-dimensional measure models: products of one-dimensional convex factors
//! with a bounded-interaction perturbation, and radial measures driven by a
//! profile of the squared radius.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::num::jacobi::symmetric_eigenvalues;

use super::sample::McTarget;
use super::Potential1D;

/// Largest supported dimension for dense-Hessian work.
pub const MAX_DIM: usize = 32;

/// Perturbation W added to a product potential. Each form knows its
/// gradient, Hessian, parity, and convexity in the ambient dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PerturbationW {
    /// W = 0: the unperturbed product.
    Zero,
    /// W(x) = lip * |x_index|: Lipschitz in one coordinate.
    AbsCoord { index: usize, lip: f64 },
    /// W(x) = eps * sum_{i<j} x_i x_j: bounded-curvature coupling, not
    /// convex for eps != 0 in dimension >= 2.
    Bilinear { eps: f64 },
}

impl PerturbationW {
    pub fn w(&self, x: &[f64]) -> f64 {
        match self {
            PerturbationW::Zero => 0.0,
            PerturbationW::AbsCoord { index, lip } => lip * x[*index].abs(),
            PerturbationW::Bilinear { eps } => {
                let s: f64 = x.iter().sum();
                let q: f64 = x.iter().map(|v| v * v).sum();
                0.5 * eps * (s * s - q)
            }
        }
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        match self {
            PerturbationW::Zero => {}
            PerturbationW::AbsCoord { index, lip } => {
                out[*index] = lip * x[*index].signum();
            }
            PerturbationW::Bilinear { eps } => {
                let s: f64 = x.iter().sum();
                for (gi, &xi) in out.iter_mut().zip(x) {
                    *gi = eps * (s - xi);
                }
            }
        }
    }

    /// Hessian (almost everywhere for the Lipschitz form).
    pub fn hess(&self, x: &[f64], out: &mut [Vec<f64>]) {
        let n = x.len();
        for row in out.iter_mut() {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        if let PerturbationW::Bilinear { eps } = self {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        out[i][j] = *eps;
                    }
                }
            }
        }
    }

    pub fn is_even(&self) -> bool {
        // all three forms are symmetric under x -> -x
        true
    }

    pub fn is_convex(&self, n: usize) -> bool {
        match self {
            PerturbationW::Zero => true,
            PerturbationW::AbsCoord { lip, .. } => *lip >= 0.0,
            PerturbationW::Bilinear { eps } => *eps == 0.0 || n < 2,
        }
    }

    /// sup - inf of W over coordinate `i` with the others held at `x`,
    /// scanned over the factor's working interval. Finite for the bounded
    /// forms used in perturbation bounds; the scan interval is supplied.
    pub fn coord_osc(&self, x: &[f64], i: usize, lo: f64, hi: f64) -> f64 {
        let mut y = x.to_vec();
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for k in 0..=512 {
            y[i] = lo + (hi - lo) * k as f64 / 512.0;
            let v = self.w(&y);
            min = min.min(v);
            max = max.max(v);
        }
        max - min
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            PerturbationW::Zero => Ok(()),
            PerturbationW::AbsCoord { index, lip } => {
                if *index >= n {
                    Err(Error::model(format!("perturbation coordinate {index} out of range for n = {n}")))
                } else if !lip.is_finite() {
                    Err(Error::model("perturbation Lipschitz constant must be finite"))
                } else {
                    Ok(())
                }
            }
            PerturbationW::Bilinear { eps } => {
                if eps.is_finite() {
                    Ok(())
                } else {
                    Err(Error::model("coupling strength must be finite"))
                }
            }
        }
    }
}

/// Product measure with density proportional to exp(-sum_i h_i(x_i) - W(x)).
/// Factors must be convex; symmetry and convexity claims about W are
/// verified against randomized probe points at construction.
#[derive(Clone, Debug)]
pub struct ProductPerturbedModel {
    h: Vec<Potential1D>,
    w: PerturbationW,
    w_convex: bool,
    w_even: bool,
    h_even: bool,
}

impl ProductPerturbedModel {
    pub fn new(h: Vec<Potential1D>, w: PerturbationW) -> Result<Self> {
        let n = h.len();
        let w_convex = w.is_convex(n);
        let w_even = w.is_even();
        Self::with_claims(h, w, w_convex, w_even)
    }

    /// Construct with explicit symmetry/convexity claims for W; claims are
    /// probe-checked and a false claim is a model error.
    pub fn with_claims(
        h: Vec<Potential1D>,
        w: PerturbationW,
        w_convex: bool,
        w_even: bool,
    ) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::model("product model needs at least one factor"));
        }
        if n > MAX_DIM {
            return Err(Error::model(format!("dimension {n} exceeds the supported maximum {MAX_DIM}")));
        }
        for (i, hi) in h.iter().enumerate() {
            hi.validate()?;
            if !hi.is_convex() {
                return Err(Error::model(format!("product factor {i} is not convex")));
            }
        }
        w.validate(n)?;

        let probes = probe_points(n, 64);
        if w_even {
            for x in &probes {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                if (w.w(x) - w.w(&neg)).abs() > 1e-9 {
                    return Err(Error::model("perturbation claimed even but probe found asymmetry"));
                }
            }
        }
        if w_convex {
            let mut hess = vec![vec![0.0; n]; n];
            for x in &probes {
                w.hess(x, &mut hess);
                let ev = symmetric_eigenvalues(&hess);
                if ev[0] < -1e-7 {
                    return Err(Error::model(format!(
                        "perturbation claimed convex but probe Hessian has eigenvalue {}",
                        ev[0]
                    )));
                }
            }
        }
        let h_even = h.iter().all(|hi| hi.is_even());
        Ok(ProductPerturbedModel { h, w, w_convex, w_even, h_even })
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn factors(&self) -> &[Potential1D] {
        &self.h
    }

    pub fn perturbation(&self) -> &PerturbationW {
        &self.w
    }

    pub fn w_convex(&self) -> bool {
        self.w_convex
    }

    pub fn w_even(&self) -> bool {
        self.w_even
    }

    pub fn h_even(&self) -> bool {
        self.h_even
    }

    /// Total potential V(x) = sum h_i(x_i) + W(x).
    pub fn potential(&self, x: &[f64]) -> f64 {
        let base: f64 = self.h.iter().zip(x).map(|(h, &xi)| h.v(xi)).sum();
        base + self.w.w(x)
    }

    /// Hessian of the total potential: diag(h_i'') plus the W Hessian.
    pub fn hessian(&self, x: &[f64], out: &mut [Vec<f64>]) {
        self.w.hess(x, out);
        for (i, (h, &xi)) in self.h.iter().zip(x).enumerate() {
            out[i][i] += h.d2v(xi);
        }
    }
}

impl McTarget for ProductPerturbedModel {
    fn dim(&self) -> usize {
        self.h.len()
    }

    fn potential(&self, x: &[f64]) -> f64 {
        ProductPerturbedModel::potential(self, x)
    }
}

/// Radial profile h applied to u = |x|^2, so the density is e^{-h(|x|^2)}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum RadialH {
    /// h(u) = u^p: density e^{-|x|^{2p}}.
    PowerLaw { p: f64 },
}

const RADIAL_REG_EPS: f64 = 1e-8;

impl RadialH {
    pub fn h(&self, u: f64) -> f64 {
        match self {
            RadialH::PowerLaw { p } => u.powf(*p),
        }
    }

    pub fn hp(&self, u: f64) -> f64 {
        match self {
            RadialH::PowerLaw { p } => p * u.powf(p - 1.0),
        }
    }

    /// Second derivative, regularized near u = 0 when p < 2.
    pub fn hpp(&self, u: f64) -> f64 {
        match self {
            RadialH::PowerLaw { p } => {
                if *p < 2.0 {
                    p * (p - 1.0) * (u + RADIAL_REG_EPS).powf(p - 2.0)
                } else {
                    p * (p - 1.0) * u.powf(p - 2.0)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialH::PowerLaw { p } => {
                if p.is_finite() && *p >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::model(format!("radial power must satisfy p >= 1, got {p}")))
                }
            }
        }
    }
}

/// Measure with density proportional to exp(-h(|x|^2) - W(x)) on R^n.
#[derive(Clone, Debug)]
pub struct RadialModel {
    n: usize,
    h: RadialH,
    w: PerturbationW,
}

impl RadialModel {
    pub fn new(n: usize, h: RadialH) -> Result<Self> {
        Self::with_perturbation(n, h, PerturbationW::Zero)
    }

    pub fn with_perturbation(n: usize, h: RadialH, w: PerturbationW) -> Result<Self> {
        if n < 2 {
            return Err(Error::model(format!("radial model needs dimension >= 2, got {n}")));
        }
        if n > MAX_DIM {
            return Err(Error::model(format!("dimension {n} exceeds the supported maximum {MAX_DIM}")));
        }
        h.validate()?;
        w.validate(n)?;
        Ok(RadialModel { n, h, w })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn profile(&self) -> &RadialH {
        &self.h
    }

    pub fn perturbation(&self) -> &PerturbationW {
        &self.w
    }

    pub fn potential(&self, x: &[f64]) -> f64 {
        let u: f64 = x.iter().map(|v| v * v).sum();
        self.h.h(u) + self.w.w(x)
    }

    /// Hessian of h(|x|^2): 2 h'(u) I + 4 h''(u) x x^T, plus the W part.
    pub fn hessian(&self, x: &[f64], out: &mut [Vec<f64>]) {
        self.w.hess(x, out);
        let u: f64 = x.iter().map(|v| v * v).sum();
        let hp = self.h.hp(u);
        let hpp = self.h.hpp(u);
        for i in 0..self.n {
            out[i][i] += 2.0 * hp;
            for j in 0..self.n {
                out[i][j] += 4.0 * hpp * x[i] * x[j];
            }
        }
    }
}

impl McTarget for RadialModel {
    fn dim(&self) -> usize {
        self.n
    }

    fn potential(&self, x: &[f64]) -> f64 {
        RadialModel::potential(self, x)
    }
}

/// Deterministic standard-normal probe points for claim checking.
fn probe_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    use rand::RngExt;
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12);
                    normal.inverse_cdf(u)
                })
                .collect()
        })
        .collect()
}

/// Serializable description of any supported measure model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Gaussian,
    Subbotin {
        p: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    DoubleWell {
        a: f64,
    },
    Custom1d {
        knots: Vec<(f64, f64)>,
    },
    ProductPerturbed {
        h: Vec<Potential1D>,
        w: PerturbationW,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_convex: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_even: Option<bool>,
    },
    Radial {
        n: usize,
        p: f64,
    },
}

/// A built model, ready for quadrature or sampling.
#[derive(Clone, Debug)]
pub enum Model {
    OneD(Potential1D),
    Product(ProductPerturbedModel),
    Radial(RadialModel),
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model specs serialize")
    }

    /// Validate and build. False claims and invalid parameters surface here.
    pub fn build(&self) -> Result<Model> {
        match self {
            ModelSpec::Gaussian => Ok(Model::OneD(Potential1D::Gaussian)),
            ModelSpec::Subbotin { p } => {
                let pot = Potential1D::Subbotin { p: *p };
                pot.validate()?;
                Ok(Model::OneD(pot))
            }
            ModelSpec::Uniform { a, b } => {
                let pot = Potential1D::Uniform { a: *a, b: *b };
                pot.validate()?;
                Ok(Model::OneD(pot))
            }
            ModelSpec::DoubleWell { a } => {
                let pot = Potential1D::DoubleWell { a: *a };
                pot.validate()?;
                Ok(Model::OneD(pot))
            }
            ModelSpec::Custom1d { knots } => {
                let pot = Potential1D::Custom1d { knots: knots.clone() };
                pot.validate()?;
                Ok(Model::OneD(pot))
            }
            ModelSpec::ProductPerturbed { h, w, w_convex, w_even } => {
                let n = h.len();
                let model = ProductPerturbedModel::with_claims(
                    h.clone(),
                    w.clone(),
                    w_convex.unwrap_or_else(|| w.is_convex(n)),
                    w_even.unwrap_or_else(|| w.is_even()),
                )?;
                Ok(Model::Product(model))
            }
            ModelSpec::Radial { n, p } => {
                Ok(Model::Radial(RadialModel::new(*n, RadialH::PowerLaw { p: *p })?))
            }
        }
    }

    /// The underlying one-dimensional potential, when the spec is 1D.
    pub fn as_potential_1d(&self) -> Option<Potential1D> {
        match self.build() {
            Ok(Model::OneD(p)) => Some(p),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_potential_sums_factors_and_perturbation() {
        let m = ProductPerturbedModel::new(
            vec![Potential1D::Gaussian, Potential1D::Subbotin { p: 4.0 }],
            PerturbationW::AbsCoord { index: 0, lip: 0.5 },
        )
        .unwrap();
        let x = [1.0, -2.0];
        let expect = 0.5 + 16.0 + 0.5;
        assert!((m.potential(&x) - expect).abs() < 1e-12);
        assert!(m.w_convex() && m.w_even() && m.h_even());
    }

    #[test]
    fn nonconvex_factor_is_rejected() {
        let err = ProductPerturbedModel::new(
            vec![Potential1D::DoubleWell { a: 1.0 }],
            PerturbationW::Zero,
        );
        assert!(err.is_err());
    }

    #[test]
    fn bilinear_convexity_claim_fails_probe() {
        let h = vec![Potential1D::Gaussian; 3];
        let w = PerturbationW::Bilinear { eps: 0.2 };
        // honest flags: fine, convexity recorded as false
        let ok = ProductPerturbedModel::new(h.clone(), w.clone()).unwrap();
        assert!(!ok.w_convex());
        // dishonest claim: probe catches the negative eigenvalue
        let err = ProductPerturbedModel::with_claims(h, w, true, true);
        assert!(err.is_err());
    }

    #[test]
    fn bilinear_hessian_matches_closed_form() {
        let m = ProductPerturbedModel::new(
            vec![Potential1D::Gaussian; 3],
            PerturbationW::Bilinear { eps: 0.1 },
        )
        .unwrap();
        let mut hess = vec![vec![0.0; 3]; 3];
        m.hessian(&[0.3, -0.7, 1.1], &mut hess);
        // diag 1 + off-diagonal eps: eigenvalues 1 - eps (twice), 1 + 2 eps
        let ev = symmetric_eigenvalues(&hess);
        assert!((ev[0] - 0.9).abs() < 1e-12);
        assert!((ev[1] - 0.9).abs() < 1e-12);
        assert!((ev[2] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn bilinear_gradient_matches_finite_differences() {
        let w = PerturbationW::Bilinear { eps: 0.3 };
        let x = [0.4, -1.2, 0.9, 2.0];
        let mut g = vec![0.0; 4];
        w.grad(&x, &mut g);
        for i in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (w.w(&xp) - w.w(&xm)) / 2e-6;
            assert!((g[i] - fd).abs() < 1e-8, "coord {i}: {} vs {fd}", g[i]);
        }
    }

    #[test]
    fn dimension_caps() {
        let too_big = vec![Potential1D::Gaussian; MAX_DIM + 1];
        assert!(ProductPerturbedModel::new(too_big, PerturbationW::Zero).is_err());
        assert!(RadialModel::new(1, RadialH::PowerLaw { p: 2.0 }).is_err());
        assert!(RadialModel::new(2, RadialH::PowerLaw { p: 0.5 }).is_err());
    }

    #[test]
    fn radial_hessian_matches_finite_differences() {
        let m = RadialModel::new(3, RadialH::PowerLaw { p: 2.0 }).unwrap();
        let x = [0.5, -0.3, 1.2];
        let mut hess = vec![vec![0.0; 3]; 3];
        m.hessian(&x, &mut hess);
        for i in 0..3 {
            for j in 0..3 {
                let e = 1e-5;
                let mut xpp = x;
                let mut xpm = x;
                let mut xmp = x;
                let mut xmm = x;
                xpp[i] += e;
                xpp[j] += e;
                xpm[i] += e;
                xpm[j] -= e;
                xmp[i] -= e;
                xmp[j] += e;
                xmm[i] -= e;
                xmm[j] -= e;
                let fd = (m.potential(&xpp) - m.potential(&xpm) - m.potential(&xmp)
                    + m.potential(&xmm))
                    / (4.0 * e * e);
                assert!((hess[i][j] - fd).abs() < 1e-4, "({i},{j}): {} vs {fd}", hess[i][j]);
            }
        }
    }

    #[test]
    fn model_spec_round_trips_and_builds() {
        let specs = vec![
            ModelSpec::Gaussian,
            ModelSpec::Subbotin { p: 1.5 },
            ModelSpec::Uniform { a: 0.0, b: 1.0 },
            ModelSpec::DoubleWell { a: 1.0 },
            ModelSpec::Custom1d { knots: vec![(0.0, 0.0), (1.0, 2.0)] },
            ModelSpec::ProductPerturbed {
                h: vec![Potential1D::Gaussian, Potential1D::Subbotin { p: 4.0 }],
                w: PerturbationW::Bilinear { eps: 0.05 },
                w_convex: None,
                w_even: None,
            },
            ModelSpec::Radial { n: 5, p: 2.0 },
        ];
        for spec in specs {
            let js = spec.to_json();
            let back = ModelSpec::from_json(&js).unwrap();
            assert_eq!(back, spec);
            back.build().unwrap();
        }
        // tag names are the documented ones
        assert!(ModelSpec::Subbotin { p: 1.5 }.to_json().contains("\"type\":\"subbotin\""));
        assert!(ModelSpec::ProductPerturbed {
            h: vec![Potential1D::Gaussian],
            w: PerturbationW::Zero,
            w_convex: None,
            w_even: None,
        }
        .to_json()
        .contains("\"type\":\"product_perturbed\""));
    }

    #[test]
    fn model_spec_claim_override_is_checked_at_build() {
        let spec = ModelSpec::ProductPerturbed {
            h: vec![Potential1D::Gaussian; 3],
            w: PerturbationW::Bilinear { eps: 0.2 },
            w_convex: Some(true),
            w_even: None,
        };
        assert!(spec.build().is_err());
    }

    #[test]
    fn invalid_specs_fail_to_build() {
        assert!(ModelSpec::Subbotin { p: -1.0 }.build().is_err());
        assert!(ModelSpec::Radial { n: 1, p: 2.0 }.build().is_err());
        assert!(ModelSpec::from_json("{\"type\":\"nope\"}").is_err());
    }

    #[test]
    fn coord_osc_of_abs_coord_is_lip_times_range() {
        let w = PerturbationW::AbsCoord { index: 1, lip: 2.0 };
        let x = [0.0, 0.0, 0.0];
        let osc = w.coord_osc(&x, 1, -3.0, 3.0);
        assert!((osc - 6.0).abs() < 1e-9, "{osc}");
        // other coordinates do not move W
        assert!(w.coord_osc(&x, 0, -3.0, 3.0).abs() < 1e-12);
    }
}
