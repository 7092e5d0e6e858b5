//! Curvature tails: the distribution of the inverse-Hessian
//! Hilbert-Schmidt norm under a measure, by grid quadrature in one
//! dimension and by seeded Monte Carlo in several. Points where the
//! Hessian is singular carry an infinite norm and are always counted.

use crate::error::{Error, Result};
use crate::num::jacobi::symmetric_eigenvalues;

use super::nd::{PerturbationW, ProductPerturbedModel, RadialModel};
use super::sample::{batch_means, sample, McTarget};
use super::{build_grid, GridMeasure1D, TAIL_TOL};

/// A tail probability with its Monte Carlo error bar (zero for quadrature).
#[derive(Clone, Copy, Debug)]
pub struct TailEstimate {
    pub value: f64,
    pub se: f64,
}

/// A sampleable model that also exposes the Hessian of its potential.
pub trait HessianTarget: McTarget {
    fn hessian(&self, x: &[f64], out: &mut [Vec<f64>]);
}

impl HessianTarget for ProductPerturbedModel {
    fn hessian(&self, x: &[f64], out: &mut [Vec<f64>]) {
        ProductPerturbedModel::hessian(self, x, out)
    }
}

impl HessianTarget for RadialModel {
    fn hessian(&self, x: &[f64], out: &mut [Vec<f64>]) {
        RadialModel::hessian(self, x, out)
    }
}

/// Hilbert-Schmidt norm of the inverse of a symmetric matrix:
/// sqrt(sum_k eigenvalue_k^{-2}), infinite when any eigenvalue vanishes.
pub fn inv_hessian_hs_norm(hess: &[Vec<f64>]) -> f64 {
    let ev = symmetric_eigenvalues(hess);
    ev.iter().map(|&l| 1.0 / (l * l)).sum::<f64>().sqrt()
}

/// mu({ x : ||Hess^{-1} V(x)||_HS >= s }) for a one-dimensional grid
/// measure, where the norm is 1/|V''(x)|.
pub fn hessian_tail_grid(m: &GridMeasure1D, s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    m.nodes()
        .iter()
        .zip(m.weights())
        .filter(|(&x, _)| {
            let d2 = m.potential().d2v(x);
            d2 == 0.0 || 1.0 / d2.abs() >= s
        })
        .map(|(_, &w)| w)
        .sum()
}

/// Monte Carlo estimate of the inverse-Hessian tail for an n-dimensional
/// model, with a batch-means error bar.
pub fn hessian_tail_mc<T: HessianTarget + ?Sized>(
    model: &T,
    s: f64,
    seed: u64,
    size: usize,
) -> Result<TailEstimate> {
    if s <= 0.0 {
        return Ok(TailEstimate { value: 1.0, se: 0.0 });
    }
    let n = model.dim();
    let batch = sample(model, seed, size)?;
    let mut hess = vec![vec![0.0; n]; n];
    let indicators: Vec<f64> = batch
        .points
        .iter()
        .map(|x| {
            model.hessian(x, &mut hess);
            if inv_hessian_hs_norm(&hess) >= s {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (value, se) = batch_means(&indicators);
    Ok(TailEstimate { value, se })
}

/// Exact tensor-product quadrature of the inverse-Hessian tail for an
/// unperturbed product model. Cost grows as resolution^n, capped.
pub fn hessian_tail_product_quadrature(
    model: &ProductPerturbedModel,
    s: f64,
    resolution: usize,
) -> Result<f64> {
    if *model.perturbation() != PerturbationW::Zero {
        return Err(Error::model("quadrature route requires an unperturbed product"));
    }
    if s <= 0.0 {
        return Ok(1.0);
    }
    let n = model.dim();
    let cells = (resolution as f64).powi(n as i32);
    if cells > 2e7 {
        return Err(Error::config(format!(
            "tensor quadrature would visit {cells:.1e} cells; lower the resolution or dimension"
        )));
    }
    let grids: Vec<GridMeasure1D> = model
        .factors()
        .iter()
        .map(|h| build_grid(h, resolution, TAIL_TOL))
        .collect::<Result<_>>()?;
    // precompute per-factor inverse-square curvatures at the nodes
    let inv2: Vec<Vec<f64>> = grids
        .iter()
        .map(|g| {
            g.nodes()
                .iter()
                .map(|&x| {
                    let d2 = g.potential().d2v(x);
                    if d2 == 0.0 {
                        f64::INFINITY
                    } else {
                        1.0 / (d2 * d2)
                    }
                })
                .collect()
        })
        .collect();
    let s2 = s * s;
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let mut wprod = 1.0;
        let mut hs2 = 0.0;
        for (j, &i) in idx.iter().enumerate() {
            wprod *= grids[j].weights()[i];
            hs2 += inv2[j][i];
        }
        if hs2 >= s2 {
            total += wprod;
        }
        // odometer increment
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < resolution {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == n {
                return Ok(total);
            }
        }
    }
}

/// mu({ x : min_i h_i''(x_i) <= threshold }) for an unperturbed product,
/// by the exact complement rule 1 - prod_i (1 - p_i) with each p_i a
/// one-dimensional quadrature.
pub fn min_curvature_tail_exact(
    model: &ProductPerturbedModel,
    threshold: f64,
    resolution: usize,
) -> Result<f64> {
    if *model.perturbation() != PerturbationW::Zero {
        return Err(Error::model("factorized tail requires an unperturbed product"));
    }
    let mut survive = 1.0;
    for h in model.factors() {
        let g = build_grid(h, resolution, TAIL_TOL)?;
        let p_i: f64 = g
            .nodes()
            .iter()
            .zip(g.weights())
            .filter(|(&x, _)| h.d2v(x) <= threshold)
            .map(|(_, &w)| w)
            .sum();
        survive *= 1.0 - p_i;
    }
    Ok(1.0 - survive)
}

/// Monte Carlo version of the minimum-factor-curvature tail; works under
/// any perturbation since it samples the full measure.
pub fn min_curvature_tail_mc(
    model: &ProductPerturbedModel,
    threshold: f64,
    seed: u64,
    size: usize,
) -> Result<TailEstimate> {
    let batch = sample(model, seed, size)?;
    let indicators: Vec<f64> = batch
        .points
        .iter()
        .map(|x| {
            let min_curv = model
                .factors()
                .iter()
                .zip(x)
                .map(|(h, &xi)| h.d2v(xi))
                .fold(f64::INFINITY, f64::min);
            if min_curv <= threshold {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (value, se) = batch_means(&indicators);
    Ok(TailEstimate { value, se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Potential1D;
    use crate::num::quad::adaptive_simpson;
    use proptest::prelude::*;

    #[test]
    fn gaussian_grid_tail_is_a_step_at_one() {
        let m = build_grid(&Potential1D::Gaussian, 801, TAIL_TOL).unwrap();
        assert!((hessian_tail_grid(&m, 0.5) - 1.0).abs() < 1e-12);
        assert!((hessian_tail_grid(&m, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(hessian_tail_grid(&m, 1.0 + 1e-12), 0.0);
        assert_eq!(hessian_tail_grid(&m, 2.0), 0.0);
    }

    #[test]
    fn flat_potential_counts_everything() {
        // V'' = 0 everywhere: the inverse Hessian is infinite at every node
        let m = build_grid(&Potential1D::Uniform { a: 0.0, b: 1.0 }, 101, TAIL_TOL).unwrap();
        for s in [0.1, 1.0, 1e6] {
            assert!((hessian_tail_grid(&m, s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_grid_tail_matches_density_integral() {
        // 1/(12 x^2) >= s iff |x| <= 1/sqrt(12 s)
        let m = build_grid(&Potential1D::Subbotin { p: 4.0 }, 4001, TAIL_TOL).unwrap();
        let z = adaptive_simpson(&|x: f64| (-x.abs().powi(4)).exp(), -6.0, 6.0, 1e-12).value;
        for s in [0.05f64, 0.2, 1.0, 5.0] {
            let r = 1.0 / (12.0 * s).sqrt();
            let mass = adaptive_simpson(&|x: f64| (-x.abs().powi(4)).exp(), -r, r, 1e-12).value / z;
            let tail = hessian_tail_grid(&m, s);
            assert!((tail - mass).abs() < 3e-3, "s={s}: {tail} vs {mass}");
        }
    }

    #[test]
    fn one_dimensional_mc_agrees_with_grid_quadrature() {
        let pot = Potential1D::Subbotin { p: 4.0 };
        let model = ProductPerturbedModel::new(vec![pot.clone()], PerturbationW::Zero).unwrap();
        let grid = build_grid(&pot, 4001, TAIL_TOL).unwrap();
        let s = 0.3;
        let mc = hessian_tail_mc(&model, s, 17, 4000).unwrap();
        let exact = hessian_tail_grid(&grid, s);
        assert!(
            (mc.value - exact).abs() < 3.0 * mc.se + 3e-3,
            "{} +- {} vs {exact}",
            mc.value,
            mc.se
        );
    }

    #[test]
    fn product_quadrature_agrees_with_mc_in_two_dimensions() {
        let model = ProductPerturbedModel::new(
            vec![Potential1D::Subbotin { p: 4.0 }, Potential1D::Gaussian],
            PerturbationW::Zero,
        )
        .unwrap();
        let s = 1.2; // gaussian factor alone contributes 1 to HS^2, so s > 1 is nontrivial
        let quad = hessian_tail_product_quadrature(&model, s, 801).unwrap();
        let mc = hessian_tail_mc(&model, s, 23, 6000).unwrap();
        assert!(
            (mc.value - quad).abs() < 3.0 * mc.se + 5e-3,
            "{} +- {} vs {quad}",
            mc.value,
            mc.se
        );
    }

    #[test]
    fn quadrature_guards() {
        let model = ProductPerturbedModel::new(
            vec![Potential1D::Gaussian; 2],
            PerturbationW::Bilinear { eps: 0.1 },
        )
        .unwrap();
        assert!(hessian_tail_product_quadrature(&model, 1.0, 101).is_err());
        let model = ProductPerturbedModel::new(vec![Potential1D::Gaussian; 8], PerturbationW::Zero)
            .unwrap();
        assert!(hessian_tail_product_quadrature(&model, 1.0, 101).is_err());
    }

    #[test]
    fn min_curvature_composition_matches_mc() {
        let model = ProductPerturbedModel::new(
            vec![Potential1D::Subbotin { p: 4.0 }, Potential1D::Subbotin { p: 4.0 }],
            PerturbationW::Zero,
        )
        .unwrap();
        // 12 x^2 <= 0.5 iff |x| <= sqrt(1/24)
        let exact = min_curvature_tail_exact(&model, 0.5, 4001).unwrap();
        let mc = min_curvature_tail_mc(&model, 0.5, 31, 6000).unwrap();
        assert!(
            (mc.value - exact).abs() < 3.0 * mc.se + 5e-3,
            "{} +- {} vs {exact}",
            mc.value,
            mc.se
        );
        // sanity: single-factor probability p satisfies exact = 1 - (1-p)^2
        let single =
            ProductPerturbedModel::new(vec![Potential1D::Subbotin { p: 4.0 }], PerturbationW::Zero)
                .unwrap();
        let p = min_curvature_tail_exact(&single, 0.5, 4001).unwrap();
        assert!((exact - (1.0 - (1.0 - p) * (1.0 - p))).abs() < 1e-12);
    }

    #[test]
    fn radial_hessian_tail_runs() {
        let model = RadialModel::new(3, super::super::nd::RadialH::PowerLaw { p: 2.0 }).unwrap();
        let t = hessian_tail_mc(&model, 0.5, 9, 2000).unwrap();
        assert!(t.value >= 0.0 && t.value <= 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn grid_tail_is_nonincreasing_in_s(
            p in 1.2f64..5.0,
            s1 in 0.01f64..10.0,
            ratio in 1.01f64..10.0,
        ) {
            let m = build_grid(&Potential1D::Subbotin { p }, 513, TAIL_TOL).unwrap();
            let t1 = hessian_tail_grid(&m, s1);
            let t2 = hessian_tail_grid(&m, s1 * ratio);
            prop_assert!(t2 <= t1 + 1e-15);
        }
    }
}
