use std::f64::consts::PI;

use serde::Serialize;

use super::{ManifoldModel, Point};
use crate::numeric::gauss_legendre;
use crate::{invalid, Result};

/// Unnormalized density profile `q(s)` over the intrinsic coordinate `s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum DensityForm {
    Uniform,
    /// `1 + a cos(pi s)` on the interval and sphere, `1 + a cos(2 pi s)` on the
    /// circle so the profile stays periodic.
    CosinePerturbed { a: f64 },
    /// Values on a uniform grid of `s` in `[0, 1]`, linearly interpolated.
    Table { values: Vec<f64> },
}

/// A probability density on a fixed manifold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySpec {
    form: DensityForm,
    #[serde(skip)]
    manifold: ManifoldModel,
    /// `int_M q`, so that `p = q / normalization` integrates to one.
    normalization: f64,
}

const PROFILE_PANELS: usize = 64;
const CHECK_GRID: usize = 10_001;

impl DensitySpec {
    pub fn new(form: DensityForm, manifold: &ManifoldModel) -> Result<Self> {
        manifold.validate()?;
        match &form {
            DensityForm::Uniform => {}
            DensityForm::CosinePerturbed { a } => {
                if !(a.abs() < 1.0) {
                    return Err(invalid(format!("cosine perturbation needs |a| < 1, got {a}")));
                }
            }
            DensityForm::Table { values } => {
                if values.len() < 2 {
                    return Err(invalid("density table needs at least two values"));
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(invalid(format!("density table values must be positive, found {v}")));
                }
                if matches!(manifold, ManifoldModel::Circle { .. })
                    && (values[0] - values[values.len() - 1]).abs() > 1e-12 * values[0]
                {
                    return Err(invalid("circle density table must be periodic (first == last)"));
                }
            }
        }
        let mut spec = Self {
            form,
            manifold: *manifold,
            normalization: 1.0,
        };
        spec.normalization = spec.profile_mass();
        let (lo, hi) = spec.profile_range();
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(invalid(format!("density profile range [{lo}, {hi}] is not bounded away from zero")));
        }
        Ok(spec)
    }

    pub fn uniform(manifold: &ManifoldModel) -> Result<Self> {
        Self::new(DensityForm::Uniform, manifold)
    }

    pub fn cosine(manifold: &ManifoldModel, a: f64) -> Result<Self> {
        Self::new(DensityForm::CosinePerturbed { a }, manifold)
    }

    pub fn form(&self) -> &DensityForm {
        &self.form
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.manifold
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn is_uniform(&self) -> bool {
        match &self.form {
            DensityForm::Uniform => true,
            DensityForm::CosinePerturbed { a } => *a == 0.0,
            DensityForm::Table { values } => values.iter().all(|v| *v == values[0]),
        }
    }

    /// Unnormalized profile `q(s)`.
    pub fn profile(&self, s: f64) -> f64 {
        match &self.form {
            DensityForm::Uniform => 1.0,
            DensityForm::CosinePerturbed { a } => {
                let freq = match self.manifold {
                    ManifoldModel::Circle { .. } => 2.0 * PI,
                    _ => PI,
                };
                1.0 + a * (freq * s).cos()
            }
            DensityForm::Table { values } => {
                let m = values.len() - 1;
                let pos = s.clamp(0.0, 1.0) * m as f64;
                let k = (pos.floor() as usize).min(m - 1);
                let frac = pos - k as f64;
                values[k] * (1.0 - frac) + values[k + 1] * frac
            }
        }
    }

    /// `p(s)`, normalized so that `p` integrates to one over the manifold.
    pub fn eval_coordinate(&self, s: f64) -> f64 {
        self.profile(s) / self.normalization
    }

    /// `p(x)`.
    pub fn eval(&self, x: &Point) -> f64 {
        self.eval_coordinate(self.manifold.coordinate(x))
    }

    /// Panels aligned with table breakpoints so that each piece is smooth.
    fn panels(&self) -> usize {
        match &self.form {
            DensityForm::Table { values } => values.len() - 1,
            _ => PROFILE_PANELS,
        }
    }

    /// `int_M q dx` by composite Gauss-Legendre in the intrinsic coordinate.
    fn profile_mass(&self) -> f64 {
        let panels = self.panels();
        let h = 1.0 / panels as f64;
        let line: f64 = match self.manifold {
            ManifoldModel::Sphere { .. } => (0..panels)
                .map(|k| {
                    let a = k as f64 * h;
                    gauss_legendre(|s| self.profile(s) * (PI * s).sin() * PI, a, a + h)
                })
                .sum(),
            _ => (0..panels)
                .map(|k| {
                    let a = k as f64 * h;
                    gauss_legendre(|s| self.profile(s), a, a + h)
                })
                .sum(),
        };
        match self.manifold {
            ManifoldModel::Interval { a, b } => line * (b - a),
            ManifoldModel::Circle { radius } => line * 2.0 * PI * radius,
            // area element rho^2 sin(theta) dtheta dphi with theta = pi s
            ManifoldModel::Sphere { radius } => line * 2.0 * PI * radius * radius,
        }
    }

    /// `(min q, max q)` on a dense grid.
    pub fn profile_range(&self) -> (f64, f64) {
        (0..CHECK_GRID)
            .map(|i| self.profile(i as f64 / (CHECK_GRID - 1) as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// `(min p, max p)` on a dense grid.
    pub fn range(&self) -> (f64, f64) {
        let (lo, hi) = self.profile_range();
        (lo / self.normalization, hi / self.normalization)
    }

    /// Cumulative distribution of the 1D coordinate on `intervals + 1` nodes.
    ///
    /// On the sphere this is the distribution of the polar coordinate.
    pub(crate) fn coordinate_cdf(&self, intervals: usize) -> Vec<f64> {
        let h = 1.0 / intervals as f64;
        let sphere = matches!(self.manifold, ManifoldModel::Sphere { .. });
        let mut cdf = Vec::with_capacity(intervals + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for k in 0..intervals {
            let a = k as f64 * h;
            acc += if sphere {
                gauss_legendre(|s| self.profile(s) * (PI * s).sin(), a, a + h)
            } else {
                gauss_legendre(|s| self.profile(s), a, a + h)
            };
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        cdf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature_grid;

    #[test]
    fn cosine_density_integrates_to_one() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::cosine(&m, 0.5).unwrap();
        let q = quadrature_grid(&m, 100_001).unwrap();
        let mass: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * d.eval(x)).sum();
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn sphere_and_circle_normalizations() {
        let s = ManifoldModel::Sphere { radius: 2.0 };
        let d = DensitySpec::cosine(&s, 0.3).unwrap();
        assert!((d.normalization() - 16.0 * PI).abs() < 1e-12);
        let c = ManifoldModel::Circle { radius: 1.0 };
        let d = DensitySpec::cosine(&c, 0.9).unwrap();
        assert!((d.normalization() - 2.0 * PI).abs() < 1e-12);
        let q = quadrature_grid(&s, 20_000).unwrap();
        let d = DensitySpec::cosine(&s, 0.3).unwrap();
        let mass: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * d.eval(x)).sum();
        assert!((mass - 1.0).abs() < 1e-3);
    }

    #[test]
    fn table_density_is_piecewise_linear() {
        let m = ManifoldModel::Interval { a: 0.0, b: 2.0 };
        let d = DensitySpec::new(DensityForm::Table { values: vec![1.0, 3.0] }, &m).unwrap();
        // int_0^2 (1 + 2 x/2) dx = 4
        assert!((d.normalization() - 4.0).abs() < 1e-13);
        assert!((d.eval(&[1.0, 0.0, 0.0]) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn invalid_profiles_rejected() {
        let m = ManifoldModel::unit_interval();
        assert!(DensitySpec::cosine(&m, 1.0).is_err());
        assert!(DensitySpec::new(DensityForm::Table { values: vec![1.0, 0.0, 1.0] }, &m).is_err());
        assert!(DensitySpec::new(DensityForm::Table { values: vec![1.0] }, &m).is_err());
    }

    #[test]
    fn cdf_matches_closed_form() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::cosine(&m, 0.5).unwrap();
        let cdf = d.coordinate_cdf(1000);
        for (k, c) in cdf.iter().enumerate() {
            let s = k as f64 / 1000.0;
            let exact = s + 0.5 * (PI * s).sin() / PI;
            assert!((c - exact).abs() < 1e-13);
        }
    }
}
