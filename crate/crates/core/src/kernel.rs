//! Compactly supported radial kernels `R` and their tail integrals `bar-R`.
//!
//! Every kernel is a profile on `r >= 0` that vanishes for `r > 1`. The
//! assembled operators evaluate it at `r = |x - y|^2 / 4t`, so the support in
//! ambient distance is `2 sqrt(t)`.

use std::fmt;
use std::sync::Arc;

use crate::numeric::{adaptive_simpson, gauss_legendre};

/// Concrete kernel profile.
#[derive(Clone)]
pub enum KernelFamily {
    /// `(1 - r)^4 (4r + 1)` on `[0, 1]`.
    Wendland41,
    /// `exp(-beta r) (1 - r)^3` on `[0, 1]`: a Gaussian profile tapered to
    /// zero with two vanishing derivatives at the support edge.
    TruncatedGaussian { beta: f64 },
    /// `sum_k coeffs[k] r^k` on `[0, 1]`, zero beyond.
    Polynomial(Vec<f64>),
    /// Arbitrary profile on `[0, 1]`, used for diagnostics; `bar-R` is
    /// integrated numerically.
    Custom {
        name: String,
        profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Wendland41 => write!(f, "Wendland41"),
            Self::TruncatedGaussian { beta } => write!(f, "TruncatedGaussian(beta={beta})"),
            Self::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// An immutable kernel together with its scaling factor and the declared
/// lower bound on `[0, 1/2]`.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    family: KernelFamily,
    scale: f64,
    delta0: Option<f64>,
}

impl KernelSpec {
    pub fn wendland41() -> Self {
        Self {
            family: KernelFamily::Wendland41,
            scale: 1.0,
            delta0: Some(3.0 / 16.0),
        }
    }

    pub fn truncated_gaussian(beta: f64) -> Self {
        // exp(-beta r) (1-r)^3 is decreasing, so its minimum on [0, 1/2] sits at 1/2.
        let delta0 = (beta >= 0.0).then(|| (-beta * 0.5).exp() * 0.125);
        Self {
            family: KernelFamily::TruncatedGaussian { beta },
            scale: 1.0,
            delta0,
        }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self {
            family: KernelFamily::Polynomial(coeffs),
            scale: 1.0,
            delta0: None,
        }
    }

    pub fn custom(name: impl Into<String>, profile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            family: KernelFamily::Custom {
                name: name.into(),
                profile: Arc::new(profile),
            },
            scale: 1.0,
            delta0: None,
        }
    }

    /// Returns the same kernel multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            family: self.family.clone(),
            scale: self.scale * c,
            delta0: self.delta0.map(|d| d * c),
        }
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Declared lower bound of `R` on `[0, 1/2]`, if the family certifies one.
    pub fn delta0(&self) -> Option<f64> {
        self.delta0
    }

    pub fn name(&self) -> String {
        match &self.family {
            KernelFamily::Wendland41 => "wendland41".into(),
            KernelFamily::TruncatedGaussian { .. } => "truncated-gaussian".into(),
            KernelFamily::Polynomial(_) => "polynomial".into(),
            KernelFamily::Custom { name, .. } => name.clone(),
        }
    }

    /// `R(r)`; exactly zero for `r > 1`.
    pub fn eval_r(&self, r: f64) -> f64 {
        if r > 1.0 {
            return 0.0;
        }
        let r = r.max(0.0);
        let v = match &self.family {
            KernelFamily::Wendland41 => {
                let s = 1.0 - r;
                let s2 = s * s;
                s2 * s2 * (4.0 * r + 1.0)
            }
            KernelFamily::TruncatedGaussian { beta } => {
                let s = 1.0 - r;
                (-beta * r).exp() * s * s * s
            }
            KernelFamily::Polynomial(c) => horner(c, r),
            KernelFamily::Custom { profile, .. } => profile(r),
        };
        self.scale * v
    }

    /// `bar-R(r) = int_r^1 R(s) ds`; zero for `r >= 1`.
    pub fn eval_bar_r(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let r = r.max(0.0);
        let v = match &self.family {
            KernelFamily::Wendland41 => {
                let s = 1.0 - r;
                let s2 = s * s;
                s2 * s2 * s * (2.0 * r + 1.0) / 3.0
            }
            KernelFamily::TruncatedGaussian { beta } => {
                let beta = *beta;
                gauss_legendre(|s| (-beta * s).exp() * (1.0 - s).powi(3), r, 1.0)
            }
            KernelFamily::Polynomial(c) => {
                let anti = antiderivative(c);
                horner(&anti, 1.0) - horner(&anti, r)
            }
            KernelFamily::Custom { profile, .. } => {
                // Composite rule; profiles here are only assumed piecewise smooth.
                let pieces = 32;
                let h = (1.0 - r) / pieces as f64;
                (0..pieces)
                    .map(|k| {
                        let a = r + k as f64 * h;
                        gauss_legendre(|s| profile(s), a, a + h)
                    })
                    .sum()
            }
        };
        self.scale * v
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64))
        .collect()
}

/// Outcome of a single kernel admissibility clause.
#[derive(Clone, Debug, PartialEq)]
pub struct ClauseResult {
    pub passed: bool,
    /// Grid point at which the clause failed.
    pub witness: Option<f64>,
    pub detail: String,
}

/// Per-clause admissibility report.
///
/// Clause (a) is `R in C^2`, (b) is nonnegativity with support in `[0, 1]`,
/// (c) is the lower bound on `[0, 1/2]`.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub smoothness: ClauseResult,
    pub support: ClauseResult,
    pub lower_bound: ClauseResult,
    pub measured_delta0: f64,
    /// Largest one-sided mismatch of `R`, `R'`, `R''` across `r = 1`.
    pub measured_c2_jump: f64,
    /// `max_r |bar-R(r) - int_r^1 R|` with the integral by adaptive quadrature.
    pub antiderivative_residual: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.smoothness.passed && self.support.passed && self.lower_bound.passed
    }

    /// `(label, result)` pairs in clause order.
    pub fn clauses(&self) -> [(&'static str, &ClauseResult); 3] {
        [
            ("(a) C2 smoothness", &self.smoothness),
            ("(b) nonnegative, zero beyond 1", &self.support),
            ("(c) lower bound on [0, 1/2]", &self.lower_bound),
        ]
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, c) in self.clauses() {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            write!(f, "{label}: {verdict}")?;
            if let Some(w) = c.witness {
                write!(f, " at r={w:.6}")?;
            }
            writeln!(f, " ({})", c.detail)?;
        }
        writeln!(f, "measured delta0: {:.6e}", self.measured_delta0)?;
        writeln!(f, "measured C2 jump at r=1: {:.3e}", self.measured_c2_jump)?;
        write!(f, "antiderivative residual: {:.3e}", self.antiderivative_residual)
    }
}

/// Step used for the one-sided derivative comparison at the support edge.
pub const C2_STEP: f64 = 1e-4;
/// Largest one-sided mismatch still counted as continuous.
pub const C2_TOLERANCE: f64 = 1e-3;

/// Checks the admissibility clauses on a uniform grid of `grid_points` nodes
/// over `[0, 1.5]`.
pub fn validate_kernel(spec: &KernelSpec, grid_points: usize) -> crate::Result<ValidationReport> {
    if grid_points < 100 {
        return Err(crate::Error::InvalidArgument(format!(
            "grid_points must be at least 100, got {grid_points}"
        )));
    }
    let upper = 1.5;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| upper * i as f64 / (grid_points - 1) as f64)
        .collect();

    // (b): R >= 0 everywhere and R = 0 beyond the support.
    let mut support = ClauseResult {
        passed: true,
        witness: None,
        detail: "R >= 0 on grid and R = 0 for r > 1".into(),
    };
    for &r in &grid {
        let v = spec.eval_r(r);
        if !v.is_finite() || v < 0.0 || (r > 1.0 && v != 0.0) {
            support = ClauseResult {
                passed: false,
                witness: Some(r),
                detail: format!("R({r:.6}) = {v:.6e}"),
            };
            break;
        }
    }

    // (c): measured minimum on [0, 1/2].
    let (witness_r, measured_delta0) = grid
        .iter()
        .filter(|&&r| r <= 0.5)
        .map(|&r| (r, spec.eval_r(r)))
        .fold((0.0, f64::INFINITY), |acc, (r, v)| if v < acc.1 { (r, v) } else { acc });
    let declared_ok = spec.delta0().map_or(true, |d| measured_delta0 >= d * (1.0 - 1e-12));
    let lower_bound = ClauseResult {
        passed: measured_delta0 > 0.0 && declared_ok,
        witness: (!(measured_delta0 > 0.0 && declared_ok)).then_some(witness_r),
        detail: match spec.delta0() {
            Some(d) => format!("min R on [0,1/2] = {measured_delta0:.6e}, declared {d:.6e}"),
            None => format!("min R on [0,1/2] = {measured_delta0:.6e}"),
        },
    };

    // (a): one-sided value, slope and curvature at r = 1 must match the zero
    // extension beyond the support.
    let h = C2_STEP;
    let r0 = spec.eval_r(1.0);
    let r1 = spec.eval_r(1.0 - h);
    let r2 = spec.eval_r(1.0 - 2.0 * h);
    let value_jump = r0.abs();
    let slope_jump = ((r0 - r1) / h).abs();
    let curvature_jump = ((r0 - 2.0 * r1 + r2) / (h * h)).abs();
    let measured_c2_jump = value_jump.max(slope_jump).max(curvature_jump);
    let smooth_edge = measured_c2_jump <= C2_TOLERANCE;
    let smoothness = ClauseResult {
        passed: smooth_edge && measured_c2_jump.is_finite(),
        witness: (!smooth_edge).then_some(1.0),
        detail: format!(
            "jumps at r=1: value {value_jump:.3e}, R' {slope_jump:.3e}, R'' {curvature_jump:.3e}"
        ),
    };

    let antiderivative_residual = grid
        .iter()
        .filter(|&&r| r <= 1.0)
        .map(|&r| {
            let q = adaptive_simpson(&|s| spec.eval_r(s), r, 1.0, 1e-12, 40);
            (spec.eval_bar_r(r) - q).abs()
        })
        .fold(0.0, f64::max);

    Ok(ValidationReport {
        smoothness,
        support,
        lower_bound,
        measured_delta0,
        measured_c2_jump,
        antiderivative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wendland_values() {
        let k = KernelSpec::wendland41();
        assert_eq!(k.eval_r(0.0), 1.0);
        assert_eq!(k.eval_r(1.0), 0.0);
        assert_abs_diff_eq!(k.eval_r(0.5), 0.1875, epsilon = 1e-15);
        assert_eq!(k.eval_r(1.3), 0.0);
    }

    #[test]
    fn wendland_tail_integral() {
        let k = KernelSpec::wendland41();
        assert_eq!(k.eval_bar_r(1.0), 0.0);
        assert_eq!(k.eval_bar_r(2.0), 0.0);
        // Frozen from adaptive quadrature of int_r^1 (1-s)^4 (4s+1) ds.
        let q0 = adaptive_simpson(&|s| k.eval_r(s), 0.0, 1.0, 1e-14, 50);
        let q5 = adaptive_simpson(&|s| k.eval_r(s), 0.5, 1.0, 1e-14, 50);
        assert_abs_diff_eq!(q0, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q5, 1.0 / 48.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.eval_bar_r(0.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.eval_bar_r(0.5), 1.0 / 48.0, epsilon = 1e-15);
    }

    #[test]
    fn tail_is_antiderivative_for_every_family() {
        let kernels = [
            KernelSpec::wendland41(),
            KernelSpec::truncated_gaussian(1.0),
            KernelSpec::polynomial(vec![1.0, 0.0, -3.0, 2.0]),
            KernelSpec::custom("cubic", |r| (1.0 - r).powi(3)),
        ];
        let h = 1e-5;
        for k in &kernels {
            for i in 1..100 {
                let r = i as f64 / 100.0;
                let fd = (k.eval_bar_r(r + h) - k.eval_bar_r(r - h)) / (2.0 * h);
                assert!((fd + k.eval_r(r)).abs() < 1e-6, "{k:?} at {r}: {fd} vs {}", k.eval_r(r));
                assert!(k.eval_bar_r(r - 0.01) >= k.eval_bar_r(r));
            }
        }
    }

    #[test]
    fn wendland_passes_every_clause() {
        let rep = validate_kernel(&KernelSpec::wendland41(), 1001).unwrap();
        assert!(rep.all_passed(), "{rep}");
        assert!(rep.measured_delta0 >= 3.0 / 16.0 - 1e-15);
        assert!(rep.antiderivative_residual < 1e-10);
        let rep = validate_kernel(&KernelSpec::truncated_gaussian(1.0), 500).unwrap();
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn cosine_profile_fails_nonnegativity() {
        let k = KernelSpec::custom("cos", |r| (2.0 * std::f64::consts::PI * r).cos());
        let rep = validate_kernel(&k, 1000).unwrap();
        assert!(!rep.support.passed);
        let w = rep.support.witness.unwrap();
        assert!(k.eval_r(w) < 0.0);
    }

    #[test]
    fn raised_cosine_fails_smoothness_at_edge() {
        use std::f64::consts::PI;
        let k = KernelSpec::custom("raised-cosine", |r| 0.5 * (1.0 + (PI * r).cos()));
        let rep = validate_kernel(&k, 1000).unwrap();
        assert!(rep.support.passed);
        assert!(!rep.smoothness.passed);
        // One-sided curvature tends to pi^2 / 2.
        assert!((rep.measured_c2_jump - PI * PI / 2.0).abs() < 1e-2);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(validate_kernel(&KernelSpec::wendland41(), 99).is_err());
    }

    #[test]
    fn scaling_multiplies_both_profiles() {
        let k = KernelSpec::wendland41();
        let c = k.scaled(2.5);
        for r in [0.0, 0.2, 0.7, 0.99] {
            assert_abs_diff_eq!(c.eval_r(r), 2.5 * k.eval_r(r), epsilon = 1e-15);
            assert_abs_diff_eq!(c.eval_bar_r(r), 2.5 * k.eval_bar_r(r), epsilon = 1e-15);
        }
    }
}
