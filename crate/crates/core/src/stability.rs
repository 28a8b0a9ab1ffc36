//! Local stability analysis of the switched linear system that governs the
//! fluid model away from the reflecting boundary.
//!
//! For `y >= 0` the centered state `u = (x, y, w)` obeys `u' = A+ u`, for
//! `y < 0` it obeys `u' = A- u`. The two matrices differ only in their second
//! column, so `A+ - A-` has rank one (its `w` row is `(2 - alpha) mu`, never
//! zero). For two Hurwitz
//! matrices with a rank-one difference a common quadratic Lyapunov function
//! exists iff their product has no negative real eigenvalue; that is the test
//! [`classify`] runs. The two closed-form sufficient conditions on
//! `(gamma, epsilon)` are checked separately.

use nalgebra::Matrix3 as NMatrix3;
use serde::Serialize;

use crate::cubic::{
    cubic_discriminant, has_negative_real_root, routh_hurwitz_cubic, sturm_count, CubicPoly, EIG_TOL,
};
use crate::model::ModelParams;

/// Dense 3x3 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub const IDENTITY: Matrix3 = Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn mul(&self, rhs: &Matrix3) -> Matrix3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Matrix3(out)
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn sub(&self, rhs: &Matrix3) -> Matrix3 {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v -= rhs.0[i][j];
            }
        }
        Matrix3(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> [f64; 3] {
        let m = NMatrix3::from_fn(|i, j| self.0[i][j]);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        [sv[0], sv[1], sv[2]]
    }

    /// Number of singular values above `1e-10` times the largest.
    pub fn rank(&self) -> usize {
        let sv = self.singular_values();
        if sv[0] == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > 1e-10 * sv[0]).count()
    }
}

/// Dynamics matrix on the `y >= 0` domain.
pub fn build_a_plus(p: &ModelParams) -> Matrix3 {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    let h = 0.5 * alpha * mu;
    Matrix3([
        [-gamma * beta, gamma * h - epsilon, -gamma * h],
        [beta, -h, h],
        [beta, -0.5 * (alpha - 2.0) * mu, 0.5 * (alpha - 2.0) * mu],
    ])
}

/// Dynamics matrix on the `y < 0` domain.
pub fn build_a_minus(p: &ModelParams) -> Matrix3 {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    let h = 0.5 * alpha * mu;
    Matrix3([
        [-gamma * beta, -gamma * h - epsilon, -gamma * h],
        [beta, h, h],
        [beta, 0.5 * (alpha - 2.0) * mu, 0.5 * (alpha - 2.0) * mu],
    ])
}

/// Closed-form inverse of [`build_a_plus`].
pub fn inverse_a_plus(p: &ModelParams) -> Matrix3 {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    Matrix3([
        [0.0, -(alpha - 2.0) / (2.0 * beta), alpha / (2.0 * beta)],
        [-1.0 / epsilon, -gamma / epsilon, 0.0],
        [-1.0 / epsilon, (epsilon - gamma * mu) / (epsilon * mu), -1.0 / mu],
    ])
}

/// Monic characteristic polynomial `t^3 - tr(M) t^2 + m2 t - det(M)`, where
/// `m2` is the sum of the principal 2x2 minors.
pub fn char_poly(m: &Matrix3) -> CubicPoly {
    let a = &m.0;
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    CubicPoly::new(1.0, -m.trace(), minors, -m.det())
}

/// Characteristic polynomial of `A+ A-` in closed form.
pub fn product_char_poly(p: &ModelParams) -> CubicPoly {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    let (b2, g2, e2, m2) = (beta * beta, gamma * gamma, epsilon * epsilon, mu * mu);
    let b = -(m2 - alpha * m2 + b2 * g2 - 2.0 * beta * epsilon - alpha * beta * gamma * mu);
    let c = b2 * e2 + b2 * g2 * m2 - 2.0 * beta * epsilon * m2 + alpha * beta * epsilon * m2;
    let d = -b2 * e2 * m2;
    CubicPoly::new(1.0, b, c, d)
}

/// Numerator `N(tau)` of `det[(A+)^-1 + tau A-] = -N(tau) / (beta epsilon mu)`.
///
/// `N(tau) = prod_i (1 + tau l_i)` over the eigenvalues `l_i` of `A+ A-`, so
/// `N` has a root on `[0, inf)` iff the product has a negative real
/// eigenvalue.
pub fn tau_pencil_numerator(p: &ModelParams) -> CubicPoly {
    let prod = product_char_poly(p);
    CubicPoly::new(-prod.a3, prod.a2, -prod.a1, 1.0)
}

/// Default probe points for the sampled cross-check in [`tau_pencil_positive`].
pub const DEFAULT_TAU_GRID: [f64; 7] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4];

/// Whether `(A+)^-1 + tau A-` is nonsingular for every `tau >= 0`.
///
/// Decided by counting the real roots of `N(tau)` on `(0, inf)` with a Sturm
/// sequence (`N(0) = 1`). A nonpositive value of `N` on `probe_grid` also
/// rules positivity out.
pub fn tau_pencil_positive(p: &ModelParams, probe_grid: &[f64]) -> bool {
    let n = tau_pencil_numerator(p);
    if probe_grid.iter().any(|&t| t >= 0.0 && !(n.eval(t) > 0.0)) {
        return false;
    }
    match sturm_count(&n, 0.0, f64::INFINITY) {
        Ok(k) => k == 0,
        Err(_) => false,
    }
}

/// Whether `A-` is Hurwitz, via the closed-form Routh-Hurwitz reduction
/// `(beta gamma / mu + 1 - alpha)(gamma mu / epsilon + 1) > 1`.
pub fn aminus_hurwitz(p: &ModelParams) -> bool {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    (beta * gamma / mu + (1.0 - alpha)) * (gamma * mu / epsilon + 1.0) > 1.0
}

/// Numerical rank of `A+ - A-`.
pub fn rank_of_difference(p: &ModelParams) -> usize {
    build_a_plus(p).sub(&build_a_minus(p)).rank()
}

/// Outcome of a closed-form sufficient condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    /// Set when the condition is not applicable to the parameters.
    pub reason: Option<&'static str>,
}

impl ConditionCheck {
    fn of(holds: bool) -> Self {
        Self { holds, reason: None }
    }
}

/// First sufficient condition on the feedback gains (requires `alpha > 0`):
///
/// ```text
/// beta gamma^2 / 4 < epsilon < beta gamma^2 / 2
/// epsilon > beta gamma^2 / 2 - (alpha gamma mu / 2 - (1 - alpha) mu^2 / (2 beta))
/// gamma > (1 - alpha) mu / (alpha beta)
/// ```
///
/// Under it `A-` is Hurwitz and the product cubic has `b > 0`, `b^2 - 4c < 0`
/// and negative discriminant.
pub fn check_condition_thm2(p: &ModelParams) -> ConditionCheck {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    if !(alpha > 0.0 && alpha < 1.0) {
        return ConditionCheck { holds: false, reason: Some("requires alpha in (0,1)") };
    }
    let bg2 = beta * gamma * gamma;
    let band = bg2 / 4.0 < epsilon && epsilon < bg2 / 2.0;
    let lower = epsilon > bg2 / 2.0 - (alpha * gamma * mu / 2.0 - (1.0 - alpha) * mu * mu / (2.0 * beta));
    let gain = gamma > (1.0 - alpha) * mu / (alpha * beta);
    ConditionCheck::of(band && lower && gain)
}

/// Second sufficient condition on the feedback gains:
///
/// ```text
/// epsilon < beta gamma^2 / 2 - alpha gamma mu / 2
/// gamma > alpha mu / beta
/// ```
///
/// Under it every coefficient of `N(tau)` is positive.
pub fn check_condition_thm3(p: &ModelParams) -> ConditionCheck {
    let ModelParams { alpha, beta, mu, gamma, epsilon, .. } = *p;
    let upper = epsilon < beta * gamma * gamma / 2.0 - alpha * gamma * mu / 2.0;
    let gain = gamma > alpha * mu / beta;
    ConditionCheck::of(upper && gain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Both matrices Hurwitz, rank-one difference, product free of negative
    /// real eigenvalues: a common quadratic Lyapunov function exists.
    #[serde(rename = "ExponentiallyStable_CQLF")]
    ExponentiallyStableCqlf,
    /// `A-` Hurwitz but no common quadratic Lyapunov function was certified.
    LocallyStableHeuristic,
    /// The rank-one criterion does not apply.
    NotClassified,
    AminusNotHurwitz,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub cond_thm2: bool,
    pub cond_thm3: bool,
    pub aplus_hurwitz: bool,
    pub aminus_hurwitz: bool,
    pub diff_rank_one: bool,
    pub product_has_negative_real_eig: bool,
    pub cqlf_exists: bool,
    pub discriminant_product: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Runs every criterion and aggregates a verdict.
///
/// Hurwitz flags come from Routh-Hurwitz on the characteristic polynomials
/// of the built matrices.
pub fn classify(p: &ModelParams) -> StabilityReport {
    let a_plus = build_a_plus(p);
    let a_minus = build_a_minus(p);
    let aplus_hurwitz = routh_hurwitz_cubic(&char_poly(&a_plus)).unwrap_or(false);
    let aminus = routh_hurwitz_cubic(&char_poly(&a_minus)).unwrap_or(false);
    let diff_rank_one = a_plus.sub(&a_minus).rank() == 1;

    let prod = product_char_poly(p);
    let product_has_negative_real_eig = has_negative_real_root(&prod, EIG_TOL).unwrap_or(true);
    let discriminant_product = cubic_discriminant(&prod).unwrap_or(f64::NAN);
    let cqlf_exists = aplus_hurwitz && aminus && diff_rank_one && !product_has_negative_real_eig;

    let thm2 = check_condition_thm2(p);
    let thm3 = check_condition_thm3(p);
    let mut notes = Vec::new();
    if let Some(r) = thm2.reason {
        notes.push(format!("cond_thm2: {r}"));
    }
    if !diff_rank_one {
        notes.push("A+ - A- does not have rank one; rank-one CQLF criterion not applicable".into());
    }

    let verdict = if !aminus {
        Verdict::AminusNotHurwitz
    } else if cqlf_exists {
        Verdict::ExponentiallyStableCqlf
    } else if aplus_hurwitz && diff_rank_one {
        Verdict::LocallyStableHeuristic
    } else {
        Verdict::NotClassified
    };

    StabilityReport {
        cond_thm2: thm2.holds,
        cond_thm3: thm3.holds,
        aplus_hurwitz,
        aminus_hurwitz: aminus,
        diff_rank_one,
        product_has_negative_real_eig,
        cqlf_exists,
        discriminant_product,
        verdict,
        notes,
    }
}
