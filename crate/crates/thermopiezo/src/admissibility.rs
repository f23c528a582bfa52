//! Definiteness certification for the uniqueness hypotheses.
//!
//! Two independent routes are provided and cross-validated against each
//! other:
//!
//! * [`check_isotropic`] evaluates the closed-form inequality lists for an
//!   isotropic material (shear/bulk conditions for the strain form, the
//!   nine gradient-elastic inequalities, the five electro-thermal
//!   conditions, and the dissipation-form signs).
//! * [`check_numeric`] assembles the quadratic forms W (24 variables),
//!   G (10) and P (4) as explicit symmetric matrices from any material and
//!   decides definiteness by eigenvalues.
//!
//! [`cross_validate`] samples random isotropic materials and compares the
//! verdicts form by form, excluding samples whose smallest eigenvalue sits
//! inside a boundary band where roundoff could flip the sign.
//!
//! Matrix convention: an assembled matrix M represents the form as
//! `f(x) = xᵀ M x`, with no extra 1/2. Under this convention the 3x3 tail
//! block of the 18-variable gradient form has eigenvalues
//! `2(γ4-γ5)` (twice) and `2(γ4+2γ5)`.

use crate::constitutive::{form_f, form_p, form_w};
use crate::error::{Error, Result};
use crate::material::{
    expand_isotropic, validate_symmetries, AnisoMaterial, IsoMaterial, DEFAULT_SYMMETRY_TOL,
};
use crate::tensor::{unpack18, Kappa18, Sym2};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default relative eigenvalue tolerance (scaled by the matrix's largest
/// absolute entry).
pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;

/// Relative width of the boundary band excluded by [`cross_validate`].
pub const BOUNDARY_BAND: f64 = 1e-6;

/// Symmetric matrix of a quadratic form together with its variable-ordering
/// label.
#[derive(Clone, Debug)]
pub struct QuadFormMatrix {
    pub label: String,
    pub matrix: DMatrix<f64>,
}

impl QuadFormMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn eigenvalues_sorted(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues_sorted()[0]
    }

    /// max |M - Mᵀ| relative to the largest entry (0 by construction here).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        let scale = self.norm_max();
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }
}

/// Build the matrix M with f(x) = xᵀ M x from a quadratic evaluator, via
/// M_pq = ½[f(e_p+e_q) - f(e_p) - f(e_q)] on unit basis vectors.
///
/// The evaluator is probed with f(2e_p) = 4 f(e_p) on every basis direction;
/// a deviation beyond 1e-10 (relative) is rejected.
pub fn assemble_quadform(
    dim: usize,
    label: &str,
    f: impl Fn(&[f64]) -> f64,
) -> Result<QuadFormMatrix> {
    let mut x = vec![0.0; dim];
    let mut fe = vec![0.0; dim];
    for p in 0..dim {
        x[p] = 1.0;
        fe[p] = f(&x);
        x[p] = 2.0;
        let f2 = f(&x);
        x[p] = 0.0;
        let deviation = (f2 - 4.0 * fe[p]).abs();
        if deviation > 1e-10 * (1.0 + 4.0 * fe[p].abs()) {
            return Err(Error::NonQuadratic {
                index: p,
                deviation,
            });
        }
    }
    let mut m = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        m[(p, p)] = fe[p];
        for q in (p + 1)..dim {
            x[p] = 1.0;
            x[q] = 1.0;
            let v = 0.5 * (f(&x) - fe[p] - fe[q]);
            x[p] = 0.0;
            x[q] = 0.0;
            m[(p, q)] = v;
            m[(q, p)] = v;
        }
    }
    Ok(QuadFormMatrix {
        label: label.into(),
        matrix: m,
    })
}

/// 18x18 matrix of the gradient-elastic form in the fixed component
/// ordering; block-diagonal as diag(A5, A5, A5, A3).
pub fn assemble_w2_matrix(m: &IsoMaterial) -> QuadFormMatrix {
    let a = expand_isotropic(m);
    assemble_quadform(18, "kappa18-paper-order", |x| {
        let mut c = Kappa18([0.0; 18]);
        c.0.copy_from_slice(x);
        form_w(&a, &Sym2::ZERO, &unpack18(&c))
    })
    .expect("the gradient-elastic form is quadratic")
}

/// 24x24 matrix of W over (e: 6, κ: 18 in the fixed ordering).
pub fn assemble_w_matrix(m: &AnisoMaterial) -> QuadFormMatrix {
    assemble_quadform(24, "W-order: e(6)+kappa18(18)", |x| {
        let e = Sym2([x[0], x[1], x[2], x[3], x[4], x[5]]);
        let mut c = Kappa18([0.0; 18]);
        c.0.copy_from_slice(&x[6..24]);
        form_w(m, &e, &unpack18(&c))
    })
    .expect("W is quadratic")
}

/// 10x10 matrix of G over (E: 3, V: 6, z: 1).
pub fn assemble_g_matrix(m: &AnisoMaterial) -> Result<QuadFormMatrix> {
    if m.beta == 0.0 {
        return Err(Error::BetaZero);
    }
    let c44g = m.a44 + m.gamma / (m.beta * m.beta);
    assemble_quadform(10, "G-order: E(3)+V(6)+z(1)", |x| {
        let e = [x[0], x[1], x[2]];
        let v = Sym2([x[3], x[4], x[5], x[6], x[7], x[8]]);
        let z = x[9];
        form_f(m, &e, &v, z) - 0.5 * c44g * z * z
    })
}

/// 4x4 matrix of P over (ξ: 1, η: 3).
pub fn assemble_p_matrix(m: &AnisoMaterial) -> Result<QuadFormMatrix> {
    if m.beta == 0.0 {
        return Err(Error::BetaZero);
    }
    assemble_quadform(4, "P-order: xi(1)+eta(3)", |x| {
        form_p(m, x[0], &[x[1], x[2], x[3]]).expect("beta checked")
    })
}

/// Closed-form eigenvalues of the 3x3 tail block: 2(γ4-γ5) twice and
/// 2(γ4+2γ5) once.
pub fn a3_eigenvalues(gamma4: f64, gamma5: f64) -> [f64; 3] {
    [
        2.0 * (gamma4 - gamma5),
        2.0 * (gamma4 - gamma5),
        2.0 * (gamma4 + 2.0 * gamma5),
    ]
}

/// Eigenvalue comparison of the assembled 5x5 block against its reference
/// reduction: a 3x3 coupled block plus two closed-form eigenvalues ξ1, ξ2.
#[derive(Clone, Debug, Serialize)]
pub struct A5Check {
    /// Sorted eigenvalues of the assembled block.
    pub assembled: [f64; 5],
    /// Sorted eigenvalues of the reference reduction.
    pub reference: [f64; 5],
    /// Largest difference relative to the spectrum scale.
    pub max_rel_err: f64,
}

/// Closed-form pair ξ1, ξ2 = ½(3γ4 + 2γ5 ± √((γ4+2γ5)² + 16γ5²)).
pub fn a5_xi_pair(gamma4: f64, gamma5: f64) -> (f64, f64) {
    let disc = ((gamma4 + 2.0 * gamma5).powi(2) + 16.0 * gamma5 * gamma5).sqrt();
    let base = 3.0 * gamma4 + 2.0 * gamma5;
    (0.5 * (base + disc), 0.5 * (base - disc))
}

/// Compare the eigenvalue multiset of the assembled 5x5 block with the
/// reference reduction.
///
/// The reference 3x3 coupled block is not symmetric as displayed, but it is
/// symmetrized exactly by the diagonal similarity diag(1, √2, 1), so its
/// spectrum is obtained with a symmetric eigensolver.
pub fn a5_eigen_check(m: &IsoMaterial) -> A5Check {
    let w2 = assemble_w2_matrix(m);
    let a5 = QuadFormMatrix {
        label: "A5 block".into(),
        matrix: w2.matrix.view((0, 0), (5, 5)).into_owned(),
    };
    let mut assembled = [0.0; 5];
    assembled.copy_from_slice(&a5.eigenvalues_sorted());

    let (g1, g2, g3, g4, g5) = (m.gamma1, m.gamma2, m.gamma3, m.gamma4, m.gamma5);
    let s2 = std::f64::consts::SQRT_2;
    let b01 = (2.0 * g1 + g3) / s2;
    let b02 = 2.0 * (g1 + g5);
    let b12 = s2 * (g1 + 2.0 * g2);
    let xi = 2.0 * (g1 + g2 + g5) + 0.5 * (g3 + 2.0 * g4);
    let coupled = DMatrix::from_row_slice(
        3,
        3,
        &[
            g3 + g4,
            b01,
            b02,
            b01,
            xi,
            b12,
            b02,
            b12,
            2.0 * (2.0 * g2 + g4 + g5),
        ],
    );
    let mut reference: Vec<f64> = coupled.symmetric_eigen().eigenvalues.iter().copied().collect();
    let (xi1, xi2) = a5_xi_pair(g4, g5);
    reference.push(xi1);
    reference.push(xi2);
    reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut reference_arr = [0.0; 5];
    reference_arr.copy_from_slice(&reference);

    let scale = assembled
        .iter()
        .chain(reference_arr.iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let max_rel_err = assembled
        .iter()
        .zip(reference_arr.iter())
        .fold(0.0f64, |a, (&x, &y)| a.max((x - y).abs()))
        / scale;
    A5Check {
        assembled,
        reference: reference_arr,
        max_rel_err,
    }
}

/// Inequality sense for a checked condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    /// margin ≥ 0, allowing -tol slack.
    NonStrict,
    /// margin > 0, requiring margin > tol.
    Strict,
}

/// One checked admissibility condition; `margin` is the signed distance into
/// the feasible region.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub sense: Sense,
    pub margin: f64,
    pub pass: bool,
}

impl Condition {
    fn new(name: &str, margin: f64, sense: Sense, tol: f64) -> Self {
        let pass = match sense {
            Sense::NonStrict => margin >= -tol,
            Sense::Strict => margin > tol,
        };
        Condition {
            name: name.into(),
            value: margin,
            sense,
            margin,
            pass,
        }
    }
}

/// Per-condition definiteness report with the aggregate verdict flags.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub route: &'static str,
    pub tol: f64,
    pub conditions: Vec<Condition>,
    pub w_psd: bool,
    pub g_pd: bool,
    pub p_psd: bool,
    /// ρ, T0, β > 0, symmetry relations, W psd, G pd.
    pub theorem1_hypotheses: bool,
    /// Isotropic-only scalar list (positivity plus γ ≥ 0, α66 ≥ 0) together
    /// with the full inequality lists; absent for anisotropic inputs.
    pub theorem2_hypotheses: Option<bool>,
    /// All of the above plus P psd.
    pub admissible: bool,
}

fn all_pass(conds: &[Condition], prefix: &str) -> bool {
    conds
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .all(|c| c.pass)
}

/// Closed-form inequality checks for an isotropic material.
///
/// The electro-thermal block is positive definite iff `μ̃ < 0`,
/// `3λ̃ + 2μ̃ < 0`, `α33 < 0`, `a44 + γ/β² < 0` and
/// `(3λ̃ + 2μ̃)(a44 + γ/β²) > 3 α47²`; note that the permittivity-like
/// coefficient must be negative, since the field energy enters the form with
/// a reversed sign.
pub fn check_isotropic(m: &IsoMaterial, tol: f64) -> AdmissibilityReport {
    let mut c = Vec::new();
    let (g1, g2, g3, g4, g5) = (m.gamma1, m.gamma2, m.gamma3, m.gamma4, m.gamma5);

    c.push(Condition::new("base: rho > 0", m.rho, Sense::Strict, tol));
    c.push(Condition::new("base: T0 > 0", m.t0, Sense::Strict, tol));
    c.push(Condition::new("base: beta > 0", m.beta, Sense::Strict, tol));

    c.push(Condition::new("W1: mu >= 0", m.mu, Sense::NonStrict, tol));
    c.push(Condition::new(
        "W1: 3*lambda + 2*mu >= 0",
        3.0 * m.lambda + 2.0 * m.mu,
        Sense::NonStrict,
        tol,
    ));

    let w2 = [
        ("W2: gamma3 + gamma4 >= 0", g3 + g4),
        ("W2: gamma4 - gamma5 >= 0", g4 - g5),
        ("W2: gamma4 + 2*gamma5 >= 0", g4 + 2.0 * g5),
        ("W2: 2*gamma2 + gamma4 + gamma5 >= 0", 2.0 * g2 + g4 + g5),
        (
            "W2: 4*(gamma1+gamma2+gamma5) + gamma3 + 2*gamma4 >= 0",
            4.0 * (g1 + g2 + g5) + g3 + 2.0 * g4,
        ),
        (
            "W2: (gamma3+gamma4)*(4*gamma2+3*gamma4+4*gamma5) >= (2*gamma1-gamma4)^2",
            (g3 + g4) * (4.0 * g2 + 3.0 * g4 + 4.0 * g5) - (2.0 * g1 - g4).powi(2),
        ),
        (
            "W2: (gamma3+gamma4)*(2*gamma2+gamma4+gamma5) >= 2*(gamma1+gamma5)^2",
            (g3 + g4) * (2.0 * g2 + g4 + g5) - 2.0 * (g1 + g5).powi(2),
        ),
        (
            "W2: (2*gamma2+gamma4+gamma5)*(gamma3+4*gamma4+6*gamma5) >= 2*(gamma1-gamma4-gamma5)^2",
            (2.0 * g2 + g4 + g5) * (g3 + 4.0 * g4 + 6.0 * g5) - 2.0 * (g1 - g4 - g5).powi(2),
        ),
        (
            "W2: (gamma4+2*gamma5)*[(5*gamma3+4*gamma4-2*gamma5)*(10*gamma2+3*gamma4+gamma5) - 2*(5*gamma1-gamma4+3*gamma5)^2] >= 0",
            (g4 + 2.0 * g5)
                * ((5.0 * g3 + 4.0 * g4 - 2.0 * g5) * (10.0 * g2 + 3.0 * g4 + g5)
                    - 2.0 * (5.0 * g1 - g4 + 3.0 * g5).powi(2)),
        ),
    ];
    for (name, margin) in w2 {
        c.push(Condition::new(name, margin, Sense::NonStrict, tol));
    }

    let c44g = m.a44 + m.gamma / (m.beta * m.beta);
    let lt3 = 3.0 * m.lambda_tilde + 2.0 * m.mu_tilde;
    c.push(Condition::new("G: mu_tilde < 0", -m.mu_tilde, Sense::Strict, tol));
    c.push(Condition::new(
        "G: 3*lambda_tilde + 2*mu_tilde < 0",
        -lt3,
        Sense::Strict,
        tol,
    ));
    c.push(Condition::new("G: alpha33 < 0", -m.alpha33, Sense::Strict, tol));
    c.push(Condition::new(
        "G: a44 + gamma/beta^2 < 0",
        -c44g,
        Sense::Strict,
        tol,
    ));
    c.push(Condition::new(
        "G: (3*lambda_tilde+2*mu_tilde)*(a44+gamma/beta^2) > 3*alpha47^2",
        lt3 * c44g - 3.0 * m.alpha47 * m.alpha47,
        Sense::Strict,
        tol,
    ));

    c.push(Condition::new(
        "P: gamma/beta >= 0",
        m.gamma / m.beta,
        Sense::NonStrict,
        tol,
    ));
    c.push(Condition::new(
        "P: alpha66/beta >= 0",
        m.alpha66 / m.beta,
        Sense::NonStrict,
        tol,
    ));

    c.push(Condition::new(
        "theorem2: gamma >= 0",
        m.gamma,
        Sense::NonStrict,
        tol,
    ));
    c.push(Condition::new(
        "theorem2: alpha66 >= 0",
        m.alpha66,
        Sense::NonStrict,
        tol,
    ));

    let base = all_pass(&c, "base");
    let w_psd = all_pass(&c, "W1") && all_pass(&c, "W2");
    let g_pd = all_pass(&c, "G");
    let p_psd = all_pass(&c, "P");
    let theorem1 = base && w_psd && g_pd;
    let theorem2 = base && all_pass(&c, "theorem2") && w_psd && g_pd;
    AdmissibilityReport {
        route: "isotropic-closed-form",
        tol,
        conditions: c,
        w_psd,
        g_pd,
        p_psd,
        theorem1_hypotheses: theorem1,
        theorem2_hypotheses: Some(theorem2),
        admissible: theorem1 && theorem2 && p_psd,
    }
}

fn eigen_condition(
    name: &str,
    q: &QuadFormMatrix,
    sense: Sense,
    tol: f64,
) -> (Condition, f64, f64) {
    let min_eig = q.min_eigenvalue();
    let norm = q.norm_max();
    let margin = if norm == 0.0 { 0.0 } else { min_eig / norm };
    (Condition::new(name, margin, sense, tol), min_eig, norm)
}

/// Eigenvalue-based definiteness checks for any (symmetry-valid) material.
///
/// Verdicts use the relative margin min_eig / max|entry|, so they are
/// invariant under uniform positive scaling of the coefficients.
pub fn check_numeric(m: &AnisoMaterial, tol: f64) -> Result<AdmissibilityReport> {
    validate_symmetries(m, DEFAULT_SYMMETRY_TOL).into_result()?;
    let mut c = Vec::new();
    c.push(Condition::new("base: rho > 0", m.rho, Sense::Strict, tol));
    c.push(Condition::new("base: T0 > 0", m.t0, Sense::Strict, tol));
    c.push(Condition::new("base: beta > 0", m.beta, Sense::Strict, tol));

    let w = assemble_w_matrix(m);
    let g = assemble_g_matrix(m)?;
    let p = assemble_p_matrix(m)?;
    let (cw, _, _) = eigen_condition(
        "W: min eigenvalue of the 24-dim strain form >= 0",
        &w,
        Sense::NonStrict,
        tol,
    );
    let (cg, _, _) = eigen_condition(
        "G: min eigenvalue of the 10-dim electro-thermal form > 0",
        &g,
        Sense::Strict,
        tol,
    );
    let (cp, _, _) = eigen_condition(
        "P: min eigenvalue of the 4-dim dissipation form >= 0",
        &p,
        Sense::NonStrict,
        tol,
    );
    let (w_psd, g_pd, p_psd) = (cw.pass, cg.pass, cp.pass);
    c.push(cw);
    c.push(cg);
    c.push(cp);
    let base = all_pass(&c, "base");
    let theorem1 = base && w_psd && g_pd;
    Ok(AdmissibilityReport {
        route: "numeric-eigenvalue",
        tol,
        conditions: c,
        w_psd,
        g_pd,
        p_psd,
        theorem1_hypotheses: theorem1,
        theorem2_hypotheses: None,
        admissible: theorem1 && p_psd,
    })
}

/// Agreement counters for one form.
#[derive(Clone, Debug, Serialize)]
pub struct FormAgreement {
    pub form: &'static str,
    pub compared: usize,
    pub excluded_boundary: usize,
    pub disagreements: usize,
}

/// A sample where the closed-form list and the eigenvalue verdict differ.
#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub sample_index: usize,
    pub form: &'static str,
    pub closed_form_pass: bool,
    pub numeric_pass: bool,
    pub min_eigenvalue: f64,
    pub matrix_norm: f64,
    pub material: IsoMaterial,
}

/// Result of a closed-form vs numeric sweep.
#[derive(Clone, Debug, Serialize)]
pub struct CrossValidateReport {
    pub samples: usize,
    pub range: f64,
    pub seed: u64,
    pub forms: Vec<FormAgreement>,
    pub total_compared: usize,
    pub total_disagreements: usize,
    /// 1.0 when nothing was compared.
    pub agreement_fraction: f64,
    pub disagreements: Vec<Disagreement>,
}

impl CrossValidateReport {
    pub fn all_agree(&self) -> bool {
        self.total_disagreements == 0
    }
}

/// Draw one isotropic material with every scalar uniform in
/// [-range, range]; ρ, T0 and β are drawn uniform in (0, range].
///
/// The draw order is fixed: rho, T0, beta, alpha4, gamma, lambda, mu,
/// gamma1..gamma5, lambdaStar, muStar, alpha0, beta0, lambdaTilde, muTilde,
/// alpha14, alpha33, alpha47, alpha66, a44.
pub fn sample_isotropic<R: Rng>(rng: &mut R, range: f64) -> IsoMaterial {
    fn pos<R: Rng>(rng: &mut R, range: f64) -> f64 {
        let v: f64 = rng.gen_range(0.0..range);
        if v == 0.0 {
            range
        } else {
            v
        }
    }
    let mut m = IsoMaterial::zero();
    m.rho = pos(rng, range);
    m.t0 = pos(rng, range);
    m.beta = pos(rng, range);
    m.alpha4 = rng.gen_range(-range..range);
    m.gamma = rng.gen_range(-range..range);
    m.lambda = rng.gen_range(-range..range);
    m.mu = rng.gen_range(-range..range);
    m.gamma1 = rng.gen_range(-range..range);
    m.gamma2 = rng.gen_range(-range..range);
    m.gamma3 = rng.gen_range(-range..range);
    m.gamma4 = rng.gen_range(-range..range);
    m.gamma5 = rng.gen_range(-range..range);
    m.lambda_star = rng.gen_range(-range..range);
    m.mu_star = rng.gen_range(-range..range);
    m.alpha0 = rng.gen_range(-range..range);
    m.beta0 = rng.gen_range(-range..range);
    m.lambda_tilde = rng.gen_range(-range..range);
    m.mu_tilde = rng.gen_range(-range..range);
    m.alpha14 = rng.gen_range(-range..range);
    m.alpha33 = rng.gen_range(-range..range);
    m.alpha47 = rng.gen_range(-range..range);
    m.alpha66 = rng.gen_range(-range..range);
    m.a44 = rng.gen_range(-range..range);
    m
}

/// Sample random isotropic materials and compare the closed-form verdicts
/// against the eigenvalue route, form by form. Samples whose smallest
/// eigenvalue magnitude falls below `BOUNDARY_BAND`·‖M‖ are excluded for
/// that form. Deterministic for a fixed seed.
pub fn cross_validate(samples: usize, range: f64, seed: u64) -> CrossValidateReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forms = vec![
        FormAgreement {
            form: "W",
            compared: 0,
            excluded_boundary: 0,
            disagreements: 0,
        },
        FormAgreement {
            form: "G",
            compared: 0,
            excluded_boundary: 0,
            disagreements: 0,
        },
        FormAgreement {
            form: "P",
            compared: 0,
            excluded_boundary: 0,
            disagreements: 0,
        },
    ];
    let mut disagreements = Vec::new();

    for index in 0..samples {
        let iso = sample_isotropic(&mut rng, range);
        let closed = check_isotropic(&iso, DEFAULT_EIGEN_TOL);
        let aniso = expand_isotropic(&iso);
        let w = assemble_w_matrix(&aniso);
        let g = assemble_g_matrix(&aniso).expect("beta drawn positive");
        let p = assemble_p_matrix(&aniso).expect("beta drawn positive");

        let closed_flags = [closed.w_psd, closed.g_pd, closed.p_psd];
        for (slot, (q, strict)) in [(&w, false), (&g, true), (&p, false)].iter().enumerate() {
            let min_eig = q.min_eigenvalue();
            let norm = q.norm_max();
            if min_eig.abs() < BOUNDARY_BAND * norm {
                forms[slot].excluded_boundary += 1;
                continue;
            }
            let margin = if norm == 0.0 { 0.0 } else { min_eig / norm };
            let numeric_pass = if *strict {
                margin > DEFAULT_EIGEN_TOL
            } else {
                margin >= -DEFAULT_EIGEN_TOL
            };
            forms[slot].compared += 1;
            if numeric_pass != closed_flags[slot] {
                forms[slot].disagreements += 1;
                disagreements.push(Disagreement {
                    sample_index: index,
                    form: forms[slot].form,
                    closed_form_pass: closed_flags[slot],
                    numeric_pass,
                    min_eigenvalue: min_eig,
                    matrix_norm: norm,
                    material: iso.clone(),
                });
            }
        }
    }

    let total_compared: usize = forms.iter().map(|f| f.compared).sum();
    let total_disagreements: usize = forms.iter().map(|f| f.disagreements).sum();
    let agreement_fraction = if total_compared == 0 {
        1.0
    } else {
        1.0 - total_disagreements as f64 / total_compared as f64
    };
    CrossValidateReport {
        samples,
        range,
        seed,
        forms,
        total_compared,
        total_disagreements,
        agreement_fraction,
        disagreements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn assemble_simple_forms() {
        let q = assemble_quadform(2, "x1^2", |x| x[0] * x[0]).unwrap();
        assert_eq!(q.matrix[(0, 0)], 1.0);
        assert_eq!(q.matrix[(0, 1)], 0.0);
        assert_eq!(q.matrix[(1, 1)], 0.0);

        let q = assemble_quadform(2, "x1*x2", |x| x[0] * x[1]).unwrap();
        assert_eq!(q.matrix[(0, 0)], 0.0);
        assert_eq!(q.matrix[(0, 1)], 0.5);
        assert_eq!(q.matrix[(1, 0)], 0.5);
    }

    #[test]
    fn assemble_rejects_non_quadratic() {
        let err = assemble_quadform(2, "cubic", |x| x[0] * x[0] * x[0]).unwrap_err();
        assert!(matches!(err, Error::NonQuadratic { index: 0, .. }));
        let err = assemble_quadform(2, "affine", |x| x[0] * x[0] + x[1]).unwrap_err();
        assert!(matches!(err, Error::NonQuadratic { index: 1, .. }));
    }

    #[test]
    fn w2_matrix_tail_block() {
        let m = IsoMaterial {
            gamma4: 1.0,
            ..IsoMaterial::zero()
        };
        let q = assemble_w2_matrix(&m);
        for p in 15..18 {
            assert_relative_eq!(q.matrix[(p, p)], 2.0);
        }
        assert_eq!(q.symmetry_defect(), 0.0);

        let zero = assemble_w2_matrix(&IsoMaterial::zero());
        assert_eq!(zero.norm_max(), 0.0);
    }

    #[test]
    fn w2_matrix_block_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let mut m = IsoMaterial::zero();
            m.gamma1 = rng.gen_range(-2.0..2.0);
            m.gamma2 = rng.gen_range(-2.0..2.0);
            m.gamma3 = rng.gen_range(-2.0..2.0);
            m.gamma4 = rng.gen_range(-2.0..2.0);
            m.gamma5 = rng.gen_range(-2.0..2.0);
            let q = assemble_w2_matrix(&m);
            let norm = q.norm_max();
            let blocks = [(0, 5), (5, 5), (10, 5), (15, 3)];
            for i in 0..18 {
                for j in 0..18 {
                    let same_block = blocks
                        .iter()
                        .any(|&(s, len)| i >= s && i < s + len && j >= s && j < s + len);
                    if !same_block {
                        assert!(
                            q.matrix[(i, j)].abs() <= 1e-14 * norm,
                            "off-block entry at ({i},{j})"
                        );
                    }
                }
            }
            // the three 5x5 blocks coincide
            for s in [5, 10] {
                for i in 0..5 {
                    for j in 0..5 {
                        assert!(
                            (q.matrix[(i, j)] - q.matrix[(s + i, s + j)]).abs() <= 1e-14 * norm
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn a3_eigenvalue_formulas() {
        assert_eq!(a3_eigenvalues(0.0, 0.0), [0.0, 0.0, 0.0]);
        let ev = a3_eigenvalues(2.0, 1.0);
        let mut s = ev.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(s, vec![2.0, 2.0, 8.0]);

        // numeric oracle on the assembled tail block
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g4 = rng.gen_range(-2.0..2.0);
            let g5 = rng.gen_range(-2.0..2.0);
            let m = IsoMaterial {
                gamma4: g4,
                gamma5: g5,
                ..IsoMaterial::zero()
            };
            let q = assemble_w2_matrix(&m);
            let tail = QuadFormMatrix {
                label: "A3".into(),
                matrix: q.matrix.view((15, 15), (3, 3)).into_owned(),
            };
            let mut numeric = tail.eigenvalues_sorted();
            let mut closed = a3_eigenvalues(g4, g5).to_vec();
            closed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let scale = closed.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
            for (n, c) in numeric.drain(..).zip(closed) {
                assert!((n - c).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn a5_check_examples() {
        let zero = a5_eigen_check(&IsoMaterial::zero());
        assert_eq!(zero.assembled, [0.0; 5]);
        assert_eq!(zero.reference, [0.0; 5]);

        let (xi1, xi2) = a5_xi_pair(0.0, 1.0);
        assert_relative_eq!(xi1, 1.0 + 5.0f64.sqrt());
        assert_relative_eq!(xi2, 1.0 - 5.0f64.sqrt());

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let m = IsoMaterial {
                gamma1: rng.gen_range(-2.0..2.0),
                gamma2: rng.gen_range(-2.0..2.0),
                gamma3: rng.gen_range(-2.0..2.0),
                gamma4: rng.gen_range(-2.0..2.0),
                gamma5: rng.gen_range(-2.0..2.0),
                ..IsoMaterial::zero()
            };
            let check = a5_eigen_check(&m);
            assert!(check.max_rel_err <= 1e-9, "mismatch: {check:?}");
        }
    }

    #[test]
    fn isotropic_check_examples() {
        let tol = DEFAULT_EIGEN_TOL;
        let bad_mu = IsoMaterial {
            mu: -1.0,
            ..IsoMaterial::reference()
        };
        let report = check_isotropic(&bad_mu, tol);
        let w1 = report
            .conditions
            .iter()
            .find(|c| c.name == "W1: mu >= 0")
            .unwrap();
        assert!(!w1.pass);
        assert_eq!(w1.margin, -1.0);
        assert!(!report.w_psd);

        // gamma3 = gamma4 = 1 satisfies every W2 inequality
        let ok = IsoMaterial {
            lambda: 1.0,
            mu: 1.0,
            gamma3: 1.0,
            gamma4: 1.0,
            ..IsoMaterial::zero()
        };
        let report = check_isotropic(&ok, tol);
        assert!(report.w_psd, "{:#?}", report.conditions);
        let ev = a3_eigenvalues(1.0, 0.0);
        assert_eq!(ev, [2.0, 2.0, 2.0]);

        // product condition margin: (3*(-2)+2*(-1))*(-3+1) - 3*1 = 13
        let g_example = IsoMaterial {
            lambda_tilde: -2.0,
            mu_tilde: -1.0,
            alpha33: 1.0,
            a44: -3.0,
            gamma: 1.0,
            beta: 1.0,
            alpha47: 1.0,
            ..IsoMaterial::zero()
        };
        let report = check_isotropic(&g_example, tol);
        let product = report
            .conditions
            .iter()
            .find(|c| c.name.starts_with("G: (3*lambda_tilde"))
            .unwrap();
        assert!(product.pass);
        assert_relative_eq!(product.margin, 13.0);

        let reference = check_isotropic(&IsoMaterial::reference(), tol);
        assert!(reference.admissible, "{:#?}", reference.conditions);
        assert_eq!(reference.theorem2_hypotheses, Some(true));
    }

    #[test]
    fn numeric_check_examples() {
        let tol = DEFAULT_EIGEN_TOL;
        let zero = expand_isotropic(&IsoMaterial::zero());
        let report = check_numeric(&zero, tol).unwrap();
        assert!(report.w_psd);
        assert!(!report.g_pd);

        // dissipation form with a dominant cross coupling is not psd:
        // the 2x2 minor gamma*a66_11 - a56_1^2 = 1 - 100 < 0
        let mut m = expand_isotropic(&IsoMaterial::zero());
        m.gamma = 1.0;
        m.a56 = [10.0, 0.0, 0.0];
        m.a66 = Sym2::identity();
        let report = check_numeric(&m, tol).unwrap();
        assert!(!report.p_psd);

        let p = assemble_p_matrix(&m).unwrap();
        assert!(p.min_eigenvalue() < -1.0);

        // symmetry-invalid input is an error
        let mut broken = expand_isotropic(&IsoMaterial::reference());
        broken.a11[crate::material::idx4(0, 0, 0, 1)] += 1.0;
        assert!(check_numeric(&broken, tol).is_err());
    }

    #[test]
    fn numeric_verdicts_scale_invariant() {
        let iso = IsoMaterial::reference();
        for scale in [1e-3, 1.0, 1e3] {
            let mut a = expand_isotropic(&iso);
            for v in a.a11.iter_mut().chain(a.a22.iter_mut()).chain(a.a17.iter_mut())
                .chain(a.a23.iter_mut()).chain(a.a77.iter_mut())
            {
                *v *= scale;
            }
            for v in a.a14.0.iter_mut().chain(a.a33.0.iter_mut())
                .chain(a.a47.0.iter_mut()).chain(a.a66.0.iter_mut())
            {
                *v *= scale;
            }
            a.gamma *= scale;
            a.a44 *= scale;
            let report = check_numeric(&a, DEFAULT_EIGEN_TOL).unwrap();
            assert!(report.w_psd && report.g_pd && report.p_psd, "scale {scale}");
        }
    }

    #[test]
    fn cross_validate_zero_and_determinism() {
        let r = cross_validate(0, 2.0, 1);
        assert_eq!(r.total_compared, 0);
        assert_eq!(r.agreement_fraction, 1.0);

        let a = cross_validate(60, 2.0, 42);
        let b = cross_validate(60, 2.0, 42);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.all_agree(), "{:#?}", a.disagreements);
    }

    #[test]
    fn cross_validate_agrees_on_other_seeds_and_ranges() {
        for (seed, range) in [(2u64, 2.0), (99, 0.5), (7, 5.0)] {
            let r = cross_validate(400, range, seed);
            assert!(
                r.all_agree(),
                "seed {seed} range {range}: {:#?}",
                r.disagreements
            );
        }
    }

    #[test]
    fn admissible_materials_have_nonnegative_energy_density() {
        use crate::constitutive::{lyapunov_density, LocalState};
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut found = 0;
        while found < 3 {
            let iso = sample_isotropic(&mut rng, 2.0);
            let report = check_isotropic(&iso, DEFAULT_EIGEN_TOL);
            if !(report.w_psd && report.g_pd && report.p_psd) {
                continue;
            }
            found += 1;
            let a = expand_isotropic(&iso);
            for _ in 0..300 {
                let mut s = LocalState::default();
                for v in s.e.0.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                for v in s.kappa.0.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                for v in s.v_field.0.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                for i in 0..3 {
                    s.e_field[i] = rng.gen_range(-1.0..1.0);
                    s.grad_theta[i] = rng.gen_range(-1.0..1.0);
                    s.u_dot[i] = rng.gen_range(-1.0..1.0);
                }
                s.theta = rng.gen_range(-1.0..1.0);
                s.theta_dot = rng.gen_range(-1.0..1.0);
                let l = lyapunov_density(&a, &s).unwrap();
                assert!(l >= -1e-10, "negative density {l} for {iso:?}");
            }
        }
    }
}
