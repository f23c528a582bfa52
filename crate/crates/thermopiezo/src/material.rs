//! Material parameter containers, symmetry validation, isotropic expansion,
//! and JSON material files.
//!
//! [`AnisoMaterial`] carries the full coefficient tensors of the reduced
//! linear theory over complete index ranges (rank ≥ 3 tensors as flat
//! row-major arrays). [`IsoMaterial`] carries the 19 scalars of the
//! centrosymmetric isotropic reduction plus the base constants, and expands
//! to an [`AnisoMaterial`] through the Kronecker-delta formulas.

use crate::error::{Error, Result};
use crate::tensor::{Sym2, Vec3};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[inline]
pub fn idx3(i: usize, j: usize, k: usize) -> usize {
    (i * 3 + j) * 3 + k
}
#[inline]
pub fn idx4(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}
#[inline]
pub fn idx5(i: usize, j: usize, k: usize, l: usize, h: usize) -> usize {
    (((i * 3 + j) * 3 + k) * 3 + l) * 3 + h
}
#[inline]
pub fn idx6(i: usize, j: usize, k: usize, l: usize, h: usize, m: usize) -> usize {
    ((((i * 3 + j) * 3 + k) * 3 + l) * 3 + h) * 3 + m
}

/// Fully anisotropic coefficient set of the reduced linear theory.
///
/// Tensor fields are stored over full index ranges; the symmetry relations
/// between slots are a validated invariant, not a storage property
/// (see [`validate_symmetries`]).
#[derive(Clone, Debug)]
pub struct AnisoMaterial {
    /// Mass density (> 0).
    pub rho: f64,
    /// Reference absolute temperature (> 0).
    pub t0: f64,
    /// Thermal relaxation coefficient multiplying the temperature rate (≠ 0).
    pub beta: f64,
    /// Additive reference entropy constant.
    pub alpha4: f64,
    /// Rate-dissipation coefficient; stored directly as one scalar.
    pub gamma: f64,
    pub a11: Box<[f64; 81]>,
    pub a12: Box<[f64; 243]>,
    pub a13: Box<[f64; 27]>,
    pub a14: Sym2,
    pub a17: Box<[f64; 81]>,
    pub a22: Box<[f64; 729]>,
    pub a23: Box<[f64; 81]>,
    pub a24: Box<[f64; 27]>,
    pub a27: Box<[f64; 243]>,
    pub a33: Sym2,
    pub a34: Vec3,
    pub a37: Box<[f64; 27]>,
    pub a44: f64,
    pub a47: Sym2,
    pub a56: Vec3,
    pub a66: Sym2,
    pub a77: Box<[f64; 81]>,
}

impl AnisoMaterial {
    /// All tensors zero; base constants as given.
    pub fn zero(rho: f64, t0: f64, beta: f64) -> Self {
        AnisoMaterial {
            rho,
            t0,
            beta,
            alpha4: 0.0,
            gamma: 0.0,
            a11: Box::new([0.0; 81]),
            a12: Box::new([0.0; 243]),
            a13: Box::new([0.0; 27]),
            a14: Sym2::ZERO,
            a17: Box::new([0.0; 81]),
            a22: Box::new([0.0; 729]),
            a23: Box::new([0.0; 81]),
            a24: Box::new([0.0; 27]),
            a27: Box::new([0.0; 243]),
            a33: Sym2::ZERO,
            a34: [0.0; 3],
            a37: Box::new([0.0; 27]),
            a44: 0.0,
            a47: Sym2::ZERO,
            a56: [0.0; 3],
            a66: Sym2::ZERO,
            a77: Box::new([0.0; 81]),
        }
    }
}

/// Isotropic centrosymmetric coefficient set.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IsoMaterial {
    pub rho: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub beta: f64,
    #[serde(default)]
    pub alpha4: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    #[serde(rename = "lambdaStar")]
    pub lambda_star: f64,
    #[serde(rename = "muStar")]
    pub mu_star: f64,
    pub alpha0: f64,
    pub beta0: f64,
    #[serde(rename = "lambdaTilde")]
    pub lambda_tilde: f64,
    #[serde(rename = "muTilde")]
    pub mu_tilde: f64,
    pub alpha14: f64,
    pub alpha33: f64,
    pub alpha47: f64,
    pub alpha66: f64,
    pub a44: f64,
}

impl IsoMaterial {
    /// Dimensionless reference material; passes every admissibility check.
    ///
    /// The electric permittivity-like coefficient `alpha33` is negative so
    /// that the electro-thermal energy is positive definite (the field-energy
    /// contribution enters with a reversed sign).
    pub fn reference() -> Self {
        IsoMaterial {
            rho: 1.0,
            t0: 1.0,
            beta: 1.0,
            alpha4: 0.0,
            gamma: 1.0,
            lambda: 1.0,
            mu: 1.0,
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 1.0,
            gamma4: 1.0,
            gamma5: 0.0,
            lambda_star: 0.1,
            mu_star: 0.1,
            alpha0: 0.1,
            beta0: 0.1,
            lambda_tilde: -1.0,
            mu_tilde: -0.5,
            alpha14: 0.2,
            alpha33: -1.0,
            alpha47: 0.1,
            alpha66: 1.0,
            a44: -2.0,
        }
    }

    /// All coupling scalars zero; base constants positive.
    pub fn zero() -> Self {
        IsoMaterial {
            rho: 1.0,
            t0: 1.0,
            beta: 1.0,
            alpha4: 0.0,
            gamma: 0.0,
            lambda: 0.0,
            mu: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
            gamma5: 0.0,
            lambda_star: 0.0,
            mu_star: 0.0,
            alpha0: 0.0,
            beta0: 0.0,
            lambda_tilde: 0.0,
            mu_tilde: 0.0,
            alpha14: 0.0,
            alpha33: 0.0,
            alpha47: 0.0,
            alpha66: 0.0,
            a44: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidMaterial(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.t0 > 0.0) {
            return Err(Error::InvalidMaterial(format!("T0 must be > 0, got {}", self.t0)));
        }
        if self.beta == 0.0 {
            return Err(Error::InvalidMaterial("beta must be nonzero".into()));
        }
        Ok(())
    }
}

#[inline]
fn d(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn lame_rank4(lam: f64, mu: f64) -> Box<[f64; 81]> {
    let mut a = Box::new([0.0; 81]);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    a[idx4(i, j, k, l)] =
                        lam * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                }
            }
        }
    }
    a
}

fn iso_sym2(c: f64) -> Sym2 {
    Sym2([c, c, c, 0.0, 0.0, 0.0])
}

/// Expand the isotropic scalar set into full coefficient tensors.
///
/// The gradient-elastic rank-6 tensor is built from the five-coefficient
/// delta formula; the four rank-4 tensors follow the Lamé pattern; the
/// remaining odd-rank couplings vanish for a centrosymmetric material.
pub fn expand_isotropic(m: &IsoMaterial) -> AnisoMaterial {
    let mut out = AnisoMaterial::zero(m.rho, m.t0, m.beta);
    out.alpha4 = m.alpha4;
    out.gamma = m.gamma;
    out.a44 = m.a44;

    out.a11 = lame_rank4(m.lambda, m.mu);
    out.a17 = lame_rank4(m.lambda_star, m.mu_star);
    out.a23 = lame_rank4(m.alpha0, m.beta0);
    out.a77 = lame_rank4(m.lambda_tilde, m.mu_tilde);
    out.a14 = iso_sym2(m.alpha14);
    out.a33 = iso_sym2(m.alpha33);
    out.a47 = iso_sym2(m.alpha47);
    out.a66 = iso_sym2(m.alpha66);

    let (g1, g2, g3, g4, g5) = (m.gamma1, m.gamma2, m.gamma3, m.gamma4, m.gamma5);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for p in 0..3 {
                    for q in 0..3 {
                        for r in 0..3 {
                            let v = g1
                                * (d(i, j) * d(k, p) * d(q, r)
                                    + d(i, j) * d(k, q) * d(p, r)
                                    + d(i, k) * d(j, r) * d(p, q)
                                    + d(i, r) * d(j, k) * d(p, q))
                                + g2 * (d(i, k) * d(j, p) * d(q, r)
                                    + d(i, k) * d(j, q) * d(p, r)
                                    + d(i, p) * d(j, k) * d(q, r)
                                    + d(i, q) * d(j, k) * d(p, r))
                                + g3 * d(i, j) * d(k, r) * d(p, q)
                                + g4 * (d(i, p) * d(j, q) * d(k, r) + d(i, q) * d(j, p) * d(k, r))
                                + g5 * (d(i, p) * d(j, r) * d(k, q)
                                    + d(i, q) * d(j, r) * d(k, p)
                                    + d(i, r) * d(j, p) * d(k, q)
                                    + d(i, r) * d(j, q) * d(k, p));
                            out.a22[idx6(i, j, k, p, q, r)] = v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Default relative symmetry tolerance for file-supplied tensors, which may
/// carry decimal roundoff.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-10;

/// One checked symmetry relation.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryRelation {
    pub name: String,
    /// Largest absolute violation over all index tuples.
    pub violation: f64,
    /// Absolute tolerance used (relative tolerance scaled by the tensor's
    /// largest component).
    pub tol: f64,
    pub pass: bool,
}

/// Per-relation symmetry audit of an [`AnisoMaterial`].
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub relations: Vec<SymmetryRelation>,
    pub max_violation: f64,
    pub pass: bool,
}

impl SymmetryReport {
    /// First failing relation, if any, as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.relations.iter().find(|r| !r.pass) {
            None => Ok(self),
            Some(r) => Err(Error::Symmetry {
                relation: r.name.clone(),
                violation: r.violation,
                tol: r.tol,
                indices: vec![],
            }),
        }
    }
}

fn scale_of(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// max |a[perm(idx)] - a[idx]| over all tuples, for an index permutation
/// given as a mapping of positions.
fn relation_violation(a: &[f64], rank: u32, perm: &dyn Fn(&[usize]) -> Vec<usize>) -> f64 {
    let n = 3usize.pow(rank);
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; rank as usize];
    for flat in 0..n {
        let mut f = flat;
        for p in (0..rank as usize).rev() {
            idx[p] = f % 3;
            f /= 3;
        }
        let pidx = perm(&idx);
        let mut pflat = 0usize;
        for &q in &pidx {
            pflat = pflat * 3 + q;
        }
        worst = worst.max((a[flat] - a[pflat]).abs());
    }
    worst
}

/// Check every stated symmetry relation of the coefficient tensors and
/// report the worst violation per relation. `rel_tol` is scaled by each
/// tensor's largest component.
pub fn validate_symmetries(m: &AnisoMaterial, rel_tol: f64) -> SymmetryReport {
    let mut relations = Vec::new();
    let mut push = |name: &str, tensor: &[f64], rank: u32, perm: &dyn Fn(&[usize]) -> Vec<usize>| {
        let violation = relation_violation(tensor, rank, perm);
        let tol = rel_tol * scale_of(tensor);
        relations.push(SymmetryRelation {
            name: name.into(),
            violation,
            tol,
            pass: violation <= tol,
        });
    };

    let swap01 = |i: &[usize]| {
        let mut v = i.to_vec();
        v.swap(0, 1);
        v
    };
    let swap23 = |i: &[usize]| {
        let mut v = i.to_vec();
        v.swap(2, 3);
        v
    };
    let swap12 = |i: &[usize]| {
        let mut v = i.to_vec();
        v.swap(1, 2);
        v
    };
    let major4 = |i: &[usize]| vec![i[2], i[3], i[0], i[1]];
    let swap34of5 = |i: &[usize]| vec![i[0], i[1], i[2], i[4], i[3]];
    let major6 = |i: &[usize]| vec![i[3], i[4], i[5], i[0], i[1], i[2]];

    push("a11: ijkl = jikl", &m.a11[..], 4, &swap01);
    push("a11: ijkl = klij", &m.a11[..], 4, &major4);
    push("a11: ijkl = ijlk", &m.a11[..], 4, &swap23);
    push("a12: ijklh = jiklh", &m.a12[..], 5, &swap01);
    push("a12: ijklh = ijlkh", &m.a12[..], 5, &|i: &[usize]| {
        vec![i[0], i[1], i[3], i[2], i[4]]
    });
    push("a13: ijk = jik", &m.a13[..], 3, &swap01);
    push("a17: ijkl = jikl", &m.a17[..], 4, &swap01);
    push("a17: ijkl = klij", &m.a17[..], 4, &major4);
    push("a17: ijkl = ijlk", &m.a17[..], 4, &swap23);
    push("a22: ijklhm = jiklhm", &m.a22[..], 6, &swap01);
    push("a22: ijklhm = lhmijk", &m.a22[..], 6, &major6);
    push("a22: ijklhm = ijkhlm", &m.a22[..], 6, &|i: &[usize]| {
        vec![i[0], i[1], i[2], i[4], i[3], i[5]]
    });
    push("a23: ijkl = jikl", &m.a23[..], 4, &swap01);
    push("a24: ijk = jik", &m.a24[..], 3, &swap01);
    push("a27: ijkhl = jikhl", &m.a27[..], 5, &swap01);
    push("a27: ijkhl = ijklh", &m.a27[..], 5, &swap34of5);
    push("a37: ijk = ikj", &m.a37[..], 3, &swap12);
    push("a77: ijkl = jikl", &m.a77[..], 4, &swap01);
    push("a77: ijkl = klij", &m.a77[..], 4, &major4);
    push("a77: ijkl = ijlk", &m.a77[..], 4, &swap23);

    // rank-2 coefficients are stored in symmetric form, so these hold exactly
    for name in ["a14: ij = ji", "a33: ij = ji", "a47: ij = ji", "a66: ij = ji"] {
        relations.push(SymmetryRelation {
            name: name.into(),
            violation: 0.0,
            tol: 0.0,
            pass: true,
        });
    }

    let max_violation = relations.iter().fold(0.0f64, |a, r| a.max(r.violation));
    let pass = relations.iter().all(|r| r.pass);
    SymmetryReport {
        relations,
        max_violation,
        pass,
    }
}

/// Either kind of material, as read from a file.
#[derive(Clone, Debug)]
pub enum Material {
    Isotropic(IsoMaterial),
    Anisotropic(Box<AnisoMaterial>),
}

impl Material {
    /// Full anisotropic coefficient set (isotropic kinds are expanded).
    pub fn expanded(&self) -> AnisoMaterial {
        match self {
            Material::Isotropic(m) => expand_isotropic(m),
            Material::Anisotropic(m) => (**m).clone(),
        }
    }

    pub fn as_isotropic(&self) -> Option<&IsoMaterial> {
        match self {
            Material::Isotropic(m) => Some(m),
            Material::Anisotropic(_) => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnisoFile {
    #[allow(dead_code)]
    kind: String,
    rho: f64,
    #[serde(rename = "T0")]
    t0: f64,
    beta: f64,
    #[serde(default)]
    alpha4: f64,
    gamma: f64,
    a11: Vec<f64>,
    a12: Vec<f64>,
    a13: Vec<f64>,
    a14: Vec<f64>,
    a17: Vec<f64>,
    a22: Vec<f64>,
    a23: Vec<f64>,
    a24: Vec<f64>,
    a27: Vec<f64>,
    a33: Vec<f64>,
    a34: Vec<f64>,
    a37: Vec<f64>,
    a44: f64,
    a47: Vec<f64>,
    a56: Vec<f64>,
    a66: Vec<f64>,
    a77: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IsoFile {
    #[allow(dead_code)]
    kind: String,
    #[serde(flatten)]
    material: IsoMaterial,
}

fn expect_len(field: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::WrongLength {
            field,
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

fn boxed<const N: usize>(field: &'static str, v: Vec<f64>) -> Result<Box<[f64; N]>> {
    expect_len(field, &v, N)?;
    let arr: [f64; N] = v.try_into().expect("length checked");
    Ok(Box::new(arr))
}

fn sym2_from_flat9(field: &'static str, v: &[f64], rel_tol: f64) -> Result<Sym2> {
    expect_len(field, v, 9)?;
    let m = [
        [v[0], v[1], v[2]],
        [v[3], v[4], v[5]],
        [v[6], v[7], v[8]],
    ];
    Sym2::from_full(&m, rel_tol).map_err(|e| match e {
        Error::Symmetry { violation, tol, indices, .. } => Error::Symmetry {
            relation: format!("{field}: ij = ji"),
            violation,
            tol,
            indices,
        },
        other => other,
    })
}

fn vec3_from_flat(field: &'static str, v: &[f64]) -> Result<Vec3> {
    expect_len(field, v, 3)?;
    Ok([v[0], v[1], v[2]])
}

impl TryFrom<AnisoFile> for AnisoMaterial {
    type Error = Error;
    fn try_from(f: AnisoFile) -> Result<Self> {
        let m = AnisoMaterial {
            rho: f.rho,
            t0: f.t0,
            beta: f.beta,
            alpha4: f.alpha4,
            gamma: f.gamma,
            a11: boxed("a11", f.a11)?,
            a12: boxed("a12", f.a12)?,
            a13: boxed("a13", f.a13)?,
            a14: sym2_from_flat9("a14", &f.a14, DEFAULT_SYMMETRY_TOL)?,
            a17: boxed("a17", f.a17)?,
            a22: boxed("a22", f.a22)?,
            a23: boxed("a23", f.a23)?,
            a24: boxed("a24", f.a24)?,
            a27: boxed("a27", f.a27)?,
            a33: sym2_from_flat9("a33", &f.a33, DEFAULT_SYMMETRY_TOL)?,
            a34: vec3_from_flat("a34", &f.a34)?,
            a37: boxed("a37", f.a37)?,
            a44: f.a44,
            a47: sym2_from_flat9("a47", &f.a47, DEFAULT_SYMMETRY_TOL)?,
            a56: vec3_from_flat("a56", &f.a56)?,
            a66: sym2_from_flat9("a66", &f.a66, DEFAULT_SYMMETRY_TOL)?,
            a77: boxed("a77", f.a77)?,
        };
        if !(m.rho > 0.0) {
            return Err(Error::InvalidMaterial(format!("rho must be > 0, got {}", m.rho)));
        }
        if !(m.t0 > 0.0) {
            return Err(Error::InvalidMaterial(format!("T0 must be > 0, got {}", m.t0)));
        }
        if m.beta == 0.0 {
            return Err(Error::InvalidMaterial("beta must be nonzero".into()));
        }
        Ok(m)
    }
}

/// Parse a material from a JSON string; `origin` is used in error messages.
pub fn parse_material(text: &str, origin: &str) -> Result<Material> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.into(),
            detail: e.to_string(),
        })?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Parse {
            path: origin.into(),
            detail: "missing or non-string \"kind\" (expected \"isotropic\" or \"anisotropic\")"
                .into(),
        })?
        .to_owned();
    match kind.as_str() {
        "isotropic" => {
            let f: IsoFile = serde_json::from_value(value).map_err(|e| Error::Parse {
                path: origin.into(),
                detail: e.to_string(),
            })?;
            f.material.validate()?;
            Ok(Material::Isotropic(f.material))
        }
        "anisotropic" => {
            let f: AnisoFile = serde_json::from_value(value).map_err(|e| Error::Parse {
                path: origin.into(),
                detail: e.to_string(),
            })?;
            let m: AnisoMaterial = f.try_into()?;
            validate_symmetries(&m, DEFAULT_SYMMETRY_TOL).into_result()?;
            Ok(Material::Anisotropic(Box::new(m)))
        }
        other => Err(Error::Parse {
            path: origin.into(),
            detail: format!("unknown kind {other:?} (expected \"isotropic\" or \"anisotropic\")"),
        }),
    }
}

/// Load a material file. Anisotropic files are symmetry-validated on load.
pub fn load_material(path: &Path) -> Result<Material> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_material(&text, &path.display().to_string())
}
