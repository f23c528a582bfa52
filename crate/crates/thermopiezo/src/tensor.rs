//! Symmetric-tensor value types and index conventions.
//!
//! The state of a material point uses three small tensor shapes:
//!
//! * [`Sym2`] — symmetric rank-2 tensors (strain `e`, electric field gradient
//!   `V`), stored as the six independent components in canonical order
//!   (11, 22, 33, 23, 13, 12).
//! * [`Kappa`] — rank-3 tensors symmetric in their first two indices
//!   (the second displacement gradient `κ_ijk = u_{k,ij}`), stored as
//!   18 independent components indexed by (pair, k).
//! * [`Kappa18`] — the same 18 numbers flattened in the fixed ordering used
//!   by the block-diagonal quadratic-form analysis, see [`KAPPA18_ORDER`].
//!
//! Contractions elsewhere in the crate always expand these to full index
//! ranges so that quadratic forms match the full double sums exactly, with
//! no Voigt-style weighting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

/// Canonical pair order for the six independent slots of a symmetric rank-2
/// tensor: 11, 22, 33, 23, 13, 12 (0-based pairs).
pub const SYM2_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

/// Position of pair (i,j) = (j,i) in [`SYM2_PAIRS`].
#[inline]
pub fn sym2_pair_index(i: usize, j: usize) -> usize {
    const LOOKUP: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];
    LOOKUP[i][j]
}

/// Symmetric rank-2 tensor, six independent components in canonical order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2(pub [f64; 6]);

impl Sym2 {
    pub const ZERO: Sym2 = Sym2([0.0; 6]);

    pub fn identity() -> Self {
        Sym2([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[sym2_pair_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[sym2_pair_index(i, j)] = v;
    }

    /// Expand to a full 3x3 array.
    pub fn full(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.get(i, j);
            }
        }
        m
    }

    /// Build from a full 3x3 array, requiring symmetry within `tol`
    /// (absolute, relative to the largest entry).
    pub fn from_full(m: &[[f64; 3]; 3], tol: f64) -> Result<Self> {
        let scale = m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let mut out = Sym2::ZERO;
        for (p, &(i, j)) in SYM2_PAIRS.iter().enumerate() {
            let asym = (m[i][j] - m[j][i]).abs();
            if asym > tol * scale.max(1.0) {
                return Err(Error::Symmetry {
                    relation: "rank-2 input symmetry".into(),
                    violation: asym,
                    tol: tol * scale.max(1.0),
                    indices: vec![i, j],
                });
            }
            out.0[p] = 0.5 * (m[i][j] + m[j][i]);
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Rank-3 tensor symmetric in its first two indices; 18 independent slots
/// stored as (pair, k) with pairs in canonical [`SYM2_PAIRS`] order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Kappa(pub [f64; 18]);

impl Kappa {
    pub const ZERO: Kappa = Kappa([0.0; 18]);

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0[sym2_pair_index(i, j) * 3 + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.0[sym2_pair_index(i, j) * 3 + k] = v;
    }

    /// Expand to the full 27-entry row-major array.
    pub fn full(&self) -> [f64; 27] {
        let mut out = [0.0; 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[(i * 3 + j) * 3 + k] = self.get(i, j, k);
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Variable ordering of the 18 independent `κ` components used by the
/// block-diagonal analysis of the gradient-elastic quadratic form
/// (1-based triples, grouped so the matrix splits as diag(A5, A5, A5, A3)).
pub const KAPPA18_ORDER: [(usize, usize, usize); 18] = [
    (2, 2, 1),
    (3, 3, 1),
    (1, 1, 1),
    (1, 2, 2),
    (1, 3, 3),
    (3, 3, 2),
    (1, 1, 2),
    (2, 2, 2),
    (2, 3, 3),
    (2, 1, 1),
    (1, 1, 3),
    (2, 2, 3),
    (3, 3, 3),
    (3, 1, 1),
    (3, 2, 2),
    (1, 2, 3),
    (2, 3, 1),
    (3, 1, 2),
];

/// Flat 18-vector in the [`KAPPA18_ORDER`] ordering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Kappa18(pub [f64; 18]);

/// Pack a [`Kappa`] into the fixed 18-component ordering. Exact (pure copies).
pub fn pack18(kappa: &Kappa) -> Kappa18 {
    let mut out = [0.0; 18];
    for (p, &(i, j, k)) in KAPPA18_ORDER.iter().enumerate() {
        out[p] = kappa.get(i - 1, j - 1, k - 1);
    }
    Kappa18(out)
}

/// Inverse of [`pack18`]. Exact (pure copies).
pub fn unpack18(v: &Kappa18) -> Kappa {
    let mut out = Kappa::ZERO;
    for (p, &(i, j, k)) in KAPPA18_ORDER.iter().enumerate() {
        out.set(i - 1, j - 1, k - 1, v.0[p]);
    }
    out
}

/// Symmetric part of a displacement gradient: e_ij = (g_ij + g_ji)/2.
pub fn strain_from_gradient(g: &[[f64; 3]; 3]) -> Result<Sym2> {
    if g.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "strain_from_gradient",
        });
    }
    let mut e = Sym2::ZERO;
    for (p, &(i, j)) in SYM2_PAIRS.iter().enumerate() {
        e.0[p] = 0.5 * (g[i][j] + g[j][i]);
    }
    Ok(e)
}

/// Default relative tolerance for the first-pair symmetry of a sampled
/// second gradient; smooth fields are symmetric to roundoff.
pub const DEFAULT_SECOND_GRADIENT_TOL: f64 = 1e-12;

/// Canonicalize a full second-gradient array `h[i][j][k] = u_{k,ij}` into a
/// [`Kappa`], checking the first-pair symmetry within `sym_tol` (relative to
/// the largest component). Returns the tensor together with the largest
/// asymmetry found.
pub fn kappa_from_second_gradient(h: &[[[f64; 3]; 3]; 3], sym_tol: f64) -> Result<(Kappa, f64)> {
    if h.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "kappa_from_second_gradient",
        });
    }
    let scale = h
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let mut worst = 0.0;
    let mut worst_idx = (0, 0, 0);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let asym = (h[i][j][k] - h[j][i][k]).abs();
                if asym > worst {
                    worst = asym;
                    worst_idx = (i, j, k);
                }
            }
        }
    }
    if worst > sym_tol * scale.max(1.0) {
        return Err(Error::Symmetry {
            relation: "second gradient first-pair symmetry".into(),
            violation: worst,
            tol: sym_tol * scale.max(1.0),
            indices: vec![worst_idx.0, worst_idx.1, worst_idx.2],
        });
    }
    let mut kappa = Kappa::ZERO;
    for (p, &(i, j)) in SYM2_PAIRS.iter().enumerate() {
        for k in 0..3 {
            kappa.0[p * 3 + k] = 0.5 * (h[i][j][k] + h[j][i][k]);
        }
    }
    Ok((kappa, worst))
}

/// Electric field and field gradient from the potential derivatives:
/// E = -∇φ, V = -∇∇φ.
pub fn field_from_potential(grad_phi: Vec3, hess_phi: Sym2) -> (Vec3, Sym2) {
    let e = [-grad_phi[0], -grad_phi[1], -grad_phi[2]];
    let mut v = hess_phi;
    for x in v.0.iter_mut() {
        *x = -*x;
    }
    (e, v)
}

// ---- rotation helpers (used by the isotropy and frame-indifference tests) ----

pub fn rotate_vec3(r: &[[f64; 3]; 3], v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for p in 0..3 {
            out[i] += r[i][p] * v[p];
        }
    }
    out
}

pub fn rotate_sym2(r: &[[f64; 3]; 3], s: &Sym2) -> Sym2 {
    let m = s.full();
    let mut out = Sym2::ZERO;
    for &(i, j) in SYM2_PAIRS.iter() {
        let mut acc = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                acc += r[i][p] * r[j][q] * m[p][q];
            }
        }
        out.set(i, j, acc);
    }
    out
}

pub fn rotate_kappa(r: &[[f64; 3]; 3], k: &Kappa) -> Kappa {
    let mut out = Kappa::ZERO;
    for &(i, j) in SYM2_PAIRS.iter() {
        for l in 0..3 {
            let mut acc = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    for s in 0..3 {
                        acc += r[i][p] * r[j][q] * r[l][s] * k.get(p, q, s);
                    }
                }
            }
            out.set(i, j, l, acc);
        }
    }
    out
}

/// Rotate a full rank-6 array (length 729, row-major) one index at a time.
pub fn rotate_rank6(r: &[[f64; 3]; 3], a: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), 729);
    let mut cur = a.to_vec();
    // contract index `pos` (0..6) with the rotation
    for pos in 0..6 {
        let stride = 3usize.pow(5 - pos as u32);
        let mut next = vec![0.0; 729];
        for (flat, slot) in next.iter_mut().enumerate() {
            let idx = (flat / stride) % 3;
            let base = flat - idx * stride;
            let mut acc = 0.0;
            for p in 0..3 {
                acc += r[idx][p] * cur[base + p * stride];
            }
            *slot = acc;
        }
        cur = next;
    }
    cur
}

/// Proper rotation from an axis-angle pair (Rodrigues formula).
pub fn rotation_from_axis_angle(axis: Vec3, angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}
