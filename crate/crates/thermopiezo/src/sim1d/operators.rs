//! Finite-difference operators on a uniform grid of interior nodes.
//!
//! Interior nodes are indexed 0..N-1 at x = (i+1)·h with h = L/(N+1); the
//! boundary nodes x = 0 and x = L carry homogeneous essential conditions
//! (u = u_x = 0 clamped, θ = 0, φ = φ_x = 0). Ghost values implement the
//! closures: mirror ghosts for the clamped slope, zeros for the Dirichlet
//! values.
//!
//! Stencils: D1 and D2 are the standard 3-point central operators, D4 the
//! 5-point biharmonic stencil. The two third-derivative couplings are built
//! as compositions — `t3 = D1∘D2` applied to the potential in the momentum
//! equation and `s3 = -t3ᵀ` applied to the displacement in the potential
//! equation. Both reduce to the 4-point central stencil away from the
//! boundary, and the pair is an exact negative adjoint, which is what makes
//! the discrete energy identity hold to roundoff (see the module docs of
//! [`super`]).

/// Sparse operator as (row, col, value) triplets over interior nodes.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl Stencil {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, v) in &self.triplets {
            out[i] += v * x[j];
        }
    }

    pub fn apply_into(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply(x, &mut out);
        out
    }

    /// Exact negative transpose (swap indices, flip signs).
    pub fn negative_adjoint(&self) -> Stencil {
        Stencil {
            n: self.n,
            triplets: self
                .triplets
                .iter()
                .map(|&(i, j, v)| (j, i, -v))
                .collect(),
        }
    }
}

/// The full operator set for one grid.
#[derive(Clone, Debug)]
pub struct Operators {
    pub n: usize,
    pub h: f64,
    /// Central first derivative (Dirichlet).
    pub d1: Stencil,
    /// 3-point second derivative (Dirichlet).
    pub d2: Stencil,
    /// 5-point fourth derivative (clamped mirror ghosts).
    pub d4: Stencil,
    /// Third derivative applied to the potential in the momentum equation.
    pub t3: Stencil,
    /// Third derivative applied to the displacement in the potential
    /// equation; exact negative adjoint of `t3`.
    pub s3: Stencil,
}

impl Operators {
    pub fn new(n: usize, h: f64) -> Self {
        assert!(n >= 4, "operator stencils need at least 4 interior nodes");
        let inv_h2 = 1.0 / (h * h);
        let inv_h4 = inv_h2 * inv_h2;

        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        for i in 0..n {
            if i >= 1 {
                d1.push((i, i - 1, -0.5 / h));
                d2.push((i, i - 1, inv_h2));
            }
            if i + 1 < n {
                d1.push((i, i + 1, 0.5 / h));
                d2.push((i, i + 1, inv_h2));
            }
            d2.push((i, i, -2.0 * inv_h2));
        }

        let mut d4 = Vec::new();
        for i in 0..n {
            let mut row: Vec<(isize, f64)> = vec![
                (i as isize - 2, 1.0),
                (i as isize - 1, -4.0),
                (i as isize, 6.0),
                (i as isize + 1, -4.0),
                (i as isize + 2, 1.0),
            ];
            // mirror ghosts: u[-2] = u[0], u[n+1] = u[n-1] in interior
            // indexing (u_{-1} = u_1 and u_{N+2} = u_N about the boundary)
            if i == 0 {
                row.push((0, 1.0));
            }
            if i == n - 1 {
                row.push((n as isize - 1, 1.0));
            }
            for (j, c) in row {
                if j >= 0 && (j as usize) < n {
                    d4.push((i, j as usize, c * inv_h4));
                }
            }
        }

        // extended second difference rows e = 0..n+1 (boundary rows use the
        // mirror-ghost closure), then a central difference between rows
        // e = i and e = i+2
        let d2e_row = |e: usize| -> Vec<(usize, f64)> {
            if e == 0 {
                vec![(0, 2.0 * inv_h2)]
            } else if e == n + 1 {
                vec![(n - 1, 2.0 * inv_h2)]
            } else {
                let i = e - 1;
                let mut r = vec![(i, -2.0 * inv_h2)];
                if i >= 1 {
                    r.push((i - 1, inv_h2));
                }
                if i + 1 < n {
                    r.push((i + 1, inv_h2));
                }
                r
            }
        };
        let mut t3 = Vec::new();
        for i in 0..n {
            for (j, c) in d2e_row(i + 2) {
                t3.push((i, j, c * 0.5 / h));
            }
            for (j, c) in d2e_row(i) {
                t3.push((i, j, -c * 0.5 / h));
            }
        }

        let t3 = Stencil { n, triplets: t3 };
        let s3 = t3.negative_adjoint();
        Operators {
            n,
            h,
            d1: Stencil { n, triplets: d1 },
            d2: Stencil { n, triplets: d2 },
            d4: Stencil { n, triplets: d4 },
            t3,
            s3,
        }
    }

    /// Forward differences on the N+1 edges, with zero boundary values.
    pub fn edge_diffs(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n + 1];
        for k in 0..=n {
            let right = if k < n { x[k] } else { 0.0 };
            let left = if k > 0 { x[k - 1] } else { 0.0 };
            out[k] = (right - left) / self.h;
        }
        out
    }

    /// Second differences on the N+2 extended nodes (mirror-ghost closure at
    /// the boundary rows).
    pub fn d2_extended(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut out = vec![0.0; n + 2];
        out[0] = 2.0 * x[0] * inv_h2;
        out[n + 1] = 2.0 * x[n - 1] * inv_h2;
        for e in 1..=n {
            let i = e - 1;
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            out[e] = (left - 2.0 * x[i] + right) * inv_h2;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> (Operators, Vec<f64>) {
        let h = 1.0 / (n as f64 + 1.0);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) * h).collect();
        (Operators::new(n, h), x)
    }

    #[test]
    fn interior_rows_are_exact_on_polynomials() {
        let n = 24;
        let (ops, x) = grid(n);
        // cubic for D2, quintic for D4, quartic for the third derivative
        let poly = |x: f64| 0.3 + 1.7 * x - 0.9 * x * x + 2.1 * x.powi(3);
        let d2_exact = |x: f64| -1.8 + 12.6 * x;
        let qui = |x: f64| 1.0 - x + 0.5 * x.powi(2) - 2.0 * x.powi(3) + x.powi(4) + 0.25 * x.powi(5);
        let d4_exact = |x: f64| 24.0 + 30.0 * x;
        let qua = |x: f64| x.powi(4) - 0.7 * x.powi(3) + x;
        let d3_exact = |x: f64| 24.0 * x - 4.2;

        let u: Vec<f64> = x.iter().map(|&v| poly(v)).collect();
        let w = ops.d2.apply_into(&u);
        for i in 2..n - 2 {
            assert_relative_eq!(w[i], d2_exact(x[i]), epsilon = 1e-8, max_relative = 1e-9);
        }
        let u: Vec<f64> = x.iter().map(|&v| qui(v)).collect();
        let w = ops.d4.apply_into(&u);
        for i in 2..n - 2 {
            assert_relative_eq!(w[i], d4_exact(x[i]), epsilon = 1e-5, max_relative = 1e-7);
        }
        let u: Vec<f64> = x.iter().map(|&v| qua(v)).collect();
        for op in [&ops.t3, &ops.s3] {
            let w = op.apply_into(&u);
            for i in 2..n - 2 {
                assert_relative_eq!(w[i], d3_exact(x[i]), epsilon = 1e-7, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn adjointness_relations_hold_exactly() {
        let n = 17;
        let (ops, _) = grid(n);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

        // D1 antisymmetric, D2 and D4 symmetric
        assert_relative_eq!(
            dot(&v, &ops.d1.apply_into(&u)),
            -dot(&u, &ops.d1.apply_into(&v)),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            dot(&v, &ops.d2.apply_into(&u)),
            dot(&u, &ops.d2.apply_into(&v)),
            epsilon = 1e-9
        );
        assert_relative_eq!(
            dot(&v, &ops.d4.apply_into(&u)),
            dot(&u, &ops.d4.apply_into(&v)),
            epsilon = 1e-6
        );
        // the third-derivative pair is an exact negative adjoint
        assert_relative_eq!(
            dot(&v, &ops.t3.apply_into(&u)),
            -dot(&u, &ops.s3.apply_into(&v)),
            epsilon = 1e-9
        );
    }

    #[test]
    fn summation_by_parts_for_energy_quadratures() {
        let n = 13;
        let (ops, _) = grid(n);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

        // v·D2u = -Σ_edges (Du)(Dv)
        let edge_u = ops.edge_diffs(&u);
        let edge_v = ops.edge_diffs(&v);
        assert_relative_eq!(
            dot(&v, &ops.d2.apply_into(&u)),
            -dot(&edge_u, &edge_v),
            epsilon = 1e-9
        );

        // v·D4u = Σ' (D2e u)(D2e v) with half weights at the boundary rows
        let wu = ops.d2_extended(&u);
        let wv = ops.d2_extended(&v);
        let mut acc = 0.5 * wu[0] * wv[0] + 0.5 * wu[n + 1] * wv[n + 1];
        for e in 1..=n {
            acc += wu[e] * wv[e];
        }
        assert_relative_eq!(dot(&v, &ops.d4.apply_into(&u)), acc, epsilon = 1e-6);
    }
}
