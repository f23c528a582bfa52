//! Shared helpers for the integration suites: fully anisotropic random
//! materials (symmetrized over each coefficient's symmetry group) and random
//! local states.

use rand::Rng;
use thermopiezo::constitutive::LocalState;
use thermopiezo::material::{idx3, idx4, idx5, idx6, AnisoMaterial};
use thermopiezo::tensor::Sym2;

fn fill<R: Rng>(rng: &mut R, v: &mut [f64]) {
    for x in v.iter_mut() {
        *x = rng.gen_range(-1.0..1.0);
    }
}

/// Random coefficient set satisfying every symmetry relation exactly
/// (each tensor is averaged over its symmetry group).
pub fn random_symmetric_material<R: Rng>(rng: &mut R) -> AnisoMaterial {
    let mut m = AnisoMaterial::zero(
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..1.5),
    );
    m.gamma = rng.gen_range(-1.0..1.0);
    m.a44 = rng.gen_range(-1.0..1.0);
    m.alpha4 = rng.gen_range(-1.0..1.0);

    // a11, a17, a77: pair symmetries plus the major exchange
    for which in 0..3 {
        let mut raw = [0.0; 81];
        fill(rng, &mut raw);
        let mut sym = Box::new([0.0; 81]);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut acc = 0.0;
                        for (a, b) in [(i, j), (j, i)] {
                            for (c, d) in [(k, l), (l, k)] {
                                acc += raw[idx4(a, b, c, d)] + raw[idx4(c, d, a, b)];
                            }
                        }
                        sym[idx4(i, j, k, l)] = acc / 8.0;
                    }
                }
            }
        }
        match which {
            0 => m.a11 = sym,
            1 => m.a17 = sym,
            _ => m.a77 = sym,
        }
    }

    // a12: symmetric in the first pair and the second pair
    let mut raw = vec![0.0; 243];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    for h in 0..3 {
                        let mut acc = 0.0;
                        for (a, b) in [(i, j), (j, i)] {
                            for (c, d) in [(k, l), (l, k)] {
                                acc += raw[idx5(a, b, c, d, h)];
                            }
                        }
                        m.a12[idx5(i, j, k, l, h)] = acc / 4.0;
                    }
                }
            }
        }
    }

    // a27: symmetric in the first pair and the trailing pair
    let mut raw = vec![0.0; 243];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for h in 0..3 {
                    for l in 0..3 {
                        let mut acc = 0.0;
                        for (a, b) in [(i, j), (j, i)] {
                            for (c, d) in [(h, l), (l, h)] {
                                acc += raw[idx5(a, b, k, c, d)];
                            }
                        }
                        m.a27[idx5(i, j, k, h, l)] = acc / 4.0;
                    }
                }
            }
        }
    }

    // a13, a24: symmetric in the first pair; a37: symmetric in the last pair
    let mut raw = vec![0.0; 27];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m.a13[idx3(i, j, k)] = 0.5 * (raw[idx3(i, j, k)] + raw[idx3(j, i, k)]);
            }
        }
    }
    let mut raw = vec![0.0; 27];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m.a24[idx3(i, j, k)] = 0.5 * (raw[idx3(i, j, k)] + raw[idx3(j, i, k)]);
            }
        }
    }
    let mut raw = vec![0.0; 27];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m.a37[idx3(i, j, k)] = 0.5 * (raw[idx3(i, j, k)] + raw[idx3(i, k, j)]);
            }
        }
    }

    // a23: symmetric in the first pair only
    let mut raw = vec![0.0; 81];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    m.a23[idx4(i, j, k, l)] =
                        0.5 * (raw[idx4(i, j, k, l)] + raw[idx4(j, i, k, l)]);
                }
            }
        }
    }

    // a22: first pairs of both triples plus the triple exchange
    let mut raw = vec![0.0; 729];
    fill(rng, &mut raw);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for p in 0..3 {
                    for q in 0..3 {
                        for r in 0..3 {
                            let mut acc = 0.0;
                            for (a, b) in [(i, j), (j, i)] {
                                for (c, d) in [(p, q), (q, p)] {
                                    acc += raw[idx6(a, b, k, c, d, r)]
                                        + raw[idx6(c, d, r, a, b, k)];
                                }
                            }
                            m.a22[idx6(i, j, k, p, q, r)] = acc / 8.0;
                        }
                    }
                }
            }
        }
    }

    let mut s = [0.0; 6];
    fill(rng, &mut s);
    m.a14 = Sym2(s);
    fill(rng, &mut s);
    m.a33 = Sym2(s);
    fill(rng, &mut s);
    m.a47 = Sym2(s);
    fill(rng, &mut s);
    m.a66 = Sym2(s);
    fill(rng, &mut m.a34);
    fill(rng, &mut m.a56);
    m
}

pub fn random_state<R: Rng>(rng: &mut R) -> LocalState {
    let mut s = LocalState::default();
    fill(rng, &mut s.e.0);
    fill(rng, &mut s.kappa.0);
    fill(rng, &mut s.v_field.0);
    fill(rng, &mut s.e_field);
    fill(rng, &mut s.grad_theta);
    fill(rng, &mut s.u_dot);
    s.theta = rng.gen_range(-1.0..1.0);
    s.theta_dot = rng.gen_range(-1.0..1.0);
    s
}

/// Least-squares slope of ln(err) against ln(step), i.e. the observed
/// convergence order for a sequence of errors at geometrically shrinking
/// step sizes.
pub fn observed_order(steps: &[f64], errors: &[f64]) -> f64 {
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let num: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let den: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    num / den
}
