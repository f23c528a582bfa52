//! The reduced linear constitutive map and its quadratic forms.
//!
//! [`evaluate`] maps a [`LocalState`] through the six constitutive relations
//! of the linear theory. The temperature and its rate enter only through the
//! combination `z = θ + β·θ̇`, which is computed once and passed through.
//!
//! The quadratic forms:
//!
//! * [`form_w`] — mechanical energy in the strain measures (e, κ),
//! * [`form_f`] — electro-thermal cross form in (E, V, z),
//! * [`form_g`] — `F - ½(a44 + γ/β²) z²`, the positive-definite
//!   electro-thermal energy of the uniqueness argument,
//! * [`form_p`] — the dissipation form in (θ̇, ∇θ),
//! * [`lyapunov_density`] — `W + G + ½ρ|u̇|² + ½β·P(−θ/β, ∇θ)`.
//!
//! All contractions run over full index ranges; no packed weighting enters
//! any of the sums.

use crate::error::{Error, Result};
use crate::material::{idx3, idx4, idx5, idx6, AnisoMaterial};
use crate::tensor::{Kappa, Sym2, Vec3};
use serde::{Deserialize, Serialize};

/// Independent constitutive variables at a material point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalState {
    /// Strain (symmetric displacement gradient).
    pub e: Sym2,
    /// Second displacement gradient, symmetric in its first two indices.
    pub kappa: Kappa,
    /// Electric field.
    #[serde(rename = "E")]
    pub e_field: Vec3,
    /// Temperature deviation from the reference temperature.
    pub theta: f64,
    /// Temperature rate.
    #[serde(rename = "thetaDot")]
    pub theta_dot: f64,
    /// Temperature gradient.
    #[serde(rename = "gradTheta")]
    pub grad_theta: Vec3,
    /// Electric field gradient (symmetric).
    #[serde(rename = "V")]
    pub v_field: Sym2,
    /// Velocity; enters only the energy density.
    #[serde(rename = "uDot")]
    pub u_dot: Vec3,
}

impl LocalState {
    /// The coupled temperature variable z = θ + β·θ̇.
    pub fn z(&self, beta: f64) -> f64 {
        self.theta + beta * self.theta_dot
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite()
            && self.kappa.is_finite()
            && self.e_field.iter().all(|v| v.is_finite())
            && self.theta.is_finite()
            && self.theta_dot.is_finite()
            && self.grad_theta.iter().all(|v| v.is_finite())
            && self.v_field.is_finite()
            && self.u_dot.iter().all(|v| v.is_finite())
    }
}

/// Dependent fields produced by the constitutive map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Response {
    /// Reduced stress.
    pub tau: Sym2,
    /// Hyperstress, symmetric in its first two indices.
    #[serde(rename = "muTensor")]
    pub mu: Kappa,
    /// Reduced electric displacement.
    pub sigma: Vec3,
    /// Entropy density ρη.
    #[serde(rename = "rhoEta")]
    pub rho_eta: f64,
    /// Electric quadrupole.
    #[serde(rename = "Q")]
    pub quadrupole: Sym2,
    /// Heat flux.
    #[serde(rename = "q")]
    pub heat_flux: Vec3,
}

/// Evaluate the six constitutive relations.
pub fn evaluate(m: &AnisoMaterial, s: &LocalState) -> Result<Response> {
    if m.beta == 0.0 {
        return Err(Error::BetaZero);
    }
    if !s.is_finite() {
        return Err(Error::NonFinite {
            context: "evaluate",
        });
    }
    let ef = s.e.full();
    let kf = s.kappa.full();
    let vf = s.v_field.full();
    let z = s.z(m.beta);

    let mut tau = Sym2::ZERO;
    for i in 0..3 {
        for j in i..3 {
            let mut acc = m.a14.get(i, j) * z;
            for k in 0..3 {
                acc += m.a13[idx3(i, j, k)] * s.e_field[k];
                for l in 0..3 {
                    acc += m.a11[idx4(i, j, k, l)] * ef[k][l];
                    acc += m.a17[idx4(i, j, k, l)] * vf[k][l];
                    for h in 0..3 {
                        acc += m.a12[idx5(i, j, k, l, h)] * kf[idx3(k, l, h)];
                    }
                }
            }
            tau.set(i, j, acc);
        }
    }

    let mut mu = Kappa::ZERO;
    for i in 0..3 {
        for j in i..3 {
            for k in 0..3 {
                let mut acc = m.a24[idx3(i, j, k)] * z;
                for l in 0..3 {
                    acc += m.a23[idx4(i, j, k, l)] * s.e_field[l];
                    for h in 0..3 {
                        acc += m.a12[idx5(l, h, i, j, k)] * ef[l][h];
                        acc += m.a27[idx5(i, j, k, l, h)] * vf[l][h];
                        for p in 0..3 {
                            acc += m.a22[idx6(i, j, k, l, h, p)] * kf[idx3(l, h, p)];
                        }
                    }
                }
                mu.set(i, j, k, acc);
            }
        }
    }

    let mut sigma = [0.0; 3];
    for (i, slot) in sigma.iter_mut().enumerate() {
        let mut acc = m.a34[i] * z;
        for j in 0..3 {
            acc += m.a33.get(i, j) * s.e_field[j];
            for k in 0..3 {
                acc += m.a13[idx3(j, k, i)] * ef[j][k];
                acc += m.a37[idx3(i, j, k)] * vf[j][k];
                for l in 0..3 {
                    acc += m.a23[idx4(j, k, l, i)] * kf[idx3(j, k, l)];
                }
            }
        }
        *slot = -acc;
    }

    let mut rho_eta = m.a44 * z + m.alpha4 + m.gamma * s.theta_dot / m.beta;
    for i in 0..3 {
        rho_eta += m.a34[i] * s.e_field[i] + m.a56[i] * s.grad_theta[i] / m.beta;
        for j in 0..3 {
            rho_eta += m.a14.get(i, j) * ef[i][j] + m.a47.get(i, j) * vf[i][j];
            for k in 0..3 {
                rho_eta += m.a24[idx3(i, j, k)] * kf[idx3(i, j, k)];
            }
        }
    }
    let rho_eta = -rho_eta;

    let mut quadrupole = Sym2::ZERO;
    for i in 0..3 {
        for j in i..3 {
            let mut acc = m.a47.get(i, j) * z;
            for k in 0..3 {
                acc += m.a37[idx3(k, i, j)] * s.e_field[k];
                for l in 0..3 {
                    acc += m.a17[idx4(k, l, i, j)] * ef[k][l];
                    acc += m.a77[idx4(i, j, k, l)] * vf[k][l];
                    for h in 0..3 {
                        acc += m.a27[idx5(k, l, h, i, j)] * kf[idx3(k, l, h)];
                    }
                }
            }
            quadrupole.set(i, j, -acc);
        }
    }

    let mut heat_flux = [0.0; 3];
    for (i, slot) in heat_flux.iter_mut().enumerate() {
        let mut acc = m.a56[i] * s.theta_dot;
        for j in 0..3 {
            acc += m.a66.get(i, j) * s.grad_theta[j];
        }
        *slot = -m.t0 / m.beta * acc;
    }

    Ok(Response {
        tau,
        mu,
        sigma,
        rho_eta,
        quadrupole,
        heat_flux,
    })
}

/// Mechanical quadratic form: W = ½ a11·ee + ½ a22·κκ + a12·eκ.
pub fn form_w(m: &AnisoMaterial, e: &Sym2, kappa: &Kappa) -> f64 {
    let ef = e.full();
    let kf = kappa.full();
    let mut w = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    w += 0.5 * m.a11[idx4(i, j, k, l)] * ef[i][j] * ef[k][l];
                    for h in 0..3 {
                        w += m.a12[idx5(i, j, k, l, h)] * ef[i][j] * kf[idx3(k, l, h)];
                        for p in 0..3 {
                            w += 0.5
                                * m.a22[idx6(i, j, k, l, h, p)]
                                * kf[idx3(i, j, k)]
                                * kf[idx3(l, h, p)];
                        }
                    }
                }
            }
        }
    }
    w
}

/// Electro-thermal cross form:
/// F = -½ a33·EE - ½ a77·VV - a37·EV - a34·E z - a47·V z.
pub fn form_f(m: &AnisoMaterial, e_field: &Vec3, v_field: &Sym2, z: f64) -> f64 {
    let vf = v_field.full();
    let mut f = 0.0;
    for i in 0..3 {
        f -= m.a34[i] * e_field[i] * z;
        for j in 0..3 {
            f -= 0.5 * m.a33.get(i, j) * e_field[i] * e_field[j];
            f -= m.a47.get(i, j) * vf[i][j] * z;
            for k in 0..3 {
                f -= m.a37[idx3(i, j, k)] * e_field[i] * vf[j][k];
                for l in 0..3 {
                    f -= 0.5 * m.a77[idx4(i, j, k, l)] * vf[i][j] * vf[k][l];
                }
            }
        }
    }
    f
}

/// G = F - ½ (a44 + γ/β²) z².
pub fn form_g(m: &AnisoMaterial, e_field: &Vec3, v_field: &Sym2, z: f64) -> Result<f64> {
    if m.beta == 0.0 {
        return Err(Error::BetaZero);
    }
    Ok(form_f(m, e_field, v_field, z) - 0.5 * (m.a44 + m.gamma / (m.beta * m.beta)) * z * z)
}

/// Dissipation form: P(ξ, η) = (1/β)(γ ξ² + 2 a56·ξη + a66·ηη).
pub fn form_p(m: &AnisoMaterial, xi: f64, eta: &Vec3) -> Result<f64> {
    if m.beta == 0.0 {
        return Err(Error::BetaZero);
    }
    let mut p = m.gamma * xi * xi;
    for i in 0..3 {
        p += 2.0 * m.a56[i] * xi * eta[i];
        for j in 0..3 {
            p += m.a66.get(i, j) * eta[i] * eta[j];
        }
    }
    Ok(p / m.beta)
}

/// Density of the decay functional:
/// W(e,κ) + G(E,V,z) + ½ρ|u̇|² + ½β·P(−θ/β, ∇θ).
pub fn lyapunov_density(m: &AnisoMaterial, s: &LocalState) -> Result<f64> {
    if m.beta == 0.0 {
        return Err(Error::BetaZero);
    }
    let z = s.z(m.beta);
    let kinetic = 0.5 * m.rho * s.u_dot.iter().map(|v| v * v).sum::<f64>();
    let p = form_p(m, -s.theta / m.beta, &s.grad_theta)?;
    Ok(form_w(m, &s.e, &s.kappa) + form_g(m, &s.e_field, &s.v_field, z)? + kinetic
        + 0.5 * m.beta * p)
}
