//! One-dimensional coupled displacement / temperature / potential simulator
//! with a discrete energy-decay monitor.
//!
//! # Governing equations
//!
//! Restricting the isotropic field equations to u = (u(x,t), 0, 0),
//! θ(x,t), φ(x,t) gives, with z = θ + βθ̇,
//!
//! ```text
//! (i)   ρ ü = A u_xx + α14 z_x − Cφ φ_xxx − B u_xxxx + ρ f
//! (ii)  Cφ u_xxx + α33 φ_xx + α47 z_xx − Dφ φ_xxxx = g
//! (iii) α14 u̇_x + a44 θ̇ + (a44 + γ/β²) β θ̈ − α47 φ̇_xx + (α66/β) θ_xx + ρ r / T0 = 0
//! ```
//!
//! Both third-derivative couplings carry the same coefficient
//! `Cφ = λ* + 2μ* − α0 − 2β0`: the hyperstress contribution enters the
//! momentum balance with the opposite sign to the stress contribution, and
//! the skew pairing is exactly what lets the cross terms cancel in the
//! energy identity. Equation (iii) carries the `−α47 φ̇_xx` rate coupling
//! for the same reason: it is the trace of the quadrupole rate in the
//! energy balance.
//!
//! # Discretization
//!
//! Uniform grid of N interior nodes, homogeneous essential conditions on
//! every field (clamped displacement and potential, zero temperature).
//! All five unknowns advance in one monolithic trapezoidal step; the
//! quasi-static potential equation is imposed at the step endpoints. The
//! spatial operators are chosen as exact adjoint pairs under the discrete
//! inner product (see [`operators`]), so the discrete functional
//!
//! ```text
//! 𝓛 = Σ Δx [ W + G + ½ρu̇² + ½βP(−θ/β, θ_x) ]
//! ```
//!
//! obeys `𝓛(t_{n+1}) − 𝓛(t_n) = −Δt · P_h(midpoint)` to solver roundoff,
//! for every material and grid: the decay of 𝓛 is a structural property of
//! the scheme whenever the dissipation form P is positive semidefinite.
//! Gradient terms in 𝓛 use edge-midpoint quadrature; curvature terms use
//! the extended second differences with half weights at the boundary rows.

mod banded;
mod operators;

pub use operators::Operators;

use crate::admissibility::{check_isotropic, AdmissibilityReport, DEFAULT_EIGEN_TOL};
use crate::error::{Error, Result};
use crate::material::IsoMaterial;
use banded::{BandedLu, BandedMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Coefficients of the 1D reduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coeffs1D {
    /// Second-order elastic coefficient λ + 2μ.
    pub a: f64,
    /// Fourth-order gradient-elastic coefficient 4(γ1+γ2+γ5) + γ3 + 2γ4.
    pub b: f64,
    /// λ* + 2μ* + α0 + 2β0, the potential coupling as displayed in the
    /// displacement equation. The assembled system uses [`Coeffs1D::cphi`]
    /// on both sides; see the module docs.
    pub cu: f64,
    /// λ* + 2μ* − α0 − 2β0, the displacement coupling of the potential
    /// equation and the energy-consistent coupling of the momentum equation.
    pub cphi: f64,
    /// Fourth-order potential coefficient λ̃ + 2μ̃.
    pub dphi: f64,
    pub alpha14: f64,
    pub alpha33: f64,
    pub alpha47: f64,
    pub alpha66: f64,
    pub a44: f64,
    pub gamma: f64,
    pub beta: f64,
    pub rho: f64,
    pub t0: f64,
    pub alpha4: f64,
}

impl Coeffs1D {
    /// a44 + γ/β².
    pub fn c44g(&self) -> f64 {
        self.a44 + self.gamma / (self.beta * self.beta)
    }

    /// Leading coefficient of the θ̈ term, (a44 + γ/β²)β; the damped-wave
    /// regime requires it negative.
    pub fn theta_leading(&self) -> f64 {
        self.c44g() * self.beta
    }
}

/// Read the 1D coefficients off an isotropic material.
pub fn reduce_to_1d(m: &IsoMaterial) -> Coeffs1D {
    Coeffs1D {
        a: m.lambda + 2.0 * m.mu,
        b: 4.0 * (m.gamma1 + m.gamma2 + m.gamma5) + m.gamma3 + 2.0 * m.gamma4,
        cu: m.lambda_star + 2.0 * m.mu_star + m.alpha0 + 2.0 * m.beta0,
        cphi: m.lambda_star + 2.0 * m.mu_star - m.alpha0 - 2.0 * m.beta0,
        dphi: m.lambda_tilde + 2.0 * m.mu_tilde,
        alpha14: m.alpha14,
        alpha33: m.alpha33,
        alpha47: m.alpha47,
        alpha66: m.alpha66,
        a44: m.a44,
        gamma: m.gamma,
        beta: m.beta,
        rho: m.rho,
        t0: m.t0,
        alpha4: m.alpha4,
    }
}

/// Uniform grid of interior nodes on (0, L).
#[derive(Clone, Debug, Serialize)]
pub struct Grid1D {
    pub nodes: usize,
    pub length: f64,
    pub spacing: f64,
    pub coords: Vec<f64>,
}

impl Grid1D {
    pub fn new(nodes: usize, length: f64) -> Result<Self> {
        if nodes < 8 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 8 interior nodes, got {nodes}"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let spacing = length / (nodes as f64 + 1.0);
        let coords = (0..nodes).map(|i| (i as f64 + 1.0) * spacing).collect();
        Ok(Grid1D {
            nodes,
            length,
            spacing,
            coords,
        })
    }
}

/// Nodal initial-data or source profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    /// Explicit nodal values (length must match the grid).
    Values(Vec<f64>),
    Named(NamedProfile),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "camelCase", deny_unknown_fields)]
pub enum NamedProfile {
    Zero,
    /// amplitude · sin(mode·π·x/L)
    #[serde(rename_all = "camelCase")]
    Sine { mode: u32, amplitude: f64 },
    /// amplitude · (4x(L−x)/L²)², compatible with every boundary condition
    #[serde(rename_all = "camelCase")]
    ClampedBump { amplitude: f64 },
    /// amplitude · (4x(L−x)/L²)² · Σ_{m≤modes} c_m/m² · sin(mπx/L) with
    /// seeded uniform c_m
    #[serde(rename_all = "camelCase")]
    RandomSmooth { amplitude: f64, modes: u32 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Named(NamedProfile::Zero)
    }
}

impl Profile {
    pub fn realize(&self, grid: &Grid1D, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let l = grid.length;
        let envelope = |x: f64| (4.0 * x * (l - x) / (l * l)).powi(2);
        match self {
            Profile::Values(v) => {
                if v.len() != grid.nodes {
                    return Err(Error::WrongLength {
                        field: "profile values",
                        expected: grid.nodes,
                        found: v.len(),
                    });
                }
                Ok(v.clone())
            }
            Profile::Named(NamedProfile::Zero) => Ok(vec![0.0; grid.nodes]),
            Profile::Named(NamedProfile::Sine { mode, amplitude }) => Ok(grid
                .coords
                .iter()
                .map(|&x| amplitude * (*mode as f64 * std::f64::consts::PI * x / l).sin())
                .collect()),
            Profile::Named(NamedProfile::ClampedBump { amplitude }) => {
                Ok(grid.coords.iter().map(|&x| amplitude * envelope(x)).collect())
            }
            Profile::Named(NamedProfile::RandomSmooth { amplitude, modes }) => {
                let coeffs: Vec<f64> = (1..=*modes)
                    .map(|m| rng.gen_range(-1.0..1.0) / (m * m) as f64)
                    .collect();
                Ok(grid
                    .coords
                    .iter()
                    .map(|&x| {
                        let s: f64 = coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, c)| {
                                c * ((k as f64 + 1.0) * std::f64::consts::PI * x / l).sin()
                            })
                            .sum();
                        amplitude * envelope(x) * s
                    })
                    .collect())
            }
        }
    }
}

/// Initial data; the temperature rate is either given directly or derived
/// from the prescribed initial entropy.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default)]
    pub u: Profile,
    #[serde(default)]
    pub v: Profile,
    #[serde(default)]
    pub theta: Profile,
    /// Initial entropy per unit mass; mutually exclusive with `thetaDot`.
    #[serde(default)]
    pub eta: Option<Profile>,
    #[serde(rename = "thetaDot", default)]
    pub theta_dot: Option<Profile>,
}

/// Time-constant sources (body force f, free charge g, heat supply r).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sources {
    #[serde(default)]
    pub f: Profile,
    #[serde(default)]
    pub g: Profile,
    #[serde(default)]
    pub r: Profile,
}

/// Full simulation configuration.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub material: IsoMaterial,
    pub grid: Grid1D,
    pub dt: f64,
    pub steps: usize,
    pub initial: InitialData,
    pub sources: Sources,
    pub seed: u64,
    /// Run even when the temperature equation is outside its damped-wave
    /// regime.
    pub force: bool,
}

impl SimConfig {
    pub fn new(material: IsoMaterial, grid: Grid1D, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        Ok(SimConfig {
            material,
            grid,
            dt,
            steps,
            initial: InitialData::default(),
            sources: Sources::default(),
            seed: 0,
            force: false,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimConfigFile {
    material: serde_json::Value,
    grid: GridFile,
    dt: f64,
    steps: usize,
    #[serde(default)]
    initial: InitialData,
    #[serde(default)]
    sources: Sources,
    #[serde(default)]
    bc: Option<String>,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    length: f64,
    nodes: usize,
}

/// Parse a simulation configuration from JSON. The `material` entry is
/// either an inline isotropic material object or a path string to a
/// material file.
pub fn parse_sim_config(text: &str, origin: &str) -> Result<SimConfig> {
    let file: SimConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.into(),
        detail: e.to_string(),
    })?;
    if let Some(bc) = &file.bc {
        if bc != "clamped" {
            return Err(Error::InvalidConfig(format!(
                "unsupported boundary-condition set {bc:?}; only the homogeneous essential set \"clamped\" is implemented"
            )));
        }
    }
    let material = match &file.material {
        serde_json::Value::String(path) => {
            match crate::material::load_material(std::path::Path::new(path))? {
                crate::material::Material::Isotropic(m) => m,
                crate::material::Material::Anisotropic(_) => {
                    return Err(Error::InvalidConfig(
                        "the 1D simulator requires an isotropic material".into(),
                    ))
                }
            }
        }
        inline => {
            match crate::material::parse_material(&inline.to_string(), origin)? {
                crate::material::Material::Isotropic(m) => m,
                crate::material::Material::Anisotropic(_) => {
                    return Err(Error::InvalidConfig(
                        "the 1D simulator requires an isotropic material".into(),
                    ))
                }
            }
        }
    };
    if file.initial.eta.is_some() && file.initial.theta_dot.is_some() {
        return Err(Error::InvalidConfig(
            "initial data may prescribe eta or thetaDot, not both".into(),
        ));
    }
    let grid = Grid1D::new(file.grid.nodes, file.grid.length)?;
    let mut config = SimConfig::new(material, grid, file.dt, file.steps)?;
    config.initial = file.initial;
    config.sources = file.sources;
    config.seed = file.seed;
    Ok(config)
}

/// Grid fields at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState1D {
    pub u: Vec<f64>,
    pub u_dot: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub phi: Vec<f64>,
    pub time: f64,
    pub step: usize,
}

impl SimState1D {
    fn zeros(n: usize) -> Self {
        SimState1D {
            u: vec![0.0; n],
            u_dot: vec![0.0; n],
            theta: vec![0.0; n],
            theta_dot: vec![0.0; n],
            phi: vec![0.0; n],
            time: 0.0,
            step: 0,
        }
    }

    fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.u_dot)
            .chain(&self.theta)
            .chain(&self.theta_dot)
            .chain(&self.phi)
            .all(|v| v.is_finite())
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }
}

/// One row of the per-step trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub lyapunov: f64,
    pub dissipation: f64,
    pub max_u: f64,
    pub max_theta: f64,
    pub max_phi: f64,
}

/// Simulation outcome: per-step traces plus the final state.
#[derive(Clone, Debug)]
pub struct SimResult {
    pub trace: Vec<TraceRow>,
    pub final_state: SimState1D,
    pub initial_lyapunov: f64,
    pub final_lyapunov: f64,
    pub max_dissipation: f64,
    /// max over steps of (𝓛_{n+1} − 𝓛_n) / max(|𝓛_0|, tiny).
    pub max_relative_increase: f64,
    /// True when the per-step relative increase never exceeds 1e-8.
    pub monotone: bool,
    /// Boundary work terms; identically zero under the homogeneous
    /// essential conditions.
    pub boundary_flux: Vec<f64>,
}

/// Per-step relative increase allowed by the monotonicity verdict.
pub const DECAY_TOLERANCE: f64 = 1e-8;

/// Assembled operators and factored step matrices for one configuration.
pub struct Simulator {
    pub coeffs: Coeffs1D,
    pub grid: Grid1D,
    pub ops: Operators,
    pub dt: f64,
    step_matrix: BandedMatrix,
    step_lu: BandedLu,
    phi_matrix: BandedMatrix,
    phi_lu: BandedLu,
    source_f: Vec<f64>,
    source_g: Vec<f64>,
    source_r: Vec<f64>,
}

const FIELDS: usize = 5; // u, v, theta, psi, phi per node
const HALF_BAND: usize = 2 * FIELDS + FIELDS - 1; // stencils reach two nodes away

impl Simulator {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let coeffs = reduce_to_1d(&config.material);
        if coeffs.beta == 0.0 {
            return Err(Error::BetaZero);
        }
        if coeffs.theta_leading() >= 0.0 && !config.force {
            return Err(Error::UnstableLeadingCoefficient {
                value: coeffs.theta_leading(),
            });
        }
        if !(config.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                config.dt
            )));
        }
        let ops = Operators::new(config.grid.nodes, config.grid.spacing);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed_0001));
        let source_f = config.sources.f.realize(&config.grid, &mut rng)?;
        let source_g = config.sources.g.realize(&config.grid, &mut rng)?;
        let source_r = config.sources.r.realize(&config.grid, &mut rng)?;

        let phi_matrix = Self::assemble_phi_matrix(&coeffs, &ops);
        let phi_lu = phi_matrix.clone().factor().map_err(|_| {
            Error::InvalidConfig(
                "potential operator is singular; the electro-thermal block must be definite \
                 (alpha33 < 0 and lambdaTilde + 2*muTilde < 0 make it so)"
                    .into(),
            )
        })?;
        let step_matrix = Self::assemble_step_matrix(&coeffs, &ops, config.dt);
        let step_lu = step_matrix.clone().factor()?;
        Ok(Simulator {
            coeffs,
            grid: config.grid.clone(),
            ops,
            dt: config.dt,
            step_matrix,
            step_lu,
            phi_matrix,
            phi_lu,
            source_f,
            source_g,
            source_r,
        })
    }

    fn assemble_phi_matrix(c: &Coeffs1D, ops: &Operators) -> BandedMatrix {
        let n = ops.n;
        let mut m = BandedMatrix::zeros(n, 2, 2);
        for &(i, j, v) in &ops.d2.triplets {
            m.add(i, j, c.alpha33 * v);
        }
        for &(i, j, v) in &ops.d4.triplets {
            m.add(i, j, -c.dphi * v);
        }
        m
    }

    /// Left-hand side of the monolithic trapezoidal step; unknowns per node
    /// are (u, v, θ, ψ, φ).
    fn assemble_step_matrix(c: &Coeffs1D, ops: &Operators, dt: f64) -> BandedMatrix {
        let n = ops.n;
        let mut m = BandedMatrix::zeros(FIELDS * n, HALF_BAND, HALF_BAND);
        let idx = |i: usize, f: usize| FIELDS * i + f;
        let half = 0.5 * dt;
        let b = c.beta;

        for i in 0..n {
            // u row: u+ - (dt/2) v+
            m.add(idx(i, 0), idx(i, 0), 1.0);
            m.add(idx(i, 0), idx(i, 1), -half);
            // v row: rho v+ - (dt/2)[A D2 - B D4]u+ - (dt/2) a14 D1(θ+ + βψ+) + (dt/2) cphi T3 φ+
            m.add(idx(i, 1), idx(i, 1), c.rho);
            // θ row: θ+ - (dt/2) ψ+
            m.add(idx(i, 2), idx(i, 2), 1.0);
            m.add(idx(i, 2), idx(i, 3), -half);
            // ψ row: c3 ψ+ + (dt/2)[a14 D1 v+ + a44 ψ+ + (α66/β) D2 θ+] - α47 D2 φ+
            m.add(idx(i, 3), idx(i, 3), c.theta_leading() + half * c.a44);
        }
        for &(i, j, v) in &ops.d2.triplets {
            m.add(idx(i, 1), idx(j, 0), -half * c.a * v);
            m.add(idx(i, 3), idx(j, 2), half * (c.alpha66 / b) * v);
            m.add(idx(i, 3), idx(j, 4), -c.alpha47 * v);
            m.add(idx(i, 4), idx(j, 2), c.alpha47 * v);
            m.add(idx(i, 4), idx(j, 3), c.alpha47 * b * v);
            m.add(idx(i, 4), idx(j, 4), c.alpha33 * v);
        }
        for &(i, j, v) in &ops.d4.triplets {
            m.add(idx(i, 1), idx(j, 0), half * c.b * v);
            m.add(idx(i, 4), idx(j, 4), -c.dphi * v);
        }
        for &(i, j, v) in &ops.d1.triplets {
            m.add(idx(i, 1), idx(j, 2), -half * c.alpha14 * v);
            m.add(idx(i, 1), idx(j, 3), -half * c.alpha14 * b * v);
            m.add(idx(i, 3), idx(j, 1), half * c.alpha14 * v);
        }
        for &(i, j, v) in &ops.t3.triplets {
            m.add(idx(i, 1), idx(j, 4), half * c.cphi * v);
        }
        for &(i, j, v) in &ops.s3.triplets {
            m.add(idx(i, 4), idx(j, 0), c.cphi * v);
        }
        m
    }

    /// Solve the quasi-static potential equation for φ given u and
    /// z = θ + βθ̇ (one iterative-refinement pass keeps the row residual at
    /// roundoff scale).
    pub fn solve_potential(&self, u: &[f64], z: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let c = &self.coeffs;
        let su = self.ops.s3.apply_into(u);
        let d2z = self.ops.d2.apply_into(z);
        let rhs: Vec<f64> = (0..self.ops.n)
            .map(|i| g[i] - c.cphi * su[i] - c.alpha47 * d2z[i])
            .collect();
        let mut phi = rhs.clone();
        self.phi_lu.solve(&mut phi)?;
        // refinement
        let mut residual = vec![0.0; self.ops.n];
        self.phi_matrix.matvec(&phi, &mut residual);
        for i in 0..self.ops.n {
            residual[i] = rhs[i] - residual[i];
        }
        self.phi_lu.solve(&mut residual)?;
        for i in 0..self.ops.n {
            phi[i] += residual[i];
        }
        Ok(phi)
    }

    /// Advance one trapezoidal step.
    pub fn step(&self, state: &SimState1D) -> Result<SimState1D> {
        let n = self.ops.n;
        let c = &self.coeffs;
        let b = c.beta;
        let half = 0.5 * self.dt;
        let idx = |i: usize, f: usize| FIELDS * i + f;

        let d2u = self.ops.d2.apply_into(&state.u);
        let d4u = self.ops.d4.apply_into(&state.u);
        let d1th = self.ops.d1.apply_into(&state.theta);
        let d1ps = self.ops.d1.apply_into(&state.theta_dot);
        let t3phi = self.ops.t3.apply_into(&state.phi);
        let d1v = self.ops.d1.apply_into(&state.u_dot);
        let d2th = self.ops.d2.apply_into(&state.theta);
        let d2phi = self.ops.d2.apply_into(&state.phi);

        let mut rhs = vec![0.0; FIELDS * n];
        for i in 0..n {
            rhs[idx(i, 0)] = state.u[i] + half * state.u_dot[i];
            rhs[idx(i, 1)] = c.rho * state.u_dot[i]
                + half
                    * (c.a * d2u[i] - c.b * d4u[i] + c.alpha14 * (d1th[i] + b * d1ps[i])
                        - c.cphi * t3phi[i])
                + self.dt * c.rho * self.source_f[i];
            rhs[idx(i, 2)] = state.theta[i] + half * state.theta_dot[i];
            rhs[idx(i, 3)] = c.theta_leading() * state.theta_dot[i]
                - half
                    * (c.alpha14 * d1v[i]
                        + c.a44 * state.theta_dot[i]
                        + (c.alpha66 / b) * d2th[i])
                - c.alpha47 * d2phi[i]
                - self.dt * c.rho * self.source_r[i] / c.t0;
            rhs[idx(i, 4)] = self.source_g[i];
        }

        let mut sol = rhs.clone();
        self.step_lu.solve(&mut sol)?;
        // one refinement pass
        let mut residual = vec![0.0; FIELDS * n];
        self.step_matrix.matvec(&sol, &mut residual);
        for i in 0..FIELDS * n {
            residual[i] = rhs[i] - residual[i];
        }
        self.step_lu.solve(&mut residual)?;
        for i in 0..FIELDS * n {
            sol[i] += residual[i];
        }

        let mut next = SimState1D::zeros(n);
        for i in 0..n {
            next.u[i] = sol[idx(i, 0)];
            next.u_dot[i] = sol[idx(i, 1)];
            next.theta[i] = sol[idx(i, 2)];
            next.theta_dot[i] = sol[idx(i, 3)];
            next.phi[i] = sol[idx(i, 4)];
        }
        next.time = state.time + self.dt;
        next.step = state.step + 1;
        if !next.is_finite() {
            return Err(Error::NanDetected { step: next.step });
        }
        Ok(next)
    }

    /// Discrete decay functional Σ Δx [W + G + ½ρu̇² + ½βP(−θ/β, θ_x)].
    pub fn lyapunov(&self, s: &SimState1D) -> f64 {
        let c = &self.coeffs;
        let h = self.grid.spacing;
        let b = c.beta;
        let n = self.ops.n;
        let z: Vec<f64> = (0..n)
            .map(|i| s.theta[i] + b * s.theta_dot[i])
            .collect();

        let eu = self.ops.edge_diffs(&s.u);
        let eth = self.ops.edge_diffs(&s.theta);
        let ephi = self.ops.edge_diffs(&s.phi);
        let wu = self.ops.d2_extended(&s.u);
        let wphi = self.ops.d2_extended(&s.phi);

        let sum_sq = |v: &[f64]| -> f64 { v.iter().map(|x| x * x).sum() };
        let sum_sq_half_ends = |v: &[f64]| -> f64 {
            let inner: f64 = v[1..v.len() - 1].iter().map(|x| x * x).sum();
            inner + 0.5 * (v[0] * v[0] + v[v.len() - 1] * v[v.len() - 1])
        };

        let w = 0.5 * c.a * sum_sq(&eu) + 0.5 * c.b * sum_sq_half_ends(&wu);
        let kinetic = 0.5 * c.rho * sum_sq(&s.u_dot);
        let mut g = -0.5 * c.alpha33 * sum_sq(&ephi) - 0.5 * c.dphi * sum_sq_half_ends(&wphi);
        for i in 0..n {
            // -α47 V z with V = -φ_xx
            g += c.alpha47 * wphi[i + 1] * z[i];
        }
        g -= 0.5 * c.c44g() * sum_sq(&z);
        let p0 = 0.5 * (c.gamma / (b * b)) * sum_sq(&s.theta) + 0.5 * c.alpha66 * sum_sq(&eth);
        h * (w + kinetic + g + p0)
    }

    /// Discrete dissipation Σ Δx P(θ̇, θ_x).
    pub fn dissipation(&self, s: &SimState1D) -> f64 {
        let c = &self.coeffs;
        let h = self.grid.spacing;
        let eth = self.ops.edge_diffs(&s.theta);
        let sum_sq = |v: &[f64]| -> f64 { v.iter().map(|x| x * x).sum() };
        h * ((c.gamma / c.beta) * sum_sq(&s.theta_dot) + (c.alpha66 / c.beta) * sum_sq(&eth))
    }

    fn trace_row(&self, s: &SimState1D) -> TraceRow {
        TraceRow {
            step: s.step,
            time: s.time,
            lyapunov: self.lyapunov(s),
            dissipation: self.dissipation(s),
            max_u: SimState1D::max_abs(&s.u),
            max_theta: SimState1D::max_abs(&s.theta),
            max_phi: SimState1D::max_abs(&s.phi),
        }
    }

    /// Build the initial state from the configured profiles. When the
    /// initial entropy is prescribed, θ̇⁰ and φ⁰ are determined jointly so
    /// that the entropy relation and the potential equation hold at t = 0.
    pub fn initial_state(&self, config: &SimConfig) -> Result<SimState1D> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let grid = &self.grid;
        let u = config.initial.u.realize(grid, &mut rng)?;
        let v = config.initial.v.realize(grid, &mut rng)?;
        let theta = config.initial.theta.realize(grid, &mut rng)?;
        if config.initial.eta.is_some() && config.initial.theta_dot.is_some() {
            return Err(Error::InvalidConfig(
                "initial data may prescribe eta or thetaDot, not both".into(),
            ));
        }
        let n = self.ops.n;
        let c = &self.coeffs;
        let mut state = SimState1D::zeros(n);
        state.u = u;
        state.u_dot = v;
        state.theta = theta;

        // direct θ̇ mode (default zero), or entropy mode
        if let Some(eta_profile) = &config.initial.eta {
            let eta = eta_profile.realize(grid, &mut rng)?;
            let c_e = c.theta_leading();
            if c_e == 0.0 {
                return Err(Error::DegenerateEntropyCoefficient);
            }
            // joint solve for (ψ, φ): pointwise entropy relation coupled to
            // the potential equation through the quadrupole trace
            let d1u = self.ops.d1.apply_into(&state.u);
            let su = self.ops.s3.apply_into(&state.u);
            let d2th = self.ops.d2.apply_into(&state.theta);
            let idx = |i: usize, f: usize| 2 * i + f; // f: 0=ψ, 1=φ
            let mut m = BandedMatrix::zeros(2 * n, 5, 5);
            let mut rhs = vec![0.0; 2 * n];
            for i in 0..n {
                m.add(idx(i, 0), idx(i, 0), c_e);
                rhs[idx(i, 0)] = -c.rho * eta[i]
                    - c.alpha4
                    - c.alpha14 * d1u[i]
                    - c.a44 * state.theta[i];
                rhs[idx(i, 1)] = self.source_g[i] - c.cphi * su[i] - c.alpha47 * d2th[i];
            }
            for &(i, j, v) in &self.ops.d2.triplets {
                m.add(idx(i, 0), idx(j, 1), -c.alpha47 * v);
                m.add(idx(i, 1), idx(j, 0), c.alpha47 * c.beta * v);
            }
            for &(i, j, v) in &self.ops.d2.triplets {
                m.add(idx(i, 1), idx(j, 1), c.alpha33 * v);
            }
            for &(i, j, v) in &self.ops.d4.triplets {
                m.add(idx(i, 1), idx(j, 1), -c.dphi * v);
            }
            let lu = m.factor()?;
            let mut sol = rhs;
            lu.solve(&mut sol)?;
            for i in 0..n {
                state.theta_dot[i] = sol[idx(i, 0)];
                state.phi[i] = sol[idx(i, 1)];
            }
        } else {
            if let Some(p) = &config.initial.theta_dot {
                state.theta_dot = p.realize(grid, &mut rng)?;
            }
            let z: Vec<f64> = (0..n)
                .map(|i| state.theta[i] + c.beta * state.theta_dot[i])
                .collect();
            state.phi = self.solve_potential(&state.u, &z, &self.source_g)?;
        }
        if !state.is_finite() {
            return Err(Error::NanDetected { step: 0 });
        }
        Ok(state)
    }
}

/// Solve the entropy relation pointwise for θ̇⁰ given the other initial
/// fields (η is entropy per unit mass; the field-gradient trace uses the
/// prescribed potential).
pub fn init_theta_dot(
    m: &IsoMaterial,
    ops: &Operators,
    u0: &[f64],
    theta0: &[f64],
    phi0: &[f64],
    eta0: &[f64],
) -> Result<Vec<f64>> {
    let c = reduce_to_1d(m);
    let c_e = c.theta_leading();
    if c_e == 0.0 {
        return Err(Error::DegenerateEntropyCoefficient);
    }
    let d1u = ops.d1.apply_into(u0);
    let d2phi = ops.d2.apply_into(phi0);
    Ok((0..ops.n)
        .map(|i| {
            (-c.rho * eta0[i] - c.alpha4 - c.alpha14 * d1u[i] - c.a44 * theta0[i]
                + c.alpha47 * d2phi[i])
                / c_e
        })
        .collect())
}

/// Entropy per unit mass produced by the 1D fields (inverse of
/// [`init_theta_dot`]); used to build consistent initial data.
pub fn entropy_from_fields(
    m: &IsoMaterial,
    ops: &Operators,
    u0: &[f64],
    theta0: &[f64],
    theta_dot0: &[f64],
    phi0: &[f64],
) -> Vec<f64> {
    let c = reduce_to_1d(m);
    let d1u = ops.d1.apply_into(u0);
    let d2phi = ops.d2.apply_into(phi0);
    (0..ops.n)
        .map(|i| {
            let z = theta0[i] + c.beta * theta_dot0[i];
            -(c.alpha14 * d1u[i] + c.a44 * z - c.alpha47 * d2phi[i]
                + c.gamma * theta_dot0[i] / c.beta
                + c.alpha4)
                / c.rho
        })
        .collect()
}

/// Execute a full run: initialization, step loop, per-step traces.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    let sim = Simulator::new(config)?;
    let mut state = sim.initial_state(config)?;
    let mut trace = Vec::with_capacity(config.steps + 1);
    trace.push(sim.trace_row(&state));
    let scale = trace[0].lyapunov.abs().max(f64::MIN_POSITIVE);
    let mut max_rel_increase: f64 = 0.0;
    for _ in 0..config.steps {
        let next = sim.step(&state)?;
        let row = sim.trace_row(&next);
        let prev = trace.last().unwrap().lyapunov;
        max_rel_increase = max_rel_increase.max((row.lyapunov - prev) / scale);
        trace.push(row);
        state = next;
    }
    let initial_lyapunov = trace[0].lyapunov;
    let final_lyapunov = trace.last().unwrap().lyapunov;
    let max_dissipation = trace.iter().fold(0.0f64, |a, r| a.max(r.dissipation));
    Ok(SimResult {
        boundary_flux: vec![0.0; trace.len()],
        final_state: state,
        initial_lyapunov,
        final_lyapunov,
        max_dissipation,
        max_relative_increase: max_rel_increase,
        monotone: max_rel_increase <= DECAY_TOLERANCE,
        trace,
    })
}

/// Write the trace as CSV with 17 significant digits.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,time,lyapunov,dissipation,max_u,max_theta,max_phi")?;
    for r in trace {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.step, r.time, r.lyapunov, r.dissipation, r.max_u, r.max_theta, r.max_phi
        )?;
    }
    Ok(())
}

/// Outcome of the two uniqueness probes: the null-data difference run and a
/// paired run with a perturbed initial displacement.
#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub steps: usize,
    pub null_max_u: f64,
    pub null_max_theta: f64,
    pub null_max_phi: f64,
    pub null_within_roundoff: bool,
    pub epsilon: f64,
    pub diff_initial_lyapunov: f64,
    pub diff_max_lyapunov: f64,
    /// max over steps of 𝓛_diff(t)/𝓛_diff(0); 0 for an identically zero
    /// difference.
    pub diff_max_ratio: f64,
    pub diff_bounded: bool,
}

/// Run the uniqueness probes. The null-data run must stay at roundoff; the
/// difference of two runs whose initial displacement differs by
/// ε·(clamped bump) must have a non-increasing decay functional.
pub fn uniqueness_experiment(config: &SimConfig, epsilon: f64) -> Result<UniquenessReport> {
    let sim = Simulator::new(config)?;

    // null-data difference problem: zero data, zero sources
    let mut null_config = config.clone();
    null_config.initial = InitialData::default();
    null_config.sources = Sources::default();
    let null_sim = Simulator::new(&null_config)?;
    let mut null_state = null_sim.initial_state(&null_config)?;
    let (mut nu, mut nth, mut nphi) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..config.steps {
        null_state = null_sim.step(&null_state)?;
        nu = nu.max(SimState1D::max_abs(&null_state.u));
        nth = nth.max(SimState1D::max_abs(&null_state.theta));
        nphi = nphi.max(SimState1D::max_abs(&null_state.phi));
    }

    // paired runs differing by a perturbation of the initial displacement
    let mut state_a = sim.initial_state(config)?;
    let bump = Profile::Named(NamedProfile::ClampedBump { amplitude: epsilon });
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bump_vals = bump.realize(&config.grid, &mut rng)?;
    let mut state_b = state_a.clone();
    for i in 0..config.grid.nodes {
        state_b.u[i] += bump_vals[i];
    }
    // restore consistency of the perturbed potential with its constraint
    let zb: Vec<f64> = (0..config.grid.nodes)
        .map(|i| state_b.theta[i] + sim.coeffs.beta * state_b.theta_dot[i])
        .collect();
    state_b.phi = sim.solve_potential(&state_b.u, &zb, &sim.source_g)?;

    let diff_lyap = |a: &SimState1D, b: &SimState1D| -> f64 {
        let n = a.u.len();
        let mut d = SimState1D::zeros(n);
        for i in 0..n {
            d.u[i] = b.u[i] - a.u[i];
            d.u_dot[i] = b.u_dot[i] - a.u_dot[i];
            d.theta[i] = b.theta[i] - a.theta[i];
            d.theta_dot[i] = b.theta_dot[i] - a.theta_dot[i];
            d.phi[i] = b.phi[i] - a.phi[i];
        }
        sim.lyapunov(&d)
    };
    let diff0 = diff_lyap(&state_a, &state_b);
    let mut diff_max = diff0;
    for _ in 0..config.steps {
        state_a = sim.step(&state_a)?;
        state_b = sim.step(&state_b)?;
        diff_max = diff_max.max(diff_lyap(&state_a, &state_b));
    }
    let diff_max_ratio = if diff0 == 0.0 {
        if diff_max == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff_max / diff0
    };
    Ok(UniquenessReport {
        steps: config.steps,
        null_max_u: nu,
        null_max_theta: nth,
        null_max_phi: nphi,
        null_within_roundoff: nu <= 1e-12 && nth <= 1e-12 && nphi <= 1e-12,
        epsilon,
        diff_initial_lyapunov: diff0,
        diff_max_lyapunov: diff_max,
        diff_max_ratio,
        diff_bounded: diff_max <= diff0 * (1.0 + DECAY_TOLERANCE) || (diff0 == 0.0 && diff_max == 0.0),
    })
}

/// Admissibility gate used by the command-line front end before simulating.
pub fn admissibility_gate(material: &IsoMaterial) -> AdmissibilityReport {
    check_isotropic(material, DEFAULT_EIGEN_TOL)
}
