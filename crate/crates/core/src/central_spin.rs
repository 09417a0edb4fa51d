//! Central-spin model and its effective single-qubit generator.
//!
//! The full model couples a central qubit (tensor factor 0) to `N`
//! auxiliary qubits (factors `1..=N`) through `H = Σ_n σ⁰·(J_n σⁿ)`, with
//! each auxiliary qubit damped at strength `Γ` by its own dissipative mode.
//!
//! Adiabatic elimination of the auxiliary qubits is carried out two ways:
//!
//! - [`Route::General`] evaluates the elimination sums literally: the
//!   `g` operators are partial traces of `(I ⊗ Ψ_K) H` over every
//!   multi-index `K`, the coefficient matrix `C = Tr(Φ_K† Φ_K' Ψ₀)` is
//!   built from the per-mode bases, and `Y = −C/Ξ*` yields the Lamb-shift
//!   (`B`) and dissipator (`A`) weights.
//! - [`Route::Closed`] uses the closed forms `h_D = Σ_n μ_n (J_n v_n)·σ` and
//!   the three per-qubit channels `(2(1+μ), g₁)`, `(2(1−μ), g₁†)`,
//!   `((1−μ²)/2, g₃)`.
//!
//! The dissipative part of the effective generator carries the `1/Γ`
//! weight, so the effective steady state depends on `Γ`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

use crate::dissipation::{DissipativeMode, XI};
use crate::error::{Error, Result};
use crate::qcore::{
    self, c, cross_dissipator_superop, embed, hamiltonian_superop, kron, lindblad_superop,
    partial_trace, pauli, pauli_dot, CMat, DensityMatrix, PauliTransfer, SuperOp, C64,
};

/// Largest auxiliary count the dense full-model solver accepts by default.
pub const DEFAULT_FULL_CAP: usize = 4;
/// Dual-route disagreement that is reported as [`Error::RouteMismatch`].
pub const ROUTE_TOL: f64 = 1e-8;

/// Real 3×3 exchange matrix `J_n`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix(pub [[f64; 3]; 3]);

impl CouplingMatrix {
    pub fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub fn diag(d: [f64; 3]) -> Self {
        Self([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn from_row_major(v: &[f64]) -> Result<Self> {
        if v.len() != 9 {
            return Err(Error::InvalidParameter(format!(
                "coupling matrix needs 9 entries, got {}",
                v.len()
            )));
        }
        let m = Self([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]);
        if !m.is_finite() {
            return Err(Error::InvalidParameter("non-finite coupling entry".into()));
        }
        Ok(m)
    }

    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|a| m[a][0] * v[0] + m[a][1] * v[1] + m[a][2] * v[2])
    }

    pub fn apply_complex(&self, v: [C64; 3]) -> [C64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|a| v[0] * m[a][0] + v[1] * m[a][1] + v[2] * m[a][2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    couplings: Vec<CouplingMatrix>,
    modes: Vec<DissipativeMode>,
    gamma: f64,
}

impl ModelConfig {
    pub fn new(couplings: Vec<CouplingMatrix>, modes: Vec<DissipativeMode>, gamma: f64) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidParameter("need at least one auxiliary qubit".into()));
        }
        if couplings.len() != modes.len() {
            return Err(Error::LengthMismatch(couplings.len(), modes.len()));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        if let Some(n) = couplings.iter().position(|j| !j.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling {n} has a non-finite entry")));
        }
        Ok(Self { couplings, modes, gamma })
    }

    /// Random couplings (entries `N(0, 0.5²)`), uniform mode angles and
    /// uniform `μ ∈ [−1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_aux: usize, gamma: f64) -> Result<Self> {
        let normal = Normal::new(0.0, 0.5).expect("valid normal");
        let couplings = (0..n_aux)
            .map(|_| CouplingMatrix([[0; 3]; 3].map(|row| row.map(|_: i32| normal.sample(rng)))))
            .collect();
        let modes = (0..n_aux)
            .map(|_| {
                DissipativeMode::new(
                    rng.random_range(0.0..PI),
                    rng.random_range(0.0..2.0 * PI),
                    rng.random_range(-1.0..=1.0),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(couplings, modes, gamma)
    }

    /// [`ModelConfig::random`] driven by a ChaCha8 generator seeded with `seed`.
    pub fn seeded(n_aux: usize, gamma: f64, seed: u64) -> Result<Self> {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed), n_aux, gamma)
    }

    pub fn n_aux(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[CouplingMatrix] {
        &self.couplings
    }

    pub fn modes(&self) -> &[DissipativeMode] {
        &self.modes
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.couplings.clone(), self.modes.clone(), gamma)
    }

    pub fn with_modes(&self, modes: Vec<DissipativeMode>) -> Result<Self> {
        Self::new(self.couplings.clone(), modes, self.gamma)
    }

    pub fn with_couplings(&self, couplings: Vec<CouplingMatrix>) -> Result<Self> {
        Self::new(couplings, self.modes.clone(), self.gamma)
    }
}

/// `H = Σ_n Σ_ab J_n[a][b] σ_a⁰ σ_bⁿ` on `N + 1` qubits.
pub fn build_hamiltonian(cfg: &ModelConfig) -> CMat {
    let sites = cfg.n_aux() + 1;
    let dim = 1 << sites;
    let central: Vec<CMat> = (0..3).map(|a| embed(&pauli(a), 0, sites)).collect();
    let mut h = CMat::zeros(dim, dim);
    for (n, j) in cfg.couplings.iter().enumerate() {
        for b in 0..3 {
            let aux = embed(&pauli(b), n + 1, sites);
            for (a, s0) in central.iter().enumerate() {
                let w = j.0[a][b];
                if w != 0.0 {
                    h += s0 * &aux * c(w, 0.0);
                }
            }
        }
    }
    h
}

pub fn build_full_liouvillian(cfg: &ModelConfig) -> Result<SuperOp> {
    build_full_liouvillian_capped(cfg, DEFAULT_FULL_CAP)
}

/// `−i[H, ·] + Γ Σ_n Σ_α D_{L_n^α}` on the full register.
pub fn build_full_liouvillian_capped(cfg: &ModelConfig, cap: usize) -> Result<SuperOp> {
    let n = cfg.n_aux();
    if n > cap {
        return Err(Error::ModelTooLarge { n, cap });
    }
    let h = build_hamiltonian(cfg);
    let mut jumps = Vec::with_capacity(2 * n);
    for (k, mode) in cfg.modes.iter().enumerate() {
        for l in mode.lindblad_ops() {
            jumps.push((cfg.gamma, embed(&l, k + 1, n + 1)));
        }
    }
    lindblad_superop(&h, &jumps)
}

/// Closed forms `(g₀, g₁, g₂, g₃)` for auxiliary qubit `n`:
/// `g₀ = μ(Jv)·σ`, `g₁ = (Jv′)·σ − i(Jv″)·σ`, `g₂ = g₁†`, `g₃ = 2(Jv)·σ`.
pub fn g_operators_closed(cfg: &ModelConfig, n: usize) -> [CMat; 4] {
    let w = closed_weights(&cfg.couplings[n], &cfg.modes[n]);
    w.map(|wk| pauli_dot(&wk))
}

/// Pauli weights of the four closed-form `g` operators of one qubit.
fn closed_weights(j: &CouplingMatrix, mode: &DissipativeMode) -> [[C64; 3]; 4] {
    let [v, vp, vpp] = mode.bloch_frame();
    let jv = j.apply(v);
    let jvp = j.apply(vp);
    let jvpp = j.apply(vpp);
    let g1 = [0, 1, 2].map(|a| C64::new(jvp[a], -jvpp[a]));
    [
        jv.map(|x| C64::new(mode.mu() * x, 0.0)),
        g1,
        g1.map(|z| z.conj()),
        jv.map(|x| C64::new(2.0 * x, 0.0)),
    ]
}

/// Multi-index `K = (k_1, …, k_N)`, each `k_n ∈ 0..4`, enumerated with
/// qubit 1 as the most significant base-4 digit.
pub fn multi_index(n_aux: usize, pos: usize) -> Vec<usize> {
    (0..n_aux).map(|q| (pos >> (2 * (n_aux - 1 - q))) & 3).collect()
}

/// `g_K = Tr_{0̄}((I ⊗ Ψ_K) H)` evaluated on the full register.
pub fn g_operators_general(cfg: &ModelConfig, index: &[usize]) -> Result<CMat> {
    let h = build_hamiltonian(cfg);
    let bases: Vec<_> = cfg.modes.iter().map(|m| m.eigensystem()).collect();
    g_general_with(cfg, &h, &bases, index)
}

fn g_general_with(
    cfg: &ModelConfig,
    h: &CMat,
    bases: &[crate::dissipation::ModeEigensystem],
    index: &[usize],
) -> Result<CMat> {
    let n = cfg.n_aux();
    if index.len() != n || index.iter().any(|&k| k > 3) {
        return Err(Error::InvalidParameter(format!("invalid multi-index {index:?} for N={n}")));
    }
    let mut op = qcore::identity(2);
    for (q, &k) in index.iter().enumerate() {
        op = kron(&op, &bases[q].psi[k]);
    }
    let dims = vec![2; n + 1];
    partial_trace(&(op * h), &dims, 0)
}

/// Elimination coefficients over all `4^N` multi-indices.
#[derive(Debug, Clone)]
pub struct CoefficientTables {
    pub n_aux: usize,
    /// Eigenvalue `Ξ_K = Σ_n ξ_{k_n}` per multi-index position.
    pub xi: Vec<f64>,
    /// `C_{K,K'} = Tr(Φ_K† Φ_K' Ψ₀)` over all positions.
    pub c: DMatrix<C64>,
    /// Positions with `Re Ξ < 0` (every position except the all-zero one).
    pub retained: Vec<usize>,
    /// `Y = −C/Ξ*`, `A = Y + Y*` and `B = (Y − Y*)/(2i)` over `retained`.
    pub y: DMatrix<C64>,
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
    /// `g_K` per position.
    pub g_ops: Vec<CMat>,
}

impl CoefficientTables {
    pub fn position(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &k| acc * 4 + k)
    }

    pub fn c_at(&self, k: &[usize], kp: &[usize]) -> C64 {
        self.c[(self.position(k), self.position(kp))]
    }

    fn retained_slot(&self, pos: usize) -> Option<usize> {
        self.retained.iter().position(|&p| p == pos)
    }

    pub fn a_at(&self, k: &[usize], kp: &[usize]) -> Option<C64> {
        let (i, j) = (self.retained_slot(self.position(k))?, self.retained_slot(self.position(kp))?);
        Some(self.a[(i, j)])
    }

    pub fn b_at(&self, k: &[usize], kp: &[usize]) -> Option<C64> {
        let (i, j) = (self.retained_slot(self.position(k))?, self.retained_slot(self.position(kp))?);
        Some(self.b[(i, j)])
    }
}

pub fn coefficient_tables(cfg: &ModelConfig) -> Result<CoefficientTables> {
    let n = cfg.n_aux();
    let size = 1usize << (2 * n);
    let bases: Vec<_> = cfg.modes.iter().map(|m| m.eigensystem()).collect();

    // Per-qubit factors Tr(φ_k† φ_k' ψ₀); the trace of a tensor product is
    // the product of the factor traces.
    let local: Vec<[[C64; 4]; 4]> = bases
        .iter()
        .map(|e| {
            let mut t = [[C64::new(0.0, 0.0); 4]; 4];
            for (k, row) in t.iter_mut().enumerate() {
                for (kp, v) in row.iter_mut().enumerate() {
                    *v = (e.phi_comp[k].adjoint() * &e.phi_comp[kp] * &e.psi[0]).trace();
                }
            }
            t
        })
        .collect();
    let indices: Vec<Vec<usize>> = (0..size).map(|p| multi_index(n, p)).collect();
    let xi: Vec<f64> = indices.iter().map(|k| k.iter().map(|&q| XI[q]).sum()).collect();
    let c_mat = DMatrix::from_fn(size, size, |i, j| {
        indices[i]
            .iter()
            .zip(&indices[j])
            .enumerate()
            .map(|(q, (&k, &kp))| local[q][k][kp])
            .product::<C64>()
    });

    let retained: Vec<usize> = (0..size).filter(|&p| xi[p] < 0.0).collect();
    let r = retained.len();
    let y = DMatrix::from_fn(r, r, |i, j| {
        let (p, q) = (retained[i], retained[j]);
        -c_mat[(p, q)] / C64::new(xi[p], 0.0).conj()
    });
    let a = DMatrix::from_fn(r, r, |i, j| y[(i, j)] + y[(i, j)].conj());
    let b = DMatrix::from_fn(r, r, |i, j| (y[(i, j)] - y[(i, j)].conj()) / C64::new(0.0, 2.0));

    let h = build_hamiltonian(cfg);
    let g_ops = indices
        .iter()
        .map(|k| g_general_with(cfg, &h, &bases, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTables { n_aux: n, xi, c: c_mat, retained, y, a, b, g_ops })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Literal adiabatic-elimination sums, cross-checked against [`Route::Closed`].
    General,
    #[default]
    Closed,
}

/// Effective central-qubit generator `−i[h_D + h_a/Γ, ·] + (1/Γ) D̃`.
#[derive(Debug, Clone)]
pub struct EffectiveGenerator {
    pub h_d: CMat,
    /// Second-order Hamiltonian correction `H̃_a`; vanishes for this model.
    pub h_a: CMat,
    /// Jump channels of `D̃` as `(rate, operator)`, before the `1/Γ` weight.
    pub channels: Vec<(f64, CMat)>,
    pub gamma: f64,
    pub superop: SuperOp,
}

pub fn effective_generator(cfg: &ModelConfig, route: Route) -> Result<EffectiveGenerator> {
    match route {
        Route::Closed => closed_generator(cfg),
        Route::General => {
            let general = general_generator(cfg)?;
            let closed = closed_generator(cfg)?;
            let diff = max_abs(&(general.superop.mat() - closed.superop.mat()));
            if diff > ROUTE_TOL {
                return Err(Error::RouteMismatch(diff));
            }
            Ok(general)
        }
    }
}

fn closed_generator(cfg: &ModelConfig) -> Result<EffectiveGenerator> {
    let mut h_d = CMat::zeros(2, 2);
    let mut channels = Vec::with_capacity(3 * cfg.n_aux());
    for n in 0..cfg.n_aux() {
        let mu = cfg.modes[n].mu();
        let [g0, g1, _, g3] = g_operators_closed(cfg, n);
        h_d += g0;
        let g1d = g1.adjoint();
        for (rate, op) in [(2.0 * (1.0 + mu), g1), (2.0 * (1.0 - mu), g1d), ((1.0 - mu * mu) / 2.0, g3)] {
            if rate > 0.0 {
                channels.push((rate, op));
            }
        }
    }
    let weighted: Vec<(f64, CMat)> =
        channels.iter().map(|(r, l)| (r / cfg.gamma, l.clone())).collect();
    let superop = lindblad_superop(&qcore::hermitize(&h_d), &weighted)?;
    Ok(EffectiveGenerator { h_d, h_a: CMat::zeros(2, 2), channels, gamma: cfg.gamma, superop })
}

fn general_generator(cfg: &ModelConfig) -> Result<EffectiveGenerator> {
    let t = coefficient_tables(cfg)?;
    let h_d = t.g_ops[0].clone();
    let mut h_a = CMat::zeros(2, 2);
    let mut diss = SuperOp::zero(2);
    for (i, &p) in t.retained.iter().enumerate() {
        for (j, &q) in t.retained.iter().enumerate() {
            let (a, b) = (t.a[(i, j)], t.b[(i, j)]);
            if a == C64::new(0.0, 0.0) && b == C64::new(0.0, 0.0) {
                continue;
            }
            let (gk, gkp) = (&t.g_ops[p], &t.g_ops[q]);
            h_a += gk.adjoint() * gkp * b;
            let term = cross_dissipator_superop(gkp, gk);
            diss = SuperOp::from_mat(2, diss.mat() + term.mat() * a)?;
        }
    }
    let inv_gamma = C64::new(1.0 / cfg.gamma, 0.0);
    let mat = hamiltonian_superop(&(&h_d + &h_a * inv_gamma)).mat() + diss.mat() * inv_gamma;
    let superop = SuperOp::from_mat(2, mat)?;
    let channels = diagonal_channels(&t)?;
    Ok(EffectiveGenerator { h_d, h_a, channels, gamma: cfg.gamma, superop })
}

/// Diagonalize `A` (Hermitian, positive) into independent jump channels
/// `L_j = Σ_K conj(u_j[K]) g_K` with rates `a_j`.
fn diagonal_channels(t: &CoefficientTables) -> Result<Vec<(f64, CMat)>> {
    let herm = (&t.a + t.a.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let scale = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let mut channels = Vec::new();
    for (j, &rate) in eig.eigenvalues.iter().enumerate() {
        if rate < -1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "coefficient matrix A is not positive (eigenvalue {rate:e})"
            )));
        }
        if rate <= 1e-14 * scale {
            continue;
        }
        let mut op = CMat::zeros(2, 2);
        for (i, &p) in t.retained.iter().enumerate() {
            op += &t.g_ops[p] * eig.eigenvectors[(i, j)].conj();
        }
        if max_abs(&op) > 0.0 {
            channels.push((rate, op));
        }
    }
    Ok(channels)
}

/// Steady state of the effective generator and its spectral gap.
pub fn central_steady_state(cfg: &ModelConfig, route: Route) -> Result<(DensityMatrix, f64)> {
    let g = effective_generator(cfg, route)?;
    qcore::steady_state(&g.superop)
}

/// Bloch-equation form `ṙ = M r + b` of the closed-route effective
/// generator, assembled directly from the Pauli weights of `h_D` and the
/// jump operators. For a channel `L = w·σ` at rate `γ`:
/// `M += 2γ (Re(w̄ wᵀ) − |w|² I)` and `b −= 2γ Re(i w̄ × w)`; the drift
/// `h·σ` adds `2 h×r`.
pub fn bloch_generator(cfg: &ModelConfig) -> PauliTransfer {
    bloch_generator_from(&cfg.couplings, &cfg.modes, cfg.gamma)
}

/// [`bloch_generator`] over borrowed parts, for callers that swap modes or
/// couplings per evaluation without building a [`ModelConfig`].
pub fn bloch_generator_from(
    couplings: &[CouplingMatrix],
    modes: &[DissipativeMode],
    gamma: f64,
) -> PauliTransfer {
    let mut block = Matrix3::zeros();
    let mut drive = Vector3::zeros();
    let mut h = Vector3::zeros();
    let inv_gamma = 1.0 / gamma;
    for (j, mode) in couplings.iter().zip(modes) {
        let mu = mode.mu();
        let [g0, g1, g2, g3] = closed_weights(j, mode);
        h += Vector3::new(g0[0].re, g0[1].re, g0[2].re);
        let rates = [2.0 * (1.0 + mu), 2.0 * (1.0 - mu), (1.0 - mu * mu) / 2.0];
        for (rate, w) in rates.into_iter().zip([g1, g2, g3]) {
            if rate == 0.0 {
                continue;
            }
            let weight = rate * inv_gamma;
            let norm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            for a in 0..3 {
                for b in 0..3 {
                    block[(a, b)] += 2.0 * weight * (w[a].conj() * w[b]).re;
                }
                block[(a, a)] -= 2.0 * weight * norm2;
            }
            let cross = [
                w[1].conj() * w[2] - w[2].conj() * w[1],
                w[2].conj() * w[0] - w[0].conj() * w[2],
                w[0].conj() * w[1] - w[1].conj() * w[0],
            ];
            for a in 0..3 {
                drive[a] -= 2.0 * weight * (C64::new(0.0, 1.0) * cross[a]).re;
            }
        }
    }
    block += Matrix3::new(0.0, -h[2], h[1], h[2], 0.0, -h[0], -h[1], h[0], 0.0) * 2.0;
    PauliTransfer { block, drive }
}

/// Steady-state Bloch vector of the central qubit with the spectral gap;
/// the allocation-free path used by the trainers.
pub fn central_bloch(cfg: &ModelConfig) -> Result<([f64; 3], f64)> {
    bloch_generator(cfg).steady_bloch()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub gamma: f64,
    /// `½‖ρ_full − ρ_eff‖₁` for the central qubit.
    pub trace_distance: f64,
    /// Trace distance of each auxiliary marginal from its `ψ₀`.
    pub aux_distances: Vec<f64>,
}

/// Compare the full-model steady state against the effective one over a
/// list of dissipation strengths.
pub fn validate_effective(cfg: &ModelConfig, gammas: &[f64]) -> Result<Vec<ValidationRow>> {
    validate_effective_capped(cfg, gammas, DEFAULT_FULL_CAP)
}

pub fn validate_effective_capped(
    cfg: &ModelConfig,
    gammas: &[f64],
    cap: usize,
) -> Result<Vec<ValidationRow>> {
    let n = cfg.n_aux();
    if n > cap {
        return Err(Error::ModelTooLarge { n, cap });
    }
    let dims = vec![2; n + 1];
    gammas
        .iter()
        .map(|&gamma| {
            let cfg_g = cfg.with_gamma(gamma)?;
            let (full, _) = qcore::steady_state(&build_full_liouvillian_capped(&cfg_g, cap)?)?;
            let central = DensityMatrix::new(partial_trace(full.as_mat(), &dims, 0)?)?;
            let (eff, _) = central_steady_state(&cfg_g, Route::Closed)?;
            let aux_distances = cfg_g
                .modes
                .iter()
                .enumerate()
                .map(|(k, mode)| {
                    let marginal = DensityMatrix::new(partial_trace(full.as_mat(), &dims, k + 1)?)?;
                    Ok(marginal.trace_distance(&DensityMatrix::new_unchecked(mode.stationary_state())))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ValidationRow { gamma, trace_distance: central.trace_distance(&eff), aux_distances })
        })
        .collect()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
