//! Engineered dissipative modes on the auxiliary qubits.
//!
//! A mode is fixed by a Bloch direction `(θ, φ)` and an asymmetry `μ`. Its
//! two jump operators pump population between `|s⟩` and `|s⊥⟩` with rates
//! `(1+μ)/2` into `|s⟩` and `(1−μ)/2` out of it, so the unique stationary
//! state is `ψ₀ = (I + μ v·σ)/2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::{self, c, ket_bra, CMat, CVec, SuperOp, C64};

/// Single-qubit dissipator eigenvalues `ξ_k` at unit strength.
pub const XI: [f64; 4] = [0.0, -0.5, -0.5, -1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativeMode {
    theta: f64,
    phi: f64,
    mu: f64,
}

impl DissipativeMode {
    /// Angles are wrapped onto `θ ∈ [0, π]`, `φ ∈ [0, 2π)`; the state
    /// `|s(θ, φ)⟩` is periodic up to a global phase so nothing physical
    /// changes. `μ` must lie in `[−1, 1]`.
    pub fn new(theta: f64, phi: f64, mu: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite mode angle ({theta}, {phi})")));
        }
        if !(-1.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mu must lie in [-1, 1], got {mu}")));
        }
        let (theta, phi) = wrap_angles(theta, phi);
        Ok(Self { theta, phi, mu })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn with_angles(&self, theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi, self.mu)
    }

    /// `(|s⟩, |s⊥⟩)`.
    pub fn kets(&self) -> (CVec, CVec) {
        let [s, sp] = self.ket_arrays();
        (CVec::from_column_slice(&s), CVec::from_column_slice(&sp))
    }

    pub(crate) fn ket_arrays(&self) -> [[C64; 2]; 2] {
        let (ch, sh) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let em = C64::from_polar(1.0, -self.phi / 2.0);
        let ep = C64::from_polar(1.0, self.phi / 2.0);
        [[em * ch, ep * sh], [em * sh, -ep * ch]]
    }

    /// Orthonormal frame `(v, v′, v″)` with `v′ = v(π/2−θ, φ+π)` and
    /// `v″ = v(π/2, φ+π/2)`.
    pub fn bloch_frame(&self) -> [[f64; 3]; 3] {
        [
            bloch_direction(self.theta, self.phi),
            bloch_direction(PI / 2.0 - self.theta, self.phi + PI),
            bloch_direction(PI / 2.0, self.phi + PI / 2.0),
        ]
    }

    /// `[√((1+μ)/2)|s⟩⟨s⊥|, √((1−μ)/2)|s⊥⟩⟨s|]`, weights folded in.
    pub fn lindblad_ops(&self) -> [CMat; 2] {
        let (s, sp) = self.kets();
        let w1 = ((1.0 + self.mu) / 2.0).sqrt();
        let w2 = ((1.0 - self.mu) / 2.0).sqrt();
        [ket_bra(&s, &sp) * c(w1, 0.0), ket_bra(&sp, &s) * c(w2, 0.0)]
    }

    /// Dissipator `Σ_α D_{L^α}` at unit strength.
    pub fn dissipator(&self) -> SuperOp {
        let [l1, l2] = self.lindblad_ops();
        qcore::lindblad_superop(&CMat::zeros(2, 2), &[(1.0, l1), (1.0, l2)])
            .expect("zero hamiltonian and unit rates are valid")
    }

    /// `ψ₀ = (1+μ)/2 |s⟩⟨s| + (1−μ)/2 |s⊥⟩⟨s⊥|`.
    pub fn stationary_state(&self) -> CMat {
        let (s, sp) = self.kets();
        ket_bra(&s, &s) * c((1.0 + self.mu) / 2.0, 0.0)
            + ket_bra(&sp, &sp) * c((1.0 - self.mu) / 2.0, 0.0)
    }

    pub fn eigensystem(&self) -> ModeEigensystem {
        let (s, sp) = self.kets();
        let ss = ket_bra(&s, &s);
        let pp = ket_bra(&sp, &sp);
        let sx = ket_bra(&s, &sp);
        let xs = ket_bra(&sp, &s);
        let (plus, minus) = ((1.0 + self.mu) / 2.0, (1.0 - self.mu) / 2.0);
        ModeEigensystem {
            psi: [
                &ss * c(plus, 0.0) + &pp * c(minus, 0.0),
                sx.clone(),
                xs.clone(),
                &ss - &pp,
            ],
            phi_comp: [
                qcore::identity(2),
                xs,
                sx,
                &ss * c(minus, 0.0) - &pp * c(plus, 0.0),
            ],
            xi: XI,
        }
    }
}

/// Right eigenbasis `ψ_k` of a mode dissipator with its biorthogonal
/// complement `φ_k` (`Tr(ψ_l φ_k) = δ_lk`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEigensystem {
    pub psi: [CMat; 4],
    pub phi_comp: [CMat; 4],
    pub xi: [f64; 4],
}

impl ModeEigensystem {
    /// `[Tr(ψ_l φ_k)]_{lk}`.
    pub fn overlap_matrix(&self) -> [[C64; 4]; 4] {
        let mut out = [[C64::new(0.0, 0.0); 4]; 4];
        for (l, p) in self.psi.iter().enumerate() {
            for (k, f) in self.phi_comp.iter().enumerate() {
                out[l][k] = (p * f).trace();
            }
        }
        out
    }
}

/// `v(θ, φ) = (sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn bloch_direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn wrap_angles(theta: f64, phi: f64) -> (f64, f64) {
    let two_pi = 2.0 * PI;
    let mut theta = theta.rem_euclid(two_pi);
    let mut phi = phi;
    if theta > PI {
        // v(θ, φ) = v(2π − θ, φ + π)
        theta = two_pi - theta;
        phi += PI;
    }
    let mut phi = phi.rem_euclid(two_pi);
    if phi >= two_pi {
        phi = 0.0;
    }
    (theta, phi)
}
