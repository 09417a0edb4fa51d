//! Dense complex linear algebra and Lindblad-generator primitives.
//!
//! Operators are `nalgebra` dense matrices over `Complex64`. Superoperators
//! act on column-stacked vectorizations, `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, and
//! multi-qubit tensor products put factor 0 in the most significant position.

use nalgebra::{DMatrix, DVector, Matrix3, Schur, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalue magnitude below which a Liouvillian mode counts as stationary.
pub const NULL_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Pauli matrix `σ_a` for `a ∈ {0: x, 1: y, 2: z}`.
pub fn pauli(a: usize) -> CMat {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match a {
        0 => CMat::from_row_slice(2, 2, &[o, l, l, o]),
        1 => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        2 => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("pauli index {a} out of range"),
    }
}

/// `|a⟩⟨b|` for column vectors `a`, `b`.
pub fn ket_bra(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// `Σ_a w_a σ_a` for a complex 3-vector `w`.
pub fn pauli_dot(w: &[C64; 3]) -> CMat {
    pauli(0) * w[0] + pauli(1) * w[1] + pauli(2) * w[2]
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Place `op` on factor `site` of an `n_sites`-qubit register.
pub fn embed(op: &CMat, site: usize, n_sites: usize) -> CMat {
    let mut out = if site == 0 { op.clone() } else { identity(2) };
    for k in 1..n_sites {
        out = if k == site { kron(&out, op) } else { kron(&out, &identity(2)) };
    }
    out
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Reduce `m` onto subsystem `keep` of the tensor product described by `dims`.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: usize) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, subsystems multiply to {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    if keep >= dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem {keep} out of range for {} factors",
            dims.len()
        )));
    }
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let dk = dims[keep];
    let env = total / dk;
    // Flat offsets of every environment configuration.
    let offsets: Vec<usize> = (0..env)
        .map(|mut e| {
            let mut off = 0;
            for k in (0..dims.len()).rev() {
                if k == keep {
                    continue;
                }
                off += (e % dims[k]) * strides[k];
                e /= dims[k];
            }
            off
        })
        .collect();
    let sk = strides[keep];
    Ok(CMat::from_fn(dk, dk, |i, j| {
        offsets.iter().map(|&o| m[(o + i * sk, o + j * sk)]).sum()
    }))
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMat) -> CVec {
    // nalgebra storage is column-major, so the raw slice is already vec(m).
    CVec::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &CVec, d: usize) -> Result<CMat> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be a {d}x{d} operator",
            v.len()
        )));
    }
    Ok(CMat::from_column_slice(d, d, v.as_slice()))
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Validate `mat` against the density-matrix invariants.
    pub fn new(mat: CMat) -> Result<Self> {
        let rho = Self { mat };
        rho.check(HERMITIAN_TOL, TRACE_TOL, PSD_TOL)?;
        Ok(rho)
    }

    /// Wrap without validation. Callers must uphold the invariants.
    pub fn new_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    pub fn check(&self, herm_tol: f64, trace_tol: f64, psd_tol: f64) -> Result<()> {
        let d = self.mat.nrows();
        if !self.mat.is_square() || d == 0 || !d.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square with power-of-two dimension, got {}x{}",
                self.mat.nrows(),
                self.mat.ncols()
            )));
        }
        if self.mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite density matrix entry".into()));
        }
        let h = hermitian_defect(&self.mat);
        if h > herm_tol {
            return Err(Error::InvalidParameter(format!("density matrix not hermitian ({h:e})")));
        }
        let tr = self.mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -psd_tol {
            return Err(Error::InvalidParameter(format!(
                "density matrix not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    pub fn pure(ket: &CVec) -> Result<Self> {
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let k = ket / C64::new(n, 0.0);
        Self::new(ket_bra(&k, &k))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { mat: identity(d) / C64::new(d as f64, 0.0) }
    }

    /// Single-qubit state `(I + r·σ)/2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !len.is_finite() || len > 1.0 + PSD_TOL {
            return Err(Error::InvalidParameter(format!("bloch vector length {len} exceeds 1")));
        }
        Ok(Self { mat: bloch_to_mat(r) })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, op: &CMat) -> C64 {
        (&self.mat * op).trace()
    }

    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` of a single-qubit state.
    pub fn bloch(&self) -> [f64; 3] {
        bloch_of(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitize(&self.mat)
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = hermitize(&(&self.mat - &other.mat));
        0.5 * diff.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
    }
}

pub fn bloch_of(m: &CMat) -> [f64; 3] {
    [0, 1, 2].map(|a| (m * pauli(a)).trace().re)
}

pub fn bloch_to_mat(r: [f64; 3]) -> CMat {
    let w = r.map(|x| C64::new(x, 0.0));
    (identity(2) + pauli_dot(&w)) * C64::new(0.5, 0.0)
}

/// Linear map on `d×d` operators, stored as a `d²×d²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOp {
    dim: usize,
    mat: CMat,
}

impl SuperOp {
    pub fn from_mat(dim: usize, mat: CMat) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on dimension {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        Ok(Self { dim, mat })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, mat: CMat::zeros(dim * dim, dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let v = &self.mat * vectorize(x);
        CMat::from_column_slice(self.dim, self.dim, v.as_slice())
    }

    pub fn add_scaled(&mut self, other: &SuperOp, s: f64) {
        self.mat += &other.mat * C64::new(s, 0.0);
    }

    /// Largest entry of `vec(I)† · mat`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| (0..d).map(|i| self.mat[(i + i * d, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// `X ↦ −i[H, X]`.
pub fn hamiltonian_superop(h: &CMat) -> SuperOp {
    let d = h.nrows();
    let id = identity(d);
    let m = (kron(&id, h) - kron(&h.transpose(), &id)) * C64::new(0.0, -1.0);
    SuperOp { dim: d, mat: m }
}

/// `X ↦ L X L† − ½{L†L, X}`.
pub fn dissipator_superop(l: &CMat) -> SuperOp {
    cross_dissipator_superop(l, l)
}

/// `X ↦ a X b† − ½{b†a, X}`, the off-diagonal Lindblad term used by the
/// adiabatic-elimination sums. Reduces to [`dissipator_superop`] when `a = b`.
pub fn cross_dissipator_superop(a: &CMat, b: &CMat) -> SuperOp {
    let d = a.nrows();
    let id = identity(d);
    let bda = b.adjoint() * a;
    let half = C64::new(0.5, 0.0);
    let m = kron(&b.conjugate(), a) - (kron(&id, &bda) + kron(&bda.transpose(), &id)) * half;
    SuperOp { dim: d, mat: m }
}

/// Generator of `ρ̇ = −i[H,ρ] + Σ rate·(LρL† − ½{L†L,ρ})`.
pub fn lindblad_superop(h: &CMat, jumps: &[(f64, CMat)]) -> Result<SuperOp> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("hamiltonian must be square".into()));
    }
    let defect = hermitian_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitianHamiltonian(defect));
    }
    let mut g = hamiltonian_superop(h);
    for (rate, l) in jumps {
        if *rate < 0.0 || rate.is_nan() {
            return Err(Error::NegativeRate(*rate));
        }
        if l.shape() != h.shape() {
            return Err(Error::DimensionMismatch(format!(
                "jump operator {:?} vs hamiltonian {:?}",
                l.shape(),
                h.shape()
            )));
        }
        if *rate > 0.0 {
            g.add_scaled(&dissipator_superop(l), *rate);
        }
    }
    Ok(g)
}

/// Spectrum of a superoperator (all `d²` eigenvalues, unordered).
pub fn spectrum(g: &SuperOp) -> Result<Vec<C64>> {
    if g.dim == 2 {
        if let Some(ptm) = PauliTransfer::try_from_superop(g) {
            return Ok(ptm.spectrum());
        }
    }
    let n = g.mat.nrows();
    let schur = Schur::try_new(g.mat.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::EigenSolverFailed)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Classify a Liouvillian spectrum: returns the gap or the matching error.
///
/// The stationary eigenvalue is the one of smallest modulus; it must be
/// `≤ NULL_TOL`, and the next smallest must exceed `NULL_TOL`. The gap is
/// the smallest `|Re λ|` over the remaining eigenvalues.
pub fn classify_spectrum(eigs: &[C64]) -> Result<f64> {
    let mut sorted: Vec<C64> = eigs.to_vec();
    sorted.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let first = sorted.first().map(|z| z.norm()).unwrap_or(f64::INFINITY);
    if !(first <= NULL_TOL) {
        return Err(Error::NoSteadyState(first));
    }
    if let Some(second) = sorted.get(1) {
        if second.norm() < NULL_TOL {
            return Err(Error::DegenerateSteadyState(second.norm()));
        }
    }
    Ok(sorted[1..].iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min))
}

/// Unique stationary state of a Lindblad generator and its spectral gap.
pub fn steady_state(g: &SuperOp) -> Result<(DensityMatrix, f64)> {
    if g.dim == 2 {
        if let Some(ptm) = PauliTransfer::try_from_superop(g) {
            let (r, gap) = ptm.steady_bloch()?;
            return Ok((DensityMatrix::new(bloch_to_mat(r))?, gap));
        }
    }
    steady_state_dense(g)
}

/// Dense route valid for any dimension: Schur spectrum for the uniqueness
/// test, then the null vector from an LU solve in which one redundant row
/// of the generator is replaced by the trace functional.
pub fn steady_state_dense(g: &SuperOp) -> Result<(DensityMatrix, f64)> {
    let gap = classify_spectrum(&spectrum(g)?)?;
    let d = g.dim;
    let mut a = g.mat.clone();
    // Rows (i,i) sum to zero for a trace-preserving map, so row (0,0) is redundant.
    for col in 0..d * d {
        a[(0, col)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i + i * d)] = C64::new(1.0, 0.0);
    }
    let mut rhs = CVec::zeros(d * d);
    rhs[0] = C64::new(1.0, 0.0);
    let v = a.lu().solve(&rhs).ok_or(Error::DegenerateSteadyState(0.0))?;
    let rho = hermitize(&devectorize(&v, d)?);
    let tr = rho.trace();
    let rho = rho / tr;
    Ok((DensityMatrix::new(rho)?, gap))
}

/// `ρ(t) = devec(exp(g t) vec(ρ₀))`.
pub fn propagate(g: &SuperOp, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("propagation time must be >= 0, got {t}")));
    }
    if rho0.dim() != g.dim {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs generator dimension {}",
            rho0.dim(),
            g.dim
        )));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let u = (&g.mat * C64::new(t, 0.0)).exp();
    let v = u * vectorize(rho0.as_mat());
    Ok(DensityMatrix::new_unchecked(devectorize(&v, g.dim)?))
}

/// Real 4×4 representation `R_ab = ½ Tr(σ_a G(σ_b))` of a single-qubit
/// superoperator in the basis `(I, σx, σy, σz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransfer {
    /// Bloch-block `R_ab`, `a, b ∈ {x,y,z}`.
    pub block: Matrix3<f64>,
    /// Affine drive `R_a0`.
    pub drive: Vector3<f64>,
}

impl PauliTransfer {
    /// Returns `None` unless the map is trace preserving and Hermiticity
    /// preserving to within `NULL_TOL`.
    pub fn try_from_superop(g: &SuperOp) -> Option<Self> {
        if g.dim != 2 {
            return None;
        }
        let basis = [identity(2), pauli(0), pauli(1), pauli(2)];
        let mut r = [[C64::new(0.0, 0.0); 4]; 4];
        for (b, sb) in basis.iter().enumerate() {
            let img = g.apply(sb);
            for (a, sa) in basis.iter().enumerate() {
                r[a][b] = (sa * &img).trace() * 0.5;
            }
        }
        let row0 = r[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let imag = r.iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max);
        if row0 > NULL_TOL || imag > NULL_TOL {
            return None;
        }
        Some(Self {
            block: Matrix3::from_fn(|a, b| r[a + 1][b + 1].re),
            drive: Vector3::from_fn(|a, _| r[a + 1][0].re),
        })
    }

    /// Eigenvalues of the full 4×4 map: the trace mode (0) plus the Bloch block.
    pub fn spectrum(&self) -> Vec<C64> {
        let mut eigs = vec![C64::new(0.0, 0.0)];
        eigs.extend(self.block.complex_eigenvalues().iter().cloned());
        eigs
    }

    /// Fixed point `r = −M⁻¹ b` of `ṙ = M r + b`, with the spectral gap.
    pub fn steady_bloch(&self) -> Result<([f64; 3], f64)> {
        let gap = classify_spectrum(&self.spectrum())?;
        let r = self
            .block
            .lu()
            .solve(&(-self.drive))
            .ok_or(Error::DegenerateSteadyState(0.0))?;
        Ok(([r[0], r[1], r[2]], gap))
    }
}

/// Random samplers for tests, benches and randomized checks.
pub mod random {
    use super::*;

    pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
        hermitize(&matrix(rng, d, d))
    }

    /// Full-rank density matrix `A A† / Tr(A A†)`.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
        let a = matrix(rng, d, d);
        let m = hermitize(&(&a * a.adjoint()));
        let tr = m.trace();
        DensityMatrix::new_unchecked(m / tr)
    }

    /// Generator with a random Hamiltonian and `n_jumps` random channels.
    pub fn lindbladian<R: Rng + ?Sized>(rng: &mut R, d: usize, n_jumps: usize) -> SuperOp {
        let h = hermitian(rng, d);
        let jumps: Vec<(f64, CMat)> = (0..n_jumps)
            .map(|_| (rng.random_range(0.1..1.0), matrix(rng, d, d)))
            .collect();
        lindblad_superop(&h, &jumps).expect("random generator is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket(v: &[C64]) -> CVec {
        CVec::from_column_slice(v)
    }

    fn max_abs(m: &CMat) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn lower() -> CMat {
        // |0⟩⟨1|
        CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
    }

    fn proj0() -> CMat {
        CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)])
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let zz = kron(&pauli(2), &pauli(2));
        let expect = CMat::from_diagonal(&CVec::from_vec(
            [1., -1., -1., 1.].iter().map(|&x| c(x, 0.)).collect(),
        ));
        assert_eq!(zz, expect);
    }

    #[test]
    fn kron_acts_on_leftmost_factor() {
        // |01⟩ → |11⟩ under σx ⊗ I
        let x0 = kron(&pauli(0), &identity(2));
        let mut psi = CVec::zeros(4);
        psi[1] = c(1., 0.);
        let out = x0 * psi;
        assert_eq!(out[3], c(1., 0.));
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn embed_matches_kron() {
        let z = pauli(2);
        let e = embed(&z, 1, 3);
        let k = kron(&kron(&identity(2), &z), &identity(2));
        assert_eq!(e, k);
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::density(&mut rng, 2);
        let sigma = random::matrix(&mut rng, 2, 2);
        let m = kron(rho.as_mat(), &sigma);
        let red = partial_trace(&m, &[2, 2], 0).unwrap();
        assert!(max_abs(&(red - rho.as_mat() * sigma.trace())) < 1e-12);
        let red1 = partial_trace(&m, &[2, 2], 1).unwrap();
        assert!(max_abs(&(red1 - &sigma * rho.as_mat().trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(&ket(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)])).unwrap();
        let red = partial_trace(bell.as_mat(), &[2, 2], 0).unwrap();
        assert!(max_abs(&(red - identity(2) * c(0.5, 0.))) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = identity(4);
        assert!(matches!(partial_trace(&m, &[2, 3], 0), Err(Error::DimensionMismatch(_))));
        assert!(matches!(partial_trace(&m, &[2, 2], 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn partial_trace_middle_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random::density(&mut rng, 2);
        let b = random::density(&mut rng, 4);
        let cc = random::density(&mut rng, 2);
        let m = kron(&kron(a.as_mat(), b.as_mat()), cc.as_mat());
        let red = partial_trace(&m, &[2, 4, 2], 1).unwrap();
        assert!(max_abs(&(red - b.as_mat())) < 1e-12);
    }

    #[test]
    fn vectorize_is_column_stacking() {
        let m = CMat::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let v = vectorize(&m);
        assert_eq!(v.as_slice(), &[c(1., 0.), c(3., 0.), c(2., 0.), c(4., 0.)]);
        assert_eq!(devectorize(&v, 2).unwrap(), m);
        assert!(devectorize(&v, 3).is_err());
    }

    #[test]
    fn superop_matches_direct_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random::hermitian(&mut rng, 3);
        let l = random::matrix(&mut rng, 3, 3);
        let x = random::matrix(&mut rng, 3, 3);
        let g = lindblad_superop(&h, &[(0.7, l.clone())]).unwrap();
        let i = c(0., 1.);
        let ldl = l.adjoint() * &l;
        let direct = (&h * &x - &x * &h) * (-i)
            + (&l * &x * l.adjoint() - (&ldl * &x + &x * &ldl) * c(0.5, 0.)) * c(0.7, 0.);
        assert!(max_abs(&(g.apply(&x) - direct)) < 1e-12);
    }

    #[test]
    fn lindblad_rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random::matrix(&mut rng, 2, 2);
        assert!(matches!(lindblad_superop(&h, &[]), Err(Error::NonHermitianHamiltonian(_))));
        assert!(matches!(
            lindblad_superop(&identity(2), &[(-1.0, lower())]),
            Err(Error::NegativeRate(_))
        ));
    }

    #[test]
    fn decay_target_is_annihilated() {
        let g = lindblad_superop(&CMat::zeros(2, 2), &[(1.0, lower())]).unwrap();
        let out = &g.mat * vectorize(&proj0());
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn random_generators_preserve_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3, 4] {
            let g = random::lindbladian(&mut rng, d, 2);
            assert!(g.trace_defect() < 1e-9);
        }
    }

    #[test]
    fn steady_state_pure_decay() {
        let g = lindblad_superop(&CMat::zeros(2, 2), &[(1.0, lower())]).unwrap();
        let (rho, gap) = steady_state(&g).unwrap();
        assert!(max_abs(&(rho.as_mat() - proj0())) < 1e-12);
        assert!(gap > 0.0);
        let (rho_d, gap_d) = steady_state_dense(&g).unwrap();
        assert!(max_abs(&(rho_d.as_mat() - proj0())) < 1e-12);
        assert!((gap - gap_d).abs() < 1e-10);
        // amplitude damping: coherences at rate 1/2, population at 1
        assert!((gap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn steady_state_with_commuting_hamiltonian() {
        let g = lindblad_superop(&pauli(2), &[(1.0, lower())]).unwrap();
        let (rho, _) = steady_state(&g).unwrap();
        assert!(max_abs(&(rho.as_mat() - proj0())) < 1e-12);
    }

    #[test]
    fn steady_state_flags_degeneracy_and_absence() {
        // pure Hamiltonian dynamics: diagonal states are all stationary
        let g = lindblad_superop(&pauli(2), &[]).unwrap();
        assert!(matches!(steady_state(&g), Err(Error::DegenerateSteadyState(_))));
        assert!(matches!(steady_state_dense(&g), Err(Error::DegenerateSteadyState(_))));
        let shifted = SuperOp::from_mat(2, g.mat() - identity(4)).unwrap();
        assert!(matches!(steady_state_dense(&shifted), Err(Error::NoSteadyState(_))));
    }

    #[test]
    fn steady_state_residual_on_random_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in [2, 4, 8, 16] {
            let g = random::lindbladian(&mut rng, d, 2);
            let (rho, gap) = steady_state(&g).unwrap();
            rho.check(1e-10, 1e-10, 1e-9).unwrap();
            assert!((&g.mat * vectorize(rho.as_mat())).norm() <= 1e-8);
            assert!(gap > 1e-8);
        }
    }

    #[test]
    fn qubit_fast_path_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random::lindbladian(&mut rng, 2, 2);
            let (a, ga) = steady_state(&g).unwrap();
            let (b, gb) = steady_state_dense(&g).unwrap();
            assert!(max_abs(&(a.as_mat() - b.as_mat())) < 1e-10);
            assert!((ga - gb).abs() < 1e-9 * ga.max(1.0));
        }
    }

    #[test]
    fn propagate_identity_and_damping() {
        let g = lindblad_superop(&CMat::zeros(2, 2), &[(1.0, lower())]).unwrap();
        let one = DensityMatrix::from_bloch([0., 0., -1.]).unwrap();
        assert_eq!(propagate(&g, &one, 0.0).unwrap(), one);
        for t in [0.1, 1.0, 3.0] {
            let rho = propagate(&g, &one, t).unwrap();
            assert!((rho.as_mat()[(1, 1)].re - (-t).exp()).abs() < 1e-12);
        }
        assert!(propagate(&g, &one, -1.0).is_err());
    }

    #[test]
    fn propagate_converges_to_steady_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in [2, 4] {
            let g = random::lindbladian(&mut rng, d, 2);
            let (ss, gap) = steady_state(&g).unwrap();
            let rho0 = random::density(&mut rng, d);
            let late = propagate(&g, &rho0, 50.0 / gap).unwrap();
            assert!(late.trace_distance(&ss) < 1e-6);
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        assert!(DensityMatrix::new(pauli(0)).is_err());
        assert!(DensityMatrix::new(CMat::from_row_slice(2, 2, &[c(1.5, 0.), c(0., 0.), c(0., 0.), c(-0.5, 0.)])).is_err());
        assert!(DensityMatrix::new(identity(3) / c(3., 0.)).is_err());
        assert!(DensityMatrix::from_bloch([1.0, 1.0, 0.0]).is_err());
        let rho = DensityMatrix::from_bloch([0.3, -0.2, 0.5]).unwrap();
        let b = rho.bloch();
        assert!((b[0] - 0.3).abs() < 1e-15 && (b[1] + 0.2).abs() < 1e-15 && (b[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_on_qubits_is_half_bloch_distance() {
        let a = DensityMatrix::from_bloch([0., 0., 1.]).unwrap();
        let b = DensityMatrix::from_bloch([0., 0., -1.]).unwrap();
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-14);
        let m = DensityMatrix::maximally_mixed(2);
        assert!((a.trace_distance(&m) - 0.5).abs() < 1e-14);
    }
}
