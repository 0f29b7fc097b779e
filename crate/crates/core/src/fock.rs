//! Fixed-photon-number Fock space of four bosonic modes.
//!
//! The modes are the two interferometer ports (`alpha`, `beta`) crossed with
//! two auxiliary labels (`mu`, `nu`) that make photons distinguishable. All
//! states and operators live in the sector of exactly `2n` photons; products
//! that leave the sector (a single ladder operator) are rectangular maps to
//! the neighbouring sector, never a truncated global Fock space.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Occupation numbers in mode order `(alpha_mu, beta_mu, alpha_nu, beta_nu)`.
pub type Occupation = [u32; 4];

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-10;

/// The four single-particle modes, in their fixed canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    AlphaMu = 0,
    BetaMu = 1,
    AlphaNu = 2,
    BetaNu = 3,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::AlphaMu, Mode::BetaMu, Mode::AlphaNu, Mode::BetaNu];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn sector(self) -> Sector {
        match self {
            Mode::AlphaMu | Mode::BetaMu => Sector::Mu,
            Mode::AlphaNu | Mode::BetaNu => Sector::Nu,
        }
    }
}

/// Auxiliary label shared by one `alpha` and one `beta` mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Mu,
    Nu,
}

impl Sector {
    /// `(alpha, beta)` modes carrying this label.
    pub fn modes(self) -> (Mode, Mode) {
        match self {
            Sector::Mu => (Mode::AlphaMu, Mode::BetaMu),
            Sector::Nu => (Mode::AlphaNu, Mode::BetaNu),
        }
    }
}

/// Lexicographically ordered occupation basis of a fixed total photon number.
#[derive(Debug)]
pub struct FockBasis {
    photons: u32,
    states: Vec<Occupation>,
    lookup: HashMap<Occupation, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.photons == other.photons
    }
}

impl Eq for FockBasis {}

impl FockBasis {
    /// Basis of `2 * pairs` photons, the arena for probes with `pairs` photon pairs.
    pub fn new(pairs: u32) -> Result<Arc<Self>> {
        if pairs == 0 {
            return Err(Error::InvalidPhotonNumber(pairs));
        }
        Ok(Self::with_photons(2 * pairs))
    }

    /// Basis of an arbitrary total photon number, including odd and empty sectors.
    pub fn with_photons(photons: u32) -> Arc<Self> {
        let mut states = Vec::new();
        for a in 0..=photons {
            for b in 0..=photons - a {
                for c in 0..=photons - a - b {
                    states.push([a, b, c, photons - a - b - c]);
                }
            }
        }
        let lookup = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Arc::new(FockBasis {
            photons,
            states,
            lookup,
        })
    }

    /// Number of weak compositions of `photons` into four parts.
    pub fn dimension_for(photons: u32) -> usize {
        let p = photons as usize;
        (p + 3) * (p + 2) * (p + 1) / 6
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    /// Photon-pair count `n`, when the sector holds an even, nonzero number of photons.
    pub fn pairs(&self) -> Option<u32> {
        (self.photons > 0 && self.photons.is_multiple_of(2)).then_some(self.photons / 2)
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn occupation(&self, index: usize) -> Option<Occupation> {
        self.states.get(index).copied()
    }

    pub fn index_of(&self, occupation: &Occupation) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    pub(crate) fn require_index(&self, occupation: &Occupation) -> Result<usize> {
        self.index_of(occupation).ok_or_else(|| {
            Error::Config(format!(
                "occupation {occupation:?} is not in the {}-photon sector",
                self.photons
            ))
        })
    }

    pub(crate) fn ensure_same(&self, other: &FockBasis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.photons,
                right: other.photons,
            })
        }
    }

    pub(crate) fn require_two_photons(&self, what: &'static str) -> Result<()> {
        match self.pairs() {
            Some(1) => Ok(()),
            _ => Err(Error::WrongSector {
                what,
                n: self.photons / 2,
            }),
        }
    }
}

/// Builds the `2n`-photon basis.
pub fn build_basis(n: u32) -> Result<Arc<FockBasis>> {
    FockBasis::new(n)
}

/// A ladder operator written as a rectangular map between adjacent sectors.
#[derive(Debug, Clone)]
pub struct SectorMap {
    pub source: Arc<FockBasis>,
    pub target: Arc<FockBasis>,
    pub matrix: DMatrix<C64>,
}

/// `a_mode` from the sector of `basis` into the sector with one photon fewer.
pub fn annihilation_matrix(basis: &Arc<FockBasis>, mode: Mode) -> SectorMap {
    let k = mode.index();
    if basis.photons() == 0 {
        // nothing to remove; the map has no rows
        return SectorMap {
            source: basis.clone(),
            target: basis.clone(),
            matrix: DMatrix::zeros(0, basis.dim()),
        };
    }
    let target = FockBasis::with_photons(basis.photons() - 1);
    let mut matrix = DMatrix::zeros(target.dim(), basis.dim());
    for (col, occ) in basis.states().iter().enumerate() {
        if occ[k] == 0 {
            continue;
        }
        let mut lowered = *occ;
        lowered[k] -= 1;
        let row = target
            .index_of(&lowered)
            .expect("lowered occupation in sector");
        matrix[(row, col)] = C64::new((occ[k] as f64).sqrt(), 0.0);
    }
    SectorMap {
        source: basis.clone(),
        target,
        matrix,
    }
}

/// `a_mode^dagger` from the sector of `basis` into the sector with one more photon.
pub fn creation_matrix(basis: &Arc<FockBasis>, mode: Mode) -> SectorMap {
    let k = mode.index();
    let target = FockBasis::with_photons(basis.photons() + 1);
    let mut matrix = DMatrix::zeros(target.dim(), basis.dim());
    for (col, occ) in basis.states().iter().enumerate() {
        let mut raised = *occ;
        raised[k] += 1;
        let row = target
            .index_of(&raised)
            .expect("raised occupation in sector");
        matrix[(row, col)] = C64::new(((occ[k] + 1) as f64).sqrt(), 0.0);
    }
    SectorMap {
        source: basis.clone(),
        target,
        matrix,
    }
}

/// Number-conserving hop `a_to^dagger a_from`, built from matrix elements inside the sector.
pub fn hopping_matrix(basis: &FockBasis, to: Mode, from: Mode) -> DMatrix<C64> {
    let (t, f) = (to.index(), from.index());
    let mut matrix = DMatrix::zeros(basis.dim(), basis.dim());
    for (col, occ) in basis.states().iter().enumerate() {
        if occ[f] == 0 {
            continue;
        }
        let mut moved = *occ;
        let mut amp = (occ[f] as f64).sqrt();
        moved[f] -= 1;
        amp *= ((moved[t] + 1) as f64).sqrt();
        moved[t] += 1;
        let row = basis.index_of(&moved).expect("hop stays in sector");
        matrix[(row, col)] += C64::new(amp, 0.0);
    }
    matrix
}

/// `a^dagger a` for one mode.
pub fn number_operator(basis: &Arc<FockBasis>, mode: Mode) -> HermitianOperator {
    let diag = DVector::from_iterator(
        basis.dim(),
        basis
            .states()
            .iter()
            .map(|occ| C64::new(occ[mode.index()] as f64, 0.0)),
    );
    HermitianOperator {
        basis: basis.clone(),
        matrix: DMatrix::from_diagonal(&diag),
    }
}

/// Photon number carried by the two modes of one auxiliary label.
pub fn sector_number_operator(basis: &Arc<FockBasis>, sector: Sector) -> HermitianOperator {
    let (a, b) = sector.modes();
    let na = number_operator(basis, a);
    let nb = number_operator(basis, b);
    HermitianOperator {
        basis: basis.clone(),
        matrix: na.matrix + nb.matrix,
    }
}

/// `J = -i (alpha^dagger beta - alpha beta^dagger) / 2` for one auxiliary label.
pub fn j_operator(basis: &Arc<FockBasis>, sector: Sector) -> HermitianOperator {
    let (alpha, beta) = sector.modes();
    let raise_alpha = hopping_matrix(basis, alpha, beta);
    let lower_alpha = hopping_matrix(basis, beta, alpha);
    let matrix = (raise_alpha - lower_alpha) * C64::new(0.0, -0.5);
    HermitianOperator {
        basis: basis.clone(),
        matrix,
    }
}

/// Phase-encoding generator `J_mu + J_nu`.
pub fn hamiltonian(basis: &Arc<FockBasis>) -> HermitianOperator {
    let mu = j_operator(basis, Sector::Mu);
    let nu = j_operator(basis, Sector::Nu);
    HermitianOperator {
        basis: basis.clone(),
        matrix: mu.matrix + nu.matrix,
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Anything backed by a square Hermitian matrix over a Fock basis.
pub trait HermitianMatrix {
    fn basis(&self) -> &Arc<FockBasis>;
    fn matrix(&self) -> &DMatrix<C64>;
}

#[derive(Debug, Clone)]
pub struct HermitianOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn new(basis: Arc<FockBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&basis, &matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { basis, matrix })
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    /// Max-norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &HermitianOperator) -> f64 {
        let (a, b) = (&self.matrix, &other.matrix);
        max_abs(&(a * b - b * a))
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }
}

impl HermitianMatrix for HermitianOperator {
    fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }
    fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

fn check_square(basis: &FockBasis, matrix: &DMatrix<C64>) -> Result<()> {
    let d = basis.dim();
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::Config(format!(
            "matrix is {}x{}, basis dimension is {d}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(())
}

/// Normalized state vector in a Fock sector.
#[derive(Debug, Clone)]
pub struct PureState {
    basis: Arc<FockBasis>,
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(basis: Arc<FockBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::Config(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(basis: Arc<FockBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Self::new(basis, amplitudes / C64::new(norm, 0.0))
    }

    pub fn basis_state(basis: &Arc<FockBasis>, occupation: &Occupation) -> Result<Self> {
        let i = basis.require_index(occupation)?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[i] = C64::new(1.0, 0.0);
        Ok(Self {
            basis: basis.clone(),
            amplitudes,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &Occupation) -> C64 {
        self.basis
            .index_of(occupation)
            .map_or(C64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Equality up to a global phase, `|<a|b>| = 1`.
    pub fn equal_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.inner(other)
            .map(|z| (z.norm() - 1.0).abs() < tol)
            .unwrap_or(false)
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Mixed state over a Fock sector.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(basis: Arc<FockBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&basis, &matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > HERMITIAN_TOL || trace.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("trace is {trace}")));
        }
        let lowest = eigendecompose_matrix(&matrix)?.eigenvalues[0];
        if lowest < -HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(Self { basis, matrix })
    }

    pub(crate) fn new_unchecked(basis: Arc<FockBasis>, matrix: DMatrix<C64>) -> Self {
        Self { basis, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            basis: state.basis.clone(),
            matrix: state.projector(),
        }
    }

    pub fn maximally_mixed(basis: &Arc<FockBasis>) -> Self {
        let d = basis.dim();
        Self {
            basis: basis.clone(),
            matrix: DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn population(&self, occupation: &Occupation) -> f64 {
        self.basis
            .index_of(occupation)
            .map_or(0.0, |i| self.matrix[(i, i)].re)
    }
}

impl HermitianMatrix for DensityOperator {
    fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }
    fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// States that can report expectation values of operators on their sector.
pub trait QuantumState {
    fn sector(&self) -> &Arc<FockBasis>;
    /// `<psi|M|psi>` or `tr(rho M)` for a raw matrix.
    fn expect_matrix(&self, m: &DMatrix<C64>) -> C64;
}

impl QuantumState for PureState {
    fn sector(&self) -> &Arc<FockBasis> {
        &self.basis
    }
    fn expect_matrix(&self, m: &DMatrix<C64>) -> C64 {
        self.amplitudes.dotc(&(m * &self.amplitudes))
    }
}

impl QuantumState for DensityOperator {
    fn sector(&self) -> &Arc<FockBasis> {
        &self.basis
    }
    fn expect_matrix(&self, m: &DMatrix<C64>) -> C64 {
        (&self.matrix * m).trace()
    }
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::Numerical(format!(
            "expectation value has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

pub fn expectation<S: QuantumState>(state: &S, op: &HermitianOperator) -> Result<f64> {
    state.sector().ensure_same(&op.basis)?;
    real_part(state.expect_matrix(&op.matrix))
}

/// `<A^2> - <A>^2`.
pub fn variance<S: QuantumState>(state: &S, op: &HermitianOperator) -> Result<f64> {
    covariance(state, op, op)
}

/// Symmetrized covariance `Re<AB> - <A><B>`.
pub fn covariance<S: QuantumState>(
    state: &S,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<f64> {
    state.sector().ensure_same(&a.basis)?;
    a.basis.ensure_same(&b.basis)?;
    let ab = state.expect_matrix(&(&a.matrix * &b.matrix)).re;
    Ok(ab - expectation(state, a)? * expectation(state, b)?)
}

/// Eigen-decomposition with ascending eigenvalues; columns of `eigenvectors` are the eigenstates.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.reconstruct_with(|l| C64::new(l, 0.0))
    }

    /// `V f(Lambda) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fl;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn eigendecompose<M: HermitianMatrix>(op: &M) -> Result<Spectrum> {
    eigendecompose_matrix(op.matrix())
}

pub fn eigendecompose_matrix(matrix: &DMatrix<C64>) -> Result<Spectrum> {
    if !matrix.is_square() {
        return Err(Error::Config(
            "eigendecomposition of a non-square matrix".into(),
        ));
    }
    let deviation = hermitian_deviation(matrix);
    if deviation > 1e-10 * max_abs(matrix).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(matrix.nrows(), matrix.ncols(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Compact ket label: occupied positions as `<count><h|v>`, empty ones as `0`.
///
/// `alpha` modes print as `h` and `beta` modes as `v`, so `(1,0,0,1)` is `1h001v`.
pub fn occupation_label(occ: &Occupation) -> String {
    let mut s = String::new();
    for (k, &count) in occ.iter().enumerate() {
        if count == 0 {
            s.push('0');
        } else {
            s.push_str(&count.to_string());
            s.push(if k % 2 == 0 { 'h' } else { 'v' });
        }
    }
    s
}

impl fmt::Display for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-photon sector (d = {})", self.photons, self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dimension_law_matches_enumeration() {
        for n in 1..=5 {
            let basis = build_basis(n).unwrap();
            let brute = (0..=2 * n)
                .flat_map(|a| (0..=2 * n).flat_map(move |b| (0..=2 * n).map(move |c| (a, b, c))))
                .filter(|(a, b, c)| a + b + c <= 2 * n)
                .count();
            assert_eq!(basis.dim(), brute);
            let m = 2 * n as usize;
            assert_eq!(basis.dim(), (m + 3) * (m + 2) * (m + 1) / 6);
        }
        assert_eq!(build_basis(1).unwrap().dim(), 10);
        assert_eq!(build_basis(2).unwrap().dim(), 35);
    }

    #[test]
    fn zero_pairs_rejected() {
        assert!(matches!(build_basis(0), Err(Error::InvalidPhotonNumber(0))));
    }

    #[test]
    fn ordering_is_lexicographic_and_indexable() {
        let basis = build_basis(2).unwrap();
        for w in basis.states().windows(2) {
            assert!(w[0] < w[1]);
        }
        for (i, occ) in basis.states().iter().enumerate() {
            assert_eq!(occ.iter().sum::<u32>(), 4);
            assert_eq!(basis.index_of(occ), Some(i));
            assert_eq!(basis.occupation(i), Some(*occ));
        }
        let two = build_basis(1).unwrap();
        assert!(two.index_of(&[1, 1, 0, 0]).is_some());
        assert!(two.index_of(&[1, 0, 0, 1]).is_some());
    }

    #[test]
    fn annihilation_examples() {
        let basis = build_basis(1).unwrap();
        let a = annihilation_matrix(&basis, Mode::AlphaMu);
        let v = PureState::basis_state(&basis, &[2, 0, 0, 0]).unwrap();
        let out = &a.matrix * v.amplitudes();
        let target = a.target.index_of(&[1, 0, 0, 0]).unwrap();
        assert_abs_diff_eq!(out[target].re, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm(), 2f64.sqrt(), epsilon = 1e-15);

        let single = FockBasis::with_photons(1);
        let empty = PureState::basis_state(&single, &[0, 1, 0, 0]).unwrap();
        let a1 = annihilation_matrix(&single, Mode::AlphaMu);
        assert_eq!((&a1.matrix * empty.amplitudes()).norm(), 0.0);

        let state = PureState::basis_state(&basis, &[1, 1, 0, 0]).unwrap();
        let n_beta = number_operator(&basis, Mode::BetaMu);
        assert_abs_diff_eq!(expectation(&state, &n_beta).unwrap(), 1.0);
        // a^dagger a through the lower sector agrees with the diagonal number operator
        let lower = annihilation_matrix(&basis, Mode::BetaMu);
        let raise = creation_matrix(&lower.target, Mode::BetaMu);
        let through = &raise.matrix * &lower.matrix;
        assert!(max_abs(&(through - n_beta.matrix())) < 1e-14);
    }

    #[test]
    fn canonical_commutation_through_neighbour_sectors() {
        let basis = build_basis(2).unwrap();
        let d = basis.dim();
        for x in Mode::ALL {
            for y in Mode::ALL {
                let up_y = creation_matrix(&basis, y);
                let down_x_above = annihilation_matrix(&up_y.target, x);
                let down_x = annihilation_matrix(&basis, x);
                let up_y_below = creation_matrix(&down_x.target, y);
                let comm =
                    &down_x_above.matrix * &up_y.matrix - &up_y_below.matrix * &down_x.matrix;
                let expected = if x == y {
                    DMatrix::identity(d, d)
                } else {
                    DMatrix::zeros(d, d)
                };
                assert!(max_abs(&(comm - expected)) < 1e-13, "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn j_mu_matrix_element_matches_operator_product() {
        let basis = build_basis(1).unwrap();
        let j = j_operator(&basis, Sector::Mu);
        let i11 = basis.index_of(&[1, 1, 0, 0]).unwrap();
        let i20 = basis.index_of(&[2, 0, 0, 0]).unwrap();

        // brute force: -i/2 (a^dag b - a b^dag) assembled from ladder maps
        let b = annihilation_matrix(&basis, Mode::BetaMu);
        let a_dag = creation_matrix(&b.target, Mode::AlphaMu);
        let a = annihilation_matrix(&basis, Mode::AlphaMu);
        let b_dag = creation_matrix(&a.target, Mode::BetaMu);
        let brute = (&a_dag.matrix * &b.matrix - &b_dag.matrix * &a.matrix) * c(0.0, -0.5);
        assert!(max_abs(&(brute.clone() - j.matrix())) < 1e-15);

        let h = 2f64.sqrt() / 2.0;
        assert_abs_diff_eq!(j.matrix()[(i20, i11)].im, -h, epsilon = 1e-15);
        assert_abs_diff_eq!(j.matrix()[(i11, i20)].im, h, epsilon = 1e-15);
        assert_abs_diff_eq!(brute[(i20, i11)].im, -h, epsilon = 1e-15);
    }

    #[test]
    fn j_nu_kills_states_without_nu_photons() {
        let basis = build_basis(2).unwrap();
        let j = j_operator(&basis, Sector::Nu);
        for occ in basis.states().iter().filter(|o| o[2] + o[3] == 0) {
            let s = PureState::basis_state(&basis, occ).unwrap();
            assert_eq!(j.apply(s.amplitudes()).norm(), 0.0);
        }
    }

    #[test]
    fn generators_conserve_sector_numbers_and_are_hermitian() {
        for n in 1..=3 {
            let basis = build_basis(n).unwrap();
            let h = hamiltonian(&basis);
            let jm = j_operator(&basis, Sector::Mu);
            let n_mu = sector_number_operator(&basis, Sector::Mu);
            let n_nu = sector_number_operator(&basis, Sector::Nu);
            assert!(h.commutator_norm(&n_mu) < 1e-12);
            assert!(h.commutator_norm(&n_nu) < 1e-12);
            assert!(jm.commutator_norm(&n_mu) < 1e-12);
            assert!(hermitian_deviation(h.matrix()) < 1e-14);
            assert!(hermitian_deviation(jm.matrix()) < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_single_hop_and_symmetric_spectrum() {
        let basis = build_basis(1).unwrap();
        let h = hamiltonian(&basis);
        let s = PureState::basis_state(&basis, &[2, 0, 0, 0]).unwrap();
        let out = h.apply(s.amplitudes());
        for (i, occ) in basis.states().iter().enumerate() {
            if *occ != [1, 1, 0, 0] {
                assert_eq!(out[i].norm(), 0.0, "{occ:?}");
            }
        }
        assert!(out.norm() > 0.5);
        let spec = eigendecompose(&h).unwrap();
        let d = spec.dim();
        for k in 0..d {
            assert_abs_diff_eq!(
                spec.eigenvalues[k],
                -spec.eigenvalues[d - 1 - k],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn eigendecompose_small_cases() {
        let basis = build_basis(1).unwrap();
        let id = DMatrix::<C64>::identity(10, 10);
        let spec = eigendecompose_matrix(&id).unwrap();
        assert!(spec.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-14));
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.9, 0.0), c(0.1, 0.0)]));
        let spec = eigendecompose_matrix(&diag).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.eigenvalues[1], 0.9, epsilon = 1e-15);
        let mut bad = DMatrix::<C64>::zeros(2, 2);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            eigendecompose_matrix(&bad),
            Err(Error::NotHermitian { .. })
        ));
        assert_eq!(basis.dim(), 10);
    }

    #[test]
    fn expectation_rejects_basis_mismatch() {
        let one = build_basis(1).unwrap();
        let two = build_basis(2).unwrap();
        let s = PureState::basis_state(&one, &[1, 1, 0, 0]).unwrap();
        assert!(matches!(
            expectation(&s, &hamiltonian(&two)),
            Err(Error::BasisMismatch { .. })
        ));
    }

    #[test]
    fn covariance_of_uncorrelated_product_vanishes() {
        let basis = build_basis(2).unwrap();
        // |1,1>_mu (x) |1,1>_nu is a product over the mu/nu split
        let s = PureState::basis_state(&basis, &[1, 1, 1, 1]).unwrap();
        let jm = j_operator(&basis, Sector::Mu);
        let jn = j_operator(&basis, Sector::Nu);
        assert!(covariance(&s, &jm, &jn).unwrap().abs() < 1e-14);
        assert!(variance(&s, &jm).unwrap() > 0.0);
    }

    #[test]
    fn density_operator_validation() {
        let basis = build_basis(1).unwrap();
        assert!(DensityOperator::new(basis.clone(), DMatrix::identity(10, 10)).is_err());
        let mm = DensityOperator::maximally_mixed(&basis);
        assert!(DensityOperator::new(basis.clone(), mm.matrix().clone()).is_ok());
        let mut neg = mm.matrix().clone();
        neg[(0, 0)] = c(-0.1, 0.0);
        neg[(1, 1)] += c(0.2, 0.0);
        assert!(matches!(
            DensityOperator::new(basis, neg),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn labels_follow_ket_notation() {
        assert_eq!(occupation_label(&[2, 0, 0, 0]), "2h000");
        assert_eq!(occupation_label(&[1, 0, 0, 1]), "1h001v");
        assert_eq!(occupation_label(&[0, 1, 1, 0]), "01v1h0");
        assert_eq!(occupation_label(&[0, 0, 0, 2]), "0002v");
    }
}
