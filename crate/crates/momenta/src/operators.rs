//! Finite-dimensional Hermitian operators: spectral measures, measurement
//! outcome distributions, moments as operator powers, reconstruction of an
//! operator from its first-moment functional, and the locality class whose
//! expectations cannot see relative phases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::MeasureSpec;

const HERMITIAN_TOL: f64 = 1e-12;
const UNIT_NORM_TOL: f64 = 1e-10;
const WEIGHT_DROP: f64 = 1e-14;
const CROSS_ELEMENT_TOL: f64 = 1e-12;
const MOMENT_MATCH_TOL: f64 = 1e-9;

/// Relative degeneracy tolerance used when no explicit clustering tolerance
/// is given: eigenvalues within 1e-8·max|λ| share a projector, absorbing
/// solver round-off splits of genuinely degenerate eigenvalues.
pub const DEFAULT_DEGENERACY_REL: f64 = 1e-8;

/// A d×d complex matrix with exact conjugate symmetry. Construction accepts
/// inputs Hermitian within 1e-12 and symmetrizes them, so every stored
/// matrix satisfies A = A† bitwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixWire", into = "MatrixWire")]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
}

/// JSON wire form: {"d", "re", "im"} with row-major d² arrays.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    d: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<HermitianOperator> for MatrixWire {
    fn from(op: HermitianOperator) -> MatrixWire {
        let d = op.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(op.matrix[(i, j)].re);
                im.push(op.matrix[(i, j)].im);
            }
        }
        MatrixWire { d, re, im }
    }
}

impl TryFrom<MatrixWire> for HermitianOperator {
    type Error = Error;

    fn try_from(wire: MatrixWire) -> Result<HermitianOperator> {
        if wire.re.len() != wire.d * wire.d || wire.im.len() != wire.d * wire.d {
            return Err(Error::validation(format!(
                "matrix arrays have {} and {} entries but d = {} needs {}",
                wire.re.len(),
                wire.im.len(),
                wire.d,
                wire.d * wire.d
            )));
        }
        let m = DMatrix::from_fn(wire.d, wire.d, |i, j| {
            Complex64::new(wire.re[i * wire.d + j], wire.im[i * wire.d + j])
        });
        HermitianOperator::new(m)
    }
}

impl HermitianOperator {
    /// Validates conjugate symmetry within 1e-12 per entry and stores the
    /// exactly symmetrized matrix (A + A†)/2.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(Error::validation(format!(
                "operator must be square with d ≥ 1, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..d {
            for j in 0..d {
                let e = matrix[(i, j)];
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(Error::validation(format!("entry ({i}, {j}) is not finite")));
                }
                let defect = (e - matrix[(j, i)].conj()).norm();
                if defect > HERMITIAN_TOL {
                    return Err(Error::validation(format!(
                        "entries ({i}, {j}) and ({j}, {i}) break conjugate symmetry by {defect}"
                    )));
                }
            }
        }
        let symmetrized = (&matrix + matrix.adjoint()).map(|e| 0.5 * e);
        Ok(HermitianOperator { matrix: symmetrized })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("diagonal operator needs d ≥ 1".to_string()));
        }
        let d = entries.len();
        Ok(HermitianOperator {
            matrix: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(entries[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Largest entry-wise distance to another operator.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|e| e.norm()).fold(0.0, f64::max)
    }
}

/// Spectral resolution A = Σ λ_i P_i with distinct ascending eigenvalues
/// and mutually orthogonal projectors summing to the identity.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<DMatrix<Complex64>>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Rank of the i-th projector (trace rounded to the nearest integer).
    pub fn rank(&self, i: usize) -> usize {
        self.projectors[i].trace().re.round() as usize
    }
}

/// Eigendecomposition with eigenvalues closer than `degeneracy_tol`
/// clustered into a single projector (their mean is the reported
/// eigenvalue).
pub fn spectral_measure(
    a: &HermitianOperator,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition> {
    if !(degeneracy_tol >= 0.0) || !degeneracy_tol.is_finite() {
        return Err(Error::validation(format!(
            "degeneracy tolerance must be a finite nonnegative real, got {degeneracy_tol}"
        )));
    }
    let d = a.dim();
    let eigen = a.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[i].partial_cmp(&eigen.eigenvalues[j]).unwrap());

    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut cluster: Vec<usize> = Vec::new();
    let mut flush = |cluster: &mut Vec<usize>| {
        if cluster.is_empty() {
            return;
        }
        let mean =
            cluster.iter().map(|&i| eigen.eigenvalues[i]).sum::<f64>() / cluster.len() as f64;
        let mut p = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for &i in cluster.iter() {
            let v = eigen.eigenvectors.column(i).into_owned();
            p += &v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(p);
        cluster.clear();
    };
    for &i in &order {
        if let Some(&prev) = cluster.last() {
            if eigen.eigenvalues[i] - eigen.eigenvalues[prev] > degeneracy_tol {
                flush(&mut cluster);
            }
        }
        cluster.push(i);
    }
    flush(&mut cluster);
    Ok(SpectralDecomposition { eigenvalues, projectors })
}

/// spectral_measure with the default clustering tolerance
/// DEFAULT_DEGENERACY_REL·max|λ|.
pub fn spectral_measure_default(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let eigen = a.matrix.clone().symmetric_eigen();
    let scale = eigen.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    spectral_measure(a, DEFAULT_DEGENERACY_REL * scale)
}

fn check_unit(phi: &DVector<Complex64>, dim: usize) -> Result<()> {
    if phi.len() != dim {
        return Err(Error::validation(format!(
            "vector has {} components, operator dimension is {dim}",
            phi.len()
        )));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::validation(format!("vector norm is {norm}, not 1 within {UNIT_NORM_TOL}")));
    }
    Ok(())
}

/// Measurement statistics of A in the state φ: atoms (λ_i, ‖P_iφ‖²) with
/// zero-weight atoms dropped and the survivors renormalized to total mass 1
/// (the raw weights already sum to 1 within 1e-10 for a unit vector).
pub fn outcome_distribution(a: &HermitianOperator, phi: &DVector<Complex64>) -> Result<MeasureSpec> {
    check_unit(phi, a.dim())?;
    let decomposition = spectral_measure_default(a)?;
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut total = 0.0;
    for (lambda, p) in decomposition.eigenvalues.iter().zip(&decomposition.projectors) {
        let weight = (p * phi).norm_squared();
        total += weight;
        if weight > WEIGHT_DROP {
            pairs.push((*lambda, weight));
        }
    }
    if (total - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::Degenerate(format!(
            "projection weights sum to {total}; spectral resolution failed"
        )));
    }
    let kept: f64 = pairs.iter().map(|(_, w)| *w).sum();
    for (_, w) in pairs.iter_mut() {
        *w /= kept;
    }
    MeasureSpec::atoms(pairs)
}

/// ⟨φ|Aⁿφ⟩ by iterated matrix-vector products. Equals the n-th moment of
/// outcome_distribution(A, φ) within 1e-9.
pub fn moment_via_power(a: &HermitianOperator, phi: &DVector<Complex64>, n: usize) -> Result<f64> {
    check_unit(phi, a.dim())?;
    let mut v = phi.clone();
    for _ in 0..n {
        v = &a.matrix * v;
    }
    Ok(phi.dotc(&v).re)
}

/// Rebuilds a Hermitian operator from its first-moment functional
/// q(φ) = ⟨φ|Aφ⟩: diagonal entries are q(e_i), and for i < j the
/// polarization identity gives
/// Re A_ij = [q((e_i+e_j)/√2) - q((e_i-e_j)/√2)]/2 and
/// Im A_ij = [q((e_i-ie_j)/√2) - q((e_i+ie_j)/√2)]/2.
/// The oracle must return real values: first moments of Hermitian
/// operators are real, so a drifting imaginary part breaks the contract.
pub fn reconstruct_from_expectations(
    dim: usize,
    oracle: impl Fn(&DVector<Complex64>) -> Complex64,
) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(Error::validation("reconstruction needs dimension ≥ 1".to_string()));
    }
    let probe = |v: DVector<Complex64>| -> Result<f64> {
        let q = oracle(&v);
        if q.im.abs() > 1e-10 * (1.0 + q.re.abs()) {
            return Err(Error::OracleContract(format!(
                "first-moment oracle returned a non-real value {q}"
            )));
        }
        Ok(q.re)
    };
    let basis = |i: usize| -> DVector<Complex64> {
        DVector::from_fn(dim, |r, _| {
            if r == i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for i in 0..dim {
        m[(i, i)] = Complex64::new(probe(basis(i))?, 0.0);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let combine = |factor: Complex64| -> DVector<Complex64> {
                let mut v = basis(i);
                v[j] = factor;
                v * Complex64::new(inv_sqrt2, 0.0)
            };
            let re_part = 0.5
                * (probe(combine(Complex64::new(1.0, 0.0)))?
                    - probe(combine(Complex64::new(-1.0, 0.0)))?);
            let im_part = 0.5
                * (probe(combine(Complex64::new(0.0, -1.0)))?
                    - probe(combine(Complex64::new(0.0, 1.0)))?);
            m[(i, j)] = Complex64::new(re_part, im_part);
            m[(j, i)] = Complex64::new(re_part, -im_part);
        }
    }
    HermitianOperator::new(m)
}

/// Samples Haar-uniform unit vectors and compares the first and second
/// moments of A and B on each; true iff every pair agrees within 1e-9.
/// Agreement on all states pins the operator itself, so this is an
/// effective equality test (up to the tolerance) with seeded randomness.
pub fn moments_determine_operator_test(
    a: &HermitianOperator,
    b: &HermitianOperator,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::validation(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if trials == 0 {
        return Err(Error::validation("at least one trial is required".to_string()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let phi = haar_unit_vector(a.dim(), &mut rng);
        for n in [1usize, 2] {
            let ma = moment_via_power(a, &phi, n)?;
            let mb = moment_via_power(b, &phi, n)?;
            if (ma - mb).abs() > MOMENT_MATCH_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// ⟨φ₁|Aφ₂⟩ (conjugate-linear in the first argument). Vanishing cross
/// elements for a pair of states mean A cannot couple them.
pub fn cross_element(
    a: &HermitianOperator,
    phi1: &DVector<Complex64>,
    phi2: &DVector<Complex64>,
) -> Result<Complex64> {
    check_unit(phi1, a.dim())?;
    check_unit(phi2, a.dim())?;
    Ok(phi1.dotc(&(&a.matrix * phi2)))
}

/// Max over the given phases of |⟨ψ_δ|Aψ_δ⟩ - ⟨ψ₀|Aψ₀⟩| for
/// ψ_δ = (φ₁ + e^{iδ}φ₂)/√2. Requires both cross elements and the overlap
/// ⟨φ₁|φ₂⟩ to vanish within 1e-12; under that precondition the expectation
/// is phase-independent within 1e-10.
pub fn phase_invariance_check(
    a: &HermitianOperator,
    phi1: &DVector<Complex64>,
    phi2: &DVector<Complex64>,
    deltas: &[f64],
) -> Result<f64> {
    check_unit(phi1, a.dim())?;
    check_unit(phi2, a.dim())?;
    let c12 = cross_element(a, phi1, phi2)?;
    let c21 = cross_element(a, phi2, phi1)?;
    let overlap = phi1.dotc(phi2);
    if c12.norm() > CROSS_ELEMENT_TOL || c21.norm() > CROSS_ELEMENT_TOL {
        return Err(Error::NotInClass(format!(
            "cross elements ⟨φ₁|Aφ₂⟩ = {c12}, ⟨φ₂|Aφ₁⟩ = {c21} exceed {CROSS_ELEMENT_TOL}"
        )));
    }
    if overlap.norm() > CROSS_ELEMENT_TOL {
        return Err(Error::NotInClass(format!(
            "states overlap: ⟨φ₁|φ₂⟩ = {overlap} exceeds {CROSS_ELEMENT_TOL}"
        )));
    }
    let expectation = |delta: f64| -> f64 {
        let phase = Complex64::new(0.0, delta).exp();
        let psi = (phi1 + phi2.map(|x| phase * x)) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi.dotc(&(&a.matrix * &psi)).re
    };
    let reference = expectation(0.0);
    let mut worst = 0.0f64;
    for &delta in deltas {
        if !delta.is_finite() {
            return Err(Error::validation(format!("phase must be finite, got {delta}")));
        }
        worst = worst.max((expectation(delta) - reference).abs());
    }
    Ok(worst)
}

/// Haar-uniform unit vector: i.i.d. complex Gaussian components,
/// normalized. Unitary invariance of the Gaussian makes the direction
/// uniform on the sphere.
pub fn haar_unit_vector(dim: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            let (x, y) = standard_normal_pair(rng);
            Complex64::new(x, y)
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// GUE-style random Hermitian matrix (G + G†)/2 with standard complex
/// Gaussian entries; test fodder for the property suites.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(Error::validation("dimension must be ≥ 1".to_string()));
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let (x, y) = standard_normal_pair(rng);
        Complex64::new(x, y)
    });
    HermitianOperator::new((&g + g.adjoint()).map(|e| 0.5 * e))
}

fn standard_normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    // Box-Muller on (0,1] × [0,1)
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    (r * t.cos(), r * t.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MomentStatus;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> HermitianOperator {
        HermitianOperator::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap()
    }

    fn basis(dim: usize, i: usize) -> DVector<Complex64> {
        DVector::from_fn(dim, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn identity_has_one_projector() {
        let a = HermitianOperator::diagonal(&[1.0, 1.0, 1.0]).unwrap();
        let s = spectral_measure(&a, 1e-8).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-12);
        let diff = (&s.projectors[0] - DMatrix::<Complex64>::identity(3, 3))
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-10);
    }

    #[test]
    fn degenerate_pair_is_clustered() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0, 2.0]).unwrap();
        let s = spectral_measure(&a, 1e-8).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.eigenvalues[1], 2.0, epsilon = 1e-10);
        assert_eq!(s.rank(0), 1);
        assert_eq!(s.rank(1), 2);
    }

    #[test]
    fn flip_operator_splits_into_rank_one_projectors() {
        let s = spectral_measure_default(&pauli_x()).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-12);
        assert_eq!(s.rank(0), 1);
        assert_eq!(s.rank(1), 1);
        // resolution and reconstruction
        let mut resolution = DMatrix::from_element(2, 2, c(0.0, 0.0));
        let mut reconstruction = DMatrix::from_element(2, 2, c(0.0, 0.0));
        for (l, p) in s.eigenvalues.iter().zip(&s.projectors) {
            resolution += p;
            reconstruction += p.map(|e| e * c(*l, 0.0));
        }
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((resolution - id).iter().map(|e| e.norm()).fold(0.0, f64::max) <= 1e-10);
        assert!(
            (reconstruction - pauli_x().matrix())
                .iter()
                .map(|e| e.norm())
                .fold(0.0, f64::max)
                <= 1e-10
        );
    }

    #[test]
    fn outcome_distribution_matches_projector_overlaps() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let plus = DVector::from_vec(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        match outcome_distribution(&a, &plus).unwrap() {
            MeasureSpec::Atoms { atoms } => {
                assert_eq!(atoms.len(), 2);
                assert_abs_diff_eq!(atoms[0].location, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(atoms[0].weight, 0.5, epsilon = 1e-10);
                assert_abs_diff_eq!(atoms[1].location, 2.0, epsilon = 1e-12);
                assert_abs_diff_eq!(atoms[1].weight, 0.5, epsilon = 1e-10);
            }
            other => panic!("expected atoms, got {other:?}"),
        }

        match outcome_distribution(&pauli_x(), &basis(2, 0)).unwrap() {
            MeasureSpec::Atoms { atoms } => {
                assert_abs_diff_eq!(atoms[0].location, -1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(atoms[0].weight, 0.5, epsilon = 1e-10);
                assert_abs_diff_eq!(atoms[1].weight, 0.5, epsilon = 1e-10);
            }
            other => panic!("expected atoms, got {other:?}"),
        }

        // eigenvector: single atom survives the zero-weight drop
        match outcome_distribution(&a, &basis(2, 0)).unwrap() {
            MeasureSpec::Atoms { atoms } => {
                assert_eq!(atoms.len(), 1);
                assert_abs_diff_eq!(atoms[0].location, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(atoms[0].weight, 1.0, epsilon = 1e-12);
            }
            other => panic!("expected atoms, got {other:?}"),
        }
    }

    #[test]
    fn non_unit_vectors_are_rejected() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(outcome_distribution(&a, &v).is_err());
        assert!(moment_via_power(&a, &v, 1).is_err());
    }

    #[test]
    fn powers_give_moments() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let plus = DVector::from_vec(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        assert_abs_diff_eq!(moment_via_power(&a, &plus, 0).unwrap(), 1.0, epsilon = 1e-14);
        // oracle: ½·1² + ½·2² = 2.5
        assert_abs_diff_eq!(moment_via_power(&a, &plus, 2).unwrap(), 2.5, epsilon = 1e-12);
        // flip squares to the identity
        assert_abs_diff_eq!(
            moment_via_power(&pauli_x(), &basis(2, 0), 2).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // agreement with the spectral route
        let dist = outcome_distribution(&a, &plus).unwrap();
        for n in 0..=6 {
            let (m, status) = dist.moment(n, 1e-9).unwrap();
            assert_eq!(status, MomentStatus::Finite);
            assert_abs_diff_eq!(moment_via_power(&a, &plus, n).unwrap(), m, epsilon = 1e-9);
        }
    }

    #[test]
    fn reconstruction_reads_off_diagonal_operators() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let rebuilt = reconstruct_from_expectations(2, |phi| {
            Complex64::new(moment_via_power(&a, phi, 1).unwrap(), 0.0)
        })
        .unwrap();
        assert!(rebuilt.max_abs_diff(&a) <= 1e-12);
    }

    #[test]
    fn reconstruction_recovers_off_diagonal_entries_by_polarization() {
        let x = pauli_x();
        let rebuilt = reconstruct_from_expectations(2, |phi| {
            Complex64::new(moment_via_power(&x, phi, 1).unwrap(), 0.0)
        })
        .unwrap();
        assert!(rebuilt.max_abs_diff(&x) <= 1e-12);
        assert_relative_eq!(rebuilt.matrix()[(0, 1)].re, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn reconstruction_recovers_a_random_operator() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = random_hermitian(5, &mut rng).unwrap();
        let rebuilt = reconstruct_from_expectations(5, |phi| {
            Complex64::new(moment_via_power(&a, phi, 1).unwrap(), 0.0)
        })
        .unwrap();
        assert!(rebuilt.max_abs_diff(&a) <= 1e-10, "error {}", rebuilt.max_abs_diff(&a));
    }

    #[test]
    fn non_real_oracle_violates_the_contract() {
        let result = reconstruct_from_expectations(2, |_| Complex64::new(0.0, 1.0));
        assert!(matches!(result, Err(Error::OracleContract(_))));
    }

    #[test]
    fn moment_agreement_detects_equality_and_perturbations() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        assert!(moments_determine_operator_test(&a, &a, 32, 1).unwrap());

        let swapped = HermitianOperator::diagonal(&[2.0, 1.0]).unwrap();
        assert!(!moments_determine_operator_test(&a, &swapped, 32, 1).unwrap());

        let perturbed = HermitianOperator::diagonal(&[1.0 + 1e-3, 2.0 - 1e-3]).unwrap();
        assert!(!moments_determine_operator_test(&a, &perturbed, 32, 1).unwrap());

        let wrong_dim = HermitianOperator::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(moments_determine_operator_test(&a, &wrong_dim, 8, 1).is_err());
    }

    #[test]
    fn cross_elements_of_diagonal_operators_vanish() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let v = cross_element(&a, &basis(2, 0), &basis(2, 1)).unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    fn banded_operator(d: usize) -> HermitianOperator {
        // bandwidth 2: entries vanish beyond |i-j| > 2
        HermitianOperator::new(DMatrix::from_fn(d, d, |i, j| {
            let gap = i.abs_diff(j);
            if gap == 0 {
                c(i as f64 + 1.0, 0.0)
            } else if gap == 1 {
                c(0.5, 0.3 * if i < j { 1.0 } else { -1.0 })
            } else if gap == 2 {
                c(0.2, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }))
        .unwrap()
    }

    fn block_vector(d: usize, indices: &[usize], signs: &[f64]) -> DVector<Complex64> {
        let scale = 1.0 / (indices.len() as f64).sqrt();
        let mut v = DVector::from_element(d, c(0.0, 0.0));
        for (&i, &s) in indices.iter().zip(signs) {
            v[i] = c(s * scale, 0.0);
        }
        v
    }

    #[test]
    fn band_structure_annihilates_separated_blocks() {
        let a = banded_operator(8);
        let phi1 = block_vector(8, &[0, 1], &[1.0, 1.0]);
        let phi2 = block_vector(8, &[6, 7], &[1.0, -1.0]);
        // indices 1 and 6 are 5 apart, far beyond the bandwidth
        let v = cross_element(&a, &phi1, &phi2).unwrap();
        assert!(v.norm() <= 1e-12);
        let deltas: Vec<f64> = (0..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect();
        let dev = phase_invariance_check(&a, &phi1, &phi2, &deltas).unwrap();
        assert!(dev <= 1e-12, "deviation {dev}");
    }

    #[test]
    fn diagonal_phase_invariance_is_machine_exact() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0]).unwrap();
        let deltas: Vec<f64> = (0..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect();
        let dev = phase_invariance_check(&a, &basis(2, 0), &basis(2, 1), &deltas).unwrap();
        assert!(dev <= 1e-15, "deviation {dev}");
    }

    #[test]
    fn coupled_states_are_not_in_the_invariance_class() {
        let dense = pauli_x();
        let result =
            phase_invariance_check(&dense, &basis(2, 0), &basis(2, 1), &[0.0, 1.0]);
        assert!(matches!(result, Err(Error::NotInClass(_))));
    }

    #[test]
    fn hermiticity_is_validated_and_enforced() {
        let skew = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(HermitianOperator::new(skew).is_err());
        // within tolerance: symmetrized exactly
        let nearly = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.5, 1e-13), c(0.5, -1e-13 + 1e-14), c(2.0, 0.0)],
        );
        let a = HermitianOperator::new(nearly).unwrap();
        assert_eq!(a.matrix()[(0, 1)], a.matrix()[(1, 0)].conj());
    }

    #[test]
    fn matrix_wire_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let a = random_hermitian(4, &mut rng).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"d\":4") && json.contains("\"re\":"));
        let back: HermitianOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);

        let bad = r#"{"d":2,"re":[0,1,1,0],"im":[0,0.5,0,0]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(bad).is_err());
    }

    #[test]
    fn haar_vectors_are_unit_and_seeded() {
        let mut rng1 = ChaCha12Rng::seed_from_u64(3);
        let mut rng2 = ChaCha12Rng::seed_from_u64(3);
        let v1 = haar_unit_vector(6, &mut rng1);
        let v2 = haar_unit_vector(6, &mut rng2);
        assert_abs_diff_eq!(v1.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(v1, v2);
    }
}
