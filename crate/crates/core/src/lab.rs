//! States, the PPT test, witness evaluation, block-positivity estimates and
//! the search for PPT states a witness detects.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigen, min_eigenvalue, partial_transpose, CMatrix, Subsystem, C64, HERMITIAN_TOL};
use crate::random::{haar_vector, random_mixed_state, stream_rng};
use crate::witness::Witness;

/// Thresholds used by the lab. The CLI `--tol` flag overrides all three.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Smallest eigenvalue accepted for a state.
    pub psd: f64,
    /// Smallest eigenvalue of `ρ^Γ` accepted as PPT.
    pub ppt: f64,
    /// `Tr(Wρ) < −detection` counts as detected.
    pub detection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-9,
            ppt: 1e-9,
            detection: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            psd: tol,
            ppt: tol,
            detection: tol,
        }
    }
}

/// Checks a `d×d` density matrix with the default tolerances.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    let d = rho.rows();
    validate_state(rho, (d, 1), false).map(|_| ())
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityState {
    pub matrix: CMatrix,
    pub dims: (usize, usize),
    /// Trace before renormalization.
    pub original_trace: f64,
    pub renormalized: bool,
    pub min_eigenvalue: f64,
}

pub fn validate_state(m: &CMatrix, dims: (usize, usize), renormalize: bool) -> Result<DensityState> {
    validate_state_with(m, dims, renormalize, &Tolerances::default())
}

pub fn validate_state_with(
    m: &CMatrix,
    dims: (usize, usize),
    renormalize: bool,
    tol: &Tolerances,
) -> Result<DensityState> {
    let n = dims.0 * dims.1;
    if !m.is_square() || m.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, expected {n}x{n}",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let tr = m.trace().re;
    let matrix = if renormalize {
        if tr.abs() < 1e-300 {
            return Err(Error::ZeroTrace);
        }
        m.hermitian_part().scale(1.0 / tr)
    } else {
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "trace is {tr}, expected 1 (pass renormalize to rescale)"
            )));
        }
        m.hermitian_part()
    };
    let lam = min_eigenvalue(&matrix);
    if lam < -tol.psd {
        return Err(Error::NotPsd { min_eigenvalue: lam });
    }
    Ok(DensityState {
        matrix,
        dims,
        original_trace: tr,
        renormalized: renormalize && tr != 1.0,
        min_eigenvalue: lam,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PptCheck {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

pub fn is_ppt(state: &DensityState) -> PptCheck {
    is_ppt_on(state, Subsystem::B, 1e-9)
}

pub fn is_ppt_on(state: &DensityState, subsystem: Subsystem, tol: f64) -> PptCheck {
    let pt = partial_transpose(&state.matrix, state.dims, subsystem).expect("validated dimensions");
    let lam = min_eigenvalue(&pt);
    PptCheck {
        ppt: lam >= -tol,
        min_eigenvalue: lam,
    }
}

/// `Re Tr(Wρ)`.
pub fn evaluate(w: &Witness, state: &DensityState) -> Result<f64> {
    evaluate_matrix(&w.matrix, &state.matrix)
}

pub fn evaluate_matrix(w: &CMatrix, rho: &CMatrix) -> Result<f64> {
    if w.rows() != rho.rows() || w.cols() != rho.cols() {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, state is {}x{}",
            w.rows(),
            w.cols(),
            rho.rows(),
            rho.cols()
        )));
    }
    // Tr(Wρ) = Σ_ij W_ij ρ_ji
    let n = w.rows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += w[(i, j)] * rho[(j, i)];
        }
    }
    debug_assert!(s.im.abs() <= 1e-10 * w.max_abs().max(1.0));
    Ok(s.re)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub state_valid: bool,
    pub original_trace: f64,
    pub renormalized: bool,
    pub state_min_eigenvalue: f64,
    pub ppt: bool,
    pub ppt_min_eigenvalue: f64,
    pub expectation: f64,
    pub detected: bool,
    pub indecomposable_certified: bool,
    pub tolerances: Tolerances,
}

pub fn certify_indecomposable(w: &Witness, state: &DensityState) -> Result<CertificateReport> {
    certify_with(w, state, &Tolerances::default())
}

pub fn certify_with(w: &Witness, state: &DensityState, tol: &Tolerances) -> Result<CertificateReport> {
    let expectation = evaluate(w, state)?;
    let trace_ok = (state.matrix.trace().re - 1.0).abs() <= 1e-9;
    let state_valid = trace_ok && state.min_eigenvalue >= -tol.psd;
    let ppt = is_ppt_on(state, Subsystem::B, tol.ppt);
    let detected = expectation < -tol.detection;
    Ok(CertificateReport {
        state_valid,
        original_trace: state.original_trace,
        renormalized: state.renormalized,
        state_min_eigenvalue: state.min_eigenvalue,
        ppt: ppt.ppt,
        ppt_min_eigenvalue: ppt.min_eigenvalue,
        expectation,
        detected,
        indecomposable_certified: state_valid && ppt.ppt && detected,
        tolerances: *tol,
    })
}

/// `⟨a|⊗𝟙 · W · |a⟩⊗𝟙` (a `d_B×d_B` matrix).
fn contract_a(w: &CMatrix, dims: (usize, usize), a: &[C64]) -> CMatrix {
    let (da, db) = dims;
    CMatrix::from_fn(db, db, |j, l| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..da {
            for k in 0..da {
                s += a[i].conj() * w[(i * db + j, k * db + l)] * a[k];
            }
        }
        s
    })
}

/// `⟨b|_B · W · |b⟩_B` (a `d_A×d_A` matrix).
fn contract_b(w: &CMatrix, dims: (usize, usize), b: &[C64]) -> CMatrix {
    let (da, db) = dims;
    CMatrix::from_fn(da, da, |i, k| {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..db {
            for l in 0..db {
                s += b[j].conj() * w[(i * db + j, k * db + l)] * b[l];
            }
        }
        s
    })
}

fn lowest(m: &CMatrix) -> (f64, Vec<C64>) {
    let spec = hermitian_eigen(&m.hermitian_part()).expect("Hermitian by construction");
    (spec.eigenvalues[0], spec.vector(0))
}

/// Objective values of one see-saw run from the starting vector `a`.
pub fn see_saw_trace(w: &CMatrix, dims: (usize, usize), a: &[C64], iters: usize) -> (Vec<f64>, Vec<C64>, Vec<C64>) {
    let mut a = a.to_vec();
    let mut b = Vec::new();
    let mut values = Vec::new();
    for _ in 0..iters {
        let (_, nb) = lowest(&contract_a(w, dims, &a));
        b = nb;
        let (val, na) = lowest(&contract_b(w, dims, &b));
        a = na;
        let done = values.last().is_some_and(|&prev: &f64| (prev - val).abs() < 1e-12);
        values.push(val);
        if done {
            break;
        }
    }
    (values, a, b)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeeSawResult {
    pub min: f64,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

/// Estimates `min ⟨a⊗b|W|a⊗b⟩` over unit product vectors. Restart `r`
/// starts from a Haar-random `a` drawn from stream `r` of `seed`.
pub fn block_positivity_min(
    w: &CMatrix,
    dims: (usize, usize),
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<SeeSawResult> {
    if !w.is_square() || w.rows() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, dims {:?}",
            w.rows(),
            w.cols(),
            dims
        )));
    }
    if restarts == 0 || iters == 0 {
        return Err(Error::InvalidInput("restarts and iters must be positive".into()));
    }
    let w = w.hermitian_part();
    let (min, a, b) = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let a0 = haar_vector(dims.0, &mut rng);
            let (values, a, b) = see_saw_trace(&w, dims, &a0, iters);
            (*values.last().unwrap(), a, b)
        })
        .reduce_with(|x, y| if y.0 < x.0 { y } else { x })
        .unwrap();
    Ok(SeeSawResult {
        min,
        restarts,
        iters,
        seed,
        a,
        b,
    })
}

/// Projects Hermitian `x` onto `{ρ ⪰ 0, Tr ρ = 1}`.
fn project_to_states(x: &CMatrix) -> CMatrix {
    let spec = hermitian_eigen(&x.hermitian_part()).expect("Hermitian");
    let lam = simplex_projection(&spec.eigenvalues);
    rebuild(&spec.eigenvectors, &lam)
}

/// Clips negative eigenvalues of `x` to zero.
fn project_to_psd(x: &CMatrix) -> CMatrix {
    let spec = hermitian_eigen(&x.hermitian_part()).expect("Hermitian");
    let lam: Vec<f64> = spec.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    rebuild(&spec.eigenvectors, &lam)
}

fn rebuild(vectors: &CMatrix, lam: &[f64]) -> CMatrix {
    let n = lam.len();
    CMatrix::from_fn(n, n, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for (k, &l) in lam.iter().enumerate() {
            if l != 0.0 {
                s += vectors[(i, k)] * vectors[(j, k)].conj() * l;
            }
        }
        s
    })
}

/// Euclidean projection onto the probability simplex.
fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PptSearchOutcome {
    pub found: Option<DensityState>,
    pub expectation: Option<f64>,
    /// Restart that produced `found`.
    pub restart: Option<usize>,
    pub restarts_run: usize,
    /// Lowest expectation over all feasible candidates tried.
    pub best_expectation: f64,
    pub seed: u64,
}

fn search_restart(w: &CMatrix, wn: &CMatrix, dims: (usize, usize), iters: usize, seed: u64, r: usize) -> (CMatrix, f64) {
    let n = dims.0 * dims.1;
    let mut rng = stream_rng(seed, r as u64);
    let mut rho = random_mixed_state(n, &mut rng);
    let step = 0.05;
    for _ in 0..iters {
        rho = &rho - &wn.scale(step);
        for _ in 0..3 {
            rho = project_to_states(&rho);
            let pt = partial_transpose(&rho, dims, Subsystem::B).unwrap();
            rho = partial_transpose(&project_to_psd(&pt), dims, Subsystem::B).unwrap();
        }
        rho = project_to_states(&rho);
    }
    let fixed = make_feasible(&rho, dims);
    let e = evaluate_matrix(w, &fixed).unwrap();
    (fixed, e)
}

/// Mixes `rho` with `𝟙/n` just enough that both `ρ` and `ρ^Γ` are PSD.
fn make_feasible(rho: &CMatrix, dims: (usize, usize)) -> CMatrix {
    let n = dims.0 * dims.1;
    let pt = partial_transpose(rho, dims, Subsystem::B).unwrap();
    let low = min_eigenvalue(rho).min(min_eigenvalue(&pt));
    if low >= 0.0 {
        return rho.clone();
    }
    let inv = 1.0 / n as f64;
    // (1−p)·low + p/n = margin
    let margin = 1e-12;
    let p = ((margin - low) / (inv - low)).min(1.0);
    &rho.scale(1.0 - p) + &CMatrix::identity(n).scale(p * inv)
}

/// Heuristic search for a PPT state with `Tr(Wρ) < −1e−7`: projected
/// gradient steps on `Tr(Wρ)` alternated with projections onto states and
/// PPT operators. Restarts run in parallel; the lowest successful restart
/// index is returned, so the outcome depends only on the seed.
pub fn ppt_detection_search(
    w: &Witness,
    dims: (usize, usize),
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<PptSearchOutcome> {
    let n = dims.0 * dims.1;
    if w.matrix.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, dims {:?}",
            w.matrix.rows(),
            w.matrix.cols(),
            dims
        )));
    }
    let scale = w.matrix.frob_norm();
    if scale == 0.0 {
        return Err(Error::InvalidInput("witness is zero".into()));
    }
    let wn = w.matrix.scale(1.0 / scale);
    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut best = f64::INFINITY;
    let mut start = 0;
    while start < restarts {
        let end = (start + chunk).min(restarts);
        let results: Vec<(CMatrix, f64)> = (start..end)
            .into_par_iter()
            .map(|r| search_restart(&w.matrix, &wn, dims, iters, seed, r))
            .collect();
        for (i, (rho, e)) in results.into_iter().enumerate() {
            best = best.min(e);
            if e < -1e-7 {
                let pt_min = min_eigenvalue(&partial_transpose(&rho, dims, Subsystem::B)?);
                let lam = min_eigenvalue(&rho);
                if lam >= -1e-10 && pt_min >= -1e-10 {
                    return Ok(PptSearchOutcome {
                        found: Some(DensityState {
                            matrix: rho,
                            dims,
                            original_trace: 1.0,
                            renormalized: false,
                            min_eigenvalue: lam,
                        }),
                        expectation: Some(e),
                        restart: Some(start + i),
                        restarts_run: start + i + 1,
                        best_expectation: best,
                        seed,
                    });
                }
            }
        }
        start = end;
    }
    Ok(PptSearchOutcome {
        found: None,
        expectation: None,
        restart: None,
        restarts_run: restarts,
        best_expectation: best,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use crate::witness::reduction_witness;

    fn max_entangled(d: usize) -> CMatrix {
        let mut v = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
        }
        CMatrix::outer(&v)
    }

    #[test]
    fn maximally_mixed_is_valid_and_ppt() {
        let s = validate_state(&CMatrix::identity(9).scale(1.0 / 9.0), (3, 3), false).unwrap();
        assert!(!s.renormalized);
        assert!(is_ppt(&s).ppt);
    }

    #[test]
    fn renormalization_is_explicit() {
        let m = CMatrix::identity(9).scale(2.0);
        assert!(validate_state(&m, (3, 3), false).is_err());
        let s = validate_state(&m, (3, 3), true).unwrap();
        assert!(s.renormalized && (s.original_trace - 18.0).abs() < 1e-12);
        assert!(matches!(
            validate_state(&CMatrix::zeros(9, 9), (3, 3), true),
            Err(Error::ZeroTrace)
        ));
        assert!(matches!(
            validate_state(&CMatrix::diag_real(&[1.2, -0.2]), (2, 1), false),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn entangled_state_is_npt() {
        let s = validate_state(&max_entangled(3), (3, 3), false).unwrap();
        let p = is_ppt(&s);
        assert!(!p.ppt);
        assert!((p.min_eigenvalue + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn product_mixture_is_ppt() {
        let mut rng = stream_rng(4, 0);
        let mut rho = CMatrix::zeros(9, 9);
        for _ in 0..5 {
            let a = CMatrix::outer(&haar_vector(3, &mut rng));
            let b = CMatrix::outer(&haar_vector(3, &mut rng));
            rho += &crate::matrix::kron(&a, &b).scale(0.2);
        }
        let s = validate_state(&rho, (3, 3), false).unwrap();
        assert!(is_ppt(&s).ppt);
    }

    #[test]
    fn identity_witness_never_certifies() {
        let s = validate_state(&CMatrix::identity(9).scale(1.0 / 9.0), (3, 3), false).unwrap();
        let w = Witness::from_matrix(CMatrix::identity(9)).unwrap();
        assert!((evaluate(&w, &s).unwrap() - 1.0).abs() < 1e-12);
        let r = certify_indecomposable(&w, &s).unwrap();
        assert!(r.state_valid && r.ppt && !r.detected && !r.indecomposable_certified);
    }

    #[test]
    fn reduction_witness_detects_npt_state_only() {
        let w = Witness::from_matrix(reduction_witness(3)).unwrap();
        let s = validate_state(&max_entangled(3), (3, 3), false).unwrap();
        let r = certify_indecomposable(&w, &s).unwrap();
        assert!((r.expectation + 2.0).abs() < 1e-12);
        assert!(r.detected && !r.ppt && !r.indecomposable_certified);
    }

    #[test]
    fn see_saw_on_identity_and_minus_identity() {
        let plus = block_positivity_min(&CMatrix::identity(9), (3, 3), 4, 50, 0).unwrap();
        assert!((plus.min - 1.0).abs() < 1e-12);
        let minus = block_positivity_min(&CMatrix::identity(9).scale(-1.0), (3, 3), 4, 50, 0).unwrap();
        assert!((minus.min + 1.0).abs() < 1e-12);
    }

    #[test]
    fn see_saw_finds_reduction_witness_zero() {
        let r = block_positivity_min(&reduction_witness(3), (3, 3), 20, 200, 1).unwrap();
        assert!(r.min >= -1e-8 && r.min < 1e-6, "{}", r.min);
    }

    #[test]
    fn see_saw_is_monotone() {
        let mut rng = stream_rng(8, 0);
        let w = crate::random::random_hermitian(9, &mut rng);
        let a = haar_vector(3, &mut rng);
        let (values, _, _) = see_saw_trace(&w, (3, 3), &a, 100);
        for pair in values.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn see_saw_is_reproducible() {
        let mut rng = stream_rng(8, 1);
        let w = crate::random::random_hermitian(9, &mut rng);
        let a = block_positivity_min(&w, (3, 3), 16, 100, 5).unwrap();
        let b = block_positivity_min(&w, (3, 3), 16, 100, 5).unwrap();
        assert_eq!(a.min, b.min);
    }

    #[test]
    fn simplex_projection_basics() {
        let p = simplex_projection(&[0.5, 0.2, 0.3]);
        assert!(p.iter().zip([0.5, 0.2, 0.3]).all(|(a, b)| (a - b).abs() < 1e-15));
        let p = simplex_projection(&[2.0, -1.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn search_finds_nothing_for_positive_witness() {
        let w = Witness::from_matrix(CMatrix::identity(9)).unwrap();
        let out = ppt_detection_search(&w, (3, 3), 4, 20, 0).unwrap();
        assert!(out.found.is_none());
    }

    #[test]
    fn search_finds_nothing_for_reduction_witness() {
        let w = Witness::from_matrix(reduction_witness(3)).unwrap();
        let out = ppt_detection_search(&w, (3, 3), 16, 100, 0).unwrap();
        assert!(out.found.is_none(), "{:?}", out.expectation);
        assert!(out.best_expectation > -1e-7);
    }
}
