//! Entanglement witnesses in the Choi, rescaled, CCNR, two-outcome and
//! weighted forms.
//!
//! ```text
//! W̃  = c𝟙 + Σ_{α>L} J_α − Σ_{α≤L} J_α,      c = (d−1)/d² · M²(√M+1)²
//! J_α = (M/d) Σ_{k,l} O_{kl} H̄_{α,l} ⊗ H_{α,k}
//!     = (M/d) Σ_{k,l<M} 𝒬_{kl} Ḡ_{α,l} ⊗ G_{α,k}
//! W′  = 𝟙 − Σ_{μν} Q_{μν} G_μᵀ ⊗ G_ν
//! ```
//!
//! Conjugates are entrywise in the computational basis and sit on the first
//! tensor factor.

use serde::{Deserialize, Serialize};

use crate::bases::GroupedBasis;
use crate::error::{Error, Result};
use crate::maps::{validate_rotation, MapSpec, Rotation, RotationMode, SuperOp};
use crate::matrix::{kron, min_eigenvalue, real_spectral_norm, CMatrix, HERMITIAN_TOL};
use crate::povm::build_h_family;

/// A witness is flagged proper when its smallest eigenvalue is below this.
pub const PROPER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessForm {
    Choi,
    Rescaled,
    Ccnr,
    M2,
    Weighted,
    /// Loaded or transcribed matrix with no construction attached.
    Raw,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Recipe {
    pub basis: Option<String>,
    pub d: usize,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub rotations: Option<Vec<Rotation>>,
    pub weights: Option<Vec<f64>>,
    /// Largest singular value of the effective CCNR matrix `Q`.
    pub q_norm: Option<f64>,
    /// Multiply `matrix` by this to get the display form (largest diagonal 1).
    pub display_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub form: WitnessForm,
    pub matrix: CMatrix,
    pub recipe: Recipe,
    pub min_eigenvalue: f64,
    pub proper: bool,
}

impl Witness {
    pub fn new(form: WitnessForm, matrix: CMatrix, mut recipe: Recipe) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let n = matrix.rows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::DimensionMismatch(format!("witness is {n}x{n}, not d²×d²")));
        }
        let matrix = matrix.hermitian_part();
        recipe.d = d;
        recipe.display_scale = display_scale(&matrix);
        let lam = min_eigenvalue(&matrix);
        Ok(Self {
            form,
            matrix,
            recipe,
            min_eigenvalue: lam,
            proper: lam < -PROPER_TOL,
        })
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        Self::new(WitnessForm::Raw, matrix, Recipe::default())
    }

    pub fn d(&self) -> usize {
        self.recipe.d
    }

    /// Matrix rescaled so that its largest diagonal entry is one.
    pub fn display(&self) -> CMatrix {
        self.matrix.scale(self.recipe.display_scale)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.form, self.matrix.scale(s), self.recipe.clone())
    }
}

fn display_scale(m: &CMatrix) -> f64 {
    let top = (0..m.rows()).map(|i| m[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    if top > 0.0 {
        1.0 / top
    } else {
        1.0
    }
}

/// Result of comparing two matrices up to a positive factor.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Proportionality {
    /// Least-squares `r` with `a ≈ r·b`.
    pub ratio: f64,
    /// `max |a/r − b| / max |b|`.
    pub max_deviation: f64,
}

impl Proportionality {
    pub fn holds(&self, tol: f64) -> bool {
        self.ratio > 0.0 && self.max_deviation <= tol
    }
}

pub fn proportionality(a: &CMatrix, b: &CMatrix) -> Result<Proportionality> {
    let ab = crate::matrix::frob_inner(b, a)?;
    let bb = b.frob_norm().powi(2);
    if bb == 0.0 {
        return Err(Error::InvalidInput("reference matrix is zero".into()));
    }
    let ratio = ab.re / bb;
    let max_deviation = if ratio == 0.0 {
        f64::INFINITY
    } else {
        a.scale(1.0 / ratio).max_abs_diff(b) / b.max_abs()
    };
    Ok(Proportionality { ratio, max_deviation })
}

/// `c = (d−1)/d² · M²(√M+1)²`.
pub fn identity_weight(d: usize, m: usize) -> f64 {
    let (d, m) = (d as f64, m as f64);
    let s = m.sqrt() + 1.0;
    (d - 1.0) / (d * d) * m * m * s * s
}

/// `A` with `H_k = Σ_j A_{kj} G_j`: `M×(M−1)`.
fn h_coefficients(m: usize) -> Vec<Vec<f64>> {
    let s = (m as f64).sqrt();
    (0..m)
        .map(|k| {
            (0..m - 1)
                .map(|j| {
                    if k == m - 1 {
                        s + 1.0
                    } else if k == j {
                        1.0 - s * (s + 1.0)
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect()
}

/// `𝒬 = AᵀOA`, valid for any `M×M` matrix `O`.
pub fn q_block(o: &Rotation) -> Vec<Vec<f64>> {
    let m = o.len();
    let a = h_coefficients(m);
    (0..m - 1)
        .map(|k| {
            (0..m - 1)
                .map(|l| {
                    let mut s = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            s += a[i][k] * o[i][j] * a[j][l];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `𝒬_{kl} = M(O_{MM}−1) + M(√M+1)² O_{kl} − M(√M+1)(O_{Ml} + O_{kM})`;
/// agrees with [`q_block`] when rows and columns of `O` sum to one.
pub fn q_block_closed_form(o: &Rotation) -> Vec<Vec<f64>> {
    let m = o.len();
    let (mf, s) = (m as f64, (m as f64).sqrt() + 1.0);
    let last = m - 1;
    (0..last)
        .map(|k| {
            (0..last)
                .map(|l| {
                    mf * (o[last][last] - 1.0) + mf * s * s * o[k][l] - mf * s * (o[last][l] + o[k][last])
                })
                .collect()
        })
        .collect()
}

fn check_rotation_shape(o: &Rotation, m: usize, alpha: usize) -> Result<()> {
    if o.len() != m || o.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidRotation {
            alpha,
            reason: format!("expected {m}x{m}"),
        });
    }
    Ok(())
}

fn j_from_h(basis: &GroupedBasis, o: &Rotation, alpha: usize) -> CMatrix {
    let (d, m) = (basis.d(), basis.m());
    let hs = &build_h_family(basis).operators[alpha - 1];
    let conj: Vec<CMatrix> = hs.iter().map(CMatrix::conj).collect();
    let mut j = CMatrix::zeros(d * d, d * d);
    for k in 0..m {
        for l in 0..m {
            if o[k][l] != 0.0 {
                j += &kron(&conj[l], &hs[k]).scale(o[k][l]);
            }
        }
    }
    j.scale(m as f64 / d as f64)
}

fn j_from_g(basis: &GroupedBasis, q: &[Vec<f64>], alpha: usize) -> CMatrix {
    let (d, m) = (basis.d(), basis.m());
    let gs = basis.group(alpha);
    let mut j = CMatrix::zeros(d * d, d * d);
    for k in 0..m - 1 {
        for l in 0..m - 1 {
            if q[k][l] != 0.0 {
                j += &kron(&gs[l].conj(), &gs[k]).scale(q[k][l]);
            }
        }
    }
    j.scale(m as f64 / d as f64)
}

/// `J_α` from the `H` operators, cross-checked against the `G`-form with
/// `𝒬 = AᵀOA`.
pub fn j_operator(basis: &GroupedBasis, o: &Rotation, alpha: usize) -> Result<CMatrix> {
    if alpha == 0 || alpha > basis.n() {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside 1..={}", basis.n())));
    }
    check_rotation_shape(o, basis.m(), alpha)?;
    let j = j_from_h(basis, o, alpha);
    let via_g = j_from_g(basis, &q_block(o), alpha);
    let dev = j.max_abs_diff(&via_g);
    if dev > 1e-10 * j.max_abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "H-form and G-form of J_{alpha} disagree by {dev:.3e}"
        )));
    }
    Ok(j)
}

/// `K_α = (M/d) Σ O_{kl} Ē_{α,l} ⊗ E_{α,k}`.
pub fn k_operator(spec: &MapSpec, alpha: usize) -> CMatrix {
    let (d, m) = (spec.povm.params.d, spec.povm.params.m);
    let es = &spec.povm.elements[alpha - 1];
    let o = &spec.rotations.matrices[alpha - 1];
    let mut k_op = CMatrix::zeros(d * d, d * d);
    for k in 0..m {
        for l in 0..m {
            if o[k][l] != 0.0 {
                k_op += &kron(&es[l].conj(), &es[k]).scale(o[k][l]);
            }
        }
    }
    k_op.scale(m as f64 / d as f64)
}

/// `(1/b)(a/d·𝟙 + Σ_{α>L} K_α − Σ_{α≤L} K_α)`, summed directly.
pub fn choi_from_k(spec: &MapSpec) -> CMatrix {
    let d = spec.povm.params.d;
    let mut w = CMatrix::identity(d * d).scale(spec.a / d as f64);
    for alpha in 1..=spec.povm.params.n {
        w += &k_operator(spec, alpha).scale(spec.sign(alpha));
    }
    w.scale(1.0 / spec.b)
}

/// The Choi matrix of a map as a witness.
pub fn choi_witness(phi: &SuperOp) -> Result<Witness> {
    Witness::new(WitnessForm::Choi, phi.choi.clone(), Recipe::default())
}

fn rotations_allowed(rotations: &[Rotation], m: usize) -> Result<()> {
    for (a, o) in rotations.iter().enumerate() {
        check_rotation_shape(o, m, a + 1)?;
        let ok = [RotationMode::Strict, RotationMode::SignFlip, RotationMode::Zero]
            .into_iter()
            .any(|mode| validate_rotation(o, mode).valid);
        if !ok {
            return Err(Error::InvalidRotation {
                alpha: a + 1,
                reason: "neither strict, sign-flipping nor zero".into(),
            });
        }
    }
    Ok(())
}

/// `c𝟙 − Σ_α w_α J_α`. Weights `+1` for `α ≤ L` and `−1` beyond reproduce
/// [`rescaled_witness`].
pub fn weighted_witness(basis: &GroupedBasis, rotations: &[Rotation], weights: &[f64]) -> Result<Witness> {
    let (d, m, n) = (basis.d(), basis.m(), basis.n());
    if rotations.len() != n || weights.len() != n {
        return Err(Error::InvalidInput(format!(
            "need {n} rotations and weights, got {} and {}",
            rotations.len(),
            weights.len()
        )));
    }
    rotations_allowed(rotations, m)?;
    let mut w = CMatrix::identity(d * d).scale(identity_weight(d, m));
    let mut q_norm = 1.0f64;
    let s = (m as f64).sqrt() + 1.0;
    for alpha in 1..=n {
        let wa = weights[alpha - 1];
        if wa != 0.0 {
            w -= &j_operator(basis, &rotations[alpha - 1], alpha)?.scale(wa);
        }
        let block = real_spectral_norm(&q_block(&rotations[alpha - 1]));
        q_norm = q_norm.max(wa.abs() * block / (m as f64 * s * s));
    }
    Witness::new(
        WitnessForm::Weighted,
        w,
        Recipe {
            basis: Some(basis.name().to_string()),
            m: Some(m),
            rotations: Some(rotations.to_vec()),
            weights: Some(weights.to_vec()),
            q_norm: Some(q_norm),
            ..Recipe::default()
        },
    )
}

/// `W̃ = c𝟙 + Σ_{α>L} J_α − Σ_{α≤L} J_α`; does not depend on `x`.
pub fn rescaled_witness(basis: &GroupedBasis, rotations: &[Rotation], l: usize) -> Result<Witness> {
    let n = basis.n();
    if l > n {
        return Err(Error::InvalidInput(format!("L = {l} exceeds N = {n}")));
    }
    let weights: Vec<f64> = (1..=n).map(|a| if a <= l { 1.0 } else { -1.0 }).collect();
    let mut w = weighted_witness(basis, rotations, &weights)?;
    w.form = WitnessForm::Rescaled;
    w.recipe.l = Some(l);
    w.recipe.weights = None;
    Ok(w)
}

/// Full orthonormal Hermitian basis `G_0…G_{d²−1}` and real `Q`.
#[derive(Clone, Debug)]
pub struct CcnrSpec {
    pub basis: Vec<CMatrix>,
    pub q: Vec<Vec<f64>>,
}

impl CcnrSpec {
    /// Block-diagonal `Q` reproducing `d/(M²(√M+1)²)·W̃`: `Q₀₀ = 1`, block
    /// `α` is `±𝒬ᵀ/(M(√M+1)²)` (`+` for subtracted groups) and completion
    /// elements of an incomplete basis get zero rows.
    pub fn from_recipe(basis: &GroupedBasis, rotations: &[Rotation], l: usize) -> Result<Self> {
        let (d, m, n) = (basis.d(), basis.m(), basis.n());
        if rotations.len() != n {
            return Err(Error::InvalidInput(format!("need {n} rotations")));
        }
        rotations_allowed(rotations, m)?;
        let s = (m as f64).sqrt() + 1.0;
        let norm = m as f64 * s * s;
        let dim = d * d;
        let mut q = vec![vec![0.0; dim]; dim];
        q[0][0] = 1.0;
        for alpha in 1..=n {
            let sign = if alpha <= l { 1.0 } else { -1.0 };
            let block = q_block(&rotations[alpha - 1]);
            let off = 1 + (alpha - 1) * (m - 1);
            for mu in 0..m - 1 {
                for nu in 0..m - 1 {
                    q[off + mu][off + nu] = sign * block[nu][mu] / norm;
                }
            }
        }
        Ok(Self {
            basis: basis.completed_elements(),
            q,
        })
    }

    pub fn identity(basis: Vec<CMatrix>) -> Self {
        let n = basis.len();
        let q = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { basis, q }
    }
}

/// `W′ = 𝟙 − Σ Q_{μν} G_μᵀ ⊗ G_ν`, requiring `‖Q‖₂ ≤ 1`.
pub fn ccnr_witness(spec: &CcnrSpec) -> Result<Witness> {
    let n = spec.basis.len();
    let d = spec.basis.first().map(CMatrix::rows).unwrap_or(0);
    if d == 0 || n != d * d {
        return Err(Error::DimensionMismatch(format!("need d² basis elements, got {n}")));
    }
    if spec.q.len() != n || spec.q.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("Q must be {n}x{n}")));
    }
    let dev = crate::bases::gram_deviation(&spec.basis);
    if dev > crate::bases::ORTHONORMAL_TOL {
        return Err(Error::NonOrthonormal(dev));
    }
    let norm = real_spectral_norm(&spec.q);
    if norm > 1.0 + 1e-9 {
        return Err(Error::SingularValueViolation(norm));
    }
    let mut w = CMatrix::identity(n);
    let transposed: Vec<CMatrix> = spec.basis.iter().map(CMatrix::transpose).collect();
    for mu in 0..n {
        for nu in 0..n {
            let q = spec.q[mu][nu];
            if q != 0.0 {
                w -= &kron(&transposed[mu], &spec.basis[nu]).scale(q);
            }
        }
    }
    Witness::new(
        WitnessForm::Ccnr,
        w,
        Recipe {
            q_norm: Some(norm),
            ..Recipe::default()
        },
    )
}

/// `𝟙 + Σ_{s_α=+1} G_αᵀ⊗G_α − Σ_{s_α=−1} G_αᵀ⊗G_α` for a two-outcome
/// grouping; `signs[0]` belongs to `G₀ = 𝟙/√d`.
pub fn m2_witness(basis: &GroupedBasis, signs: &[i8]) -> Result<Witness> {
    if basis.m() != 2 {
        return Err(Error::InvalidGrouping(format!("need M = 2, basis has M = {}", basis.m())));
    }
    let n = basis.n();
    if signs.len() != n + 1 || signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::InvalidInput(format!("need {} signs of ±1", n + 1)));
    }
    let d = basis.d();
    let mut w = CMatrix::identity(d * d);
    for (g, &s) in basis.elements().iter().zip(signs) {
        w += &kron(&g.transpose(), g).scale(s as f64);
    }
    Witness::new(
        WitnessForm::M2,
        w,
        Recipe {
            basis: Some(basis.name().to_string()),
            m: Some(2),
            weights: Some(signs.iter().map(|&s| s as f64).collect()),
            ..Recipe::default()
        },
    )
}

/// `𝟙 − dP₊` with `P₊` the projector onto `Σ|ii⟩/√d`.
pub fn reduction_witness(d: usize) -> CMatrix {
    let mut w = CMatrix::identity(d * d);
    for i in 0..d {
        for j in 0..d {
            w[(i * d + i, j * d + j)] -= crate::matrix::c(1.0, 0.0);
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::resolve_basis;
    use crate::maps::{build_map, cycle_rotation, identity_rotation, RotationSet};
    use crate::povm::build_povm_for_x;

    fn gm3() -> GroupedBasis {
        resolve_basis("gellmann:3", "ex3").unwrap()
    }

    #[test]
    fn q_block_identity_and_closed_form() {
        for m in 2..=5 {
            let s = (m as f64).sqrt() + 1.0;
            let q = q_block(&identity_rotation(m));
            for k in 0..m - 1 {
                for l in 0..m - 1 {
                    let want = if k == l { m as f64 * s * s } else { 0.0 };
                    assert!((q[k][l] - want).abs() < 1e-10);
                }
            }
            let cyc = cycle_rotation(m);
            let (a, b) = (q_block(&cyc), q_block_closed_form(&cyc));
            for k in 0..m - 1 {
                for l in 0..m - 1 {
                    assert!((a[k][l] - b[k][l]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn q_block_for_swap_is_negative() {
        let swap = cycle_rotation(2);
        let s = 2f64.sqrt() + 1.0;
        assert!((q_block(&swap)[0][0] + 2.0 * s * s).abs() < 1e-12);
        let b = resolve_basis("gellmann:3", "seq:2").unwrap();
        let j = j_operator(&b, &swap, 1).unwrap();
        let g = &b.group(1)[0];
        let want = kron(&g.transpose(), g).scale(-(2.0 / 3.0) * 2.0 * s * s);
        assert!(j.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn depolarizing_choi() {
        let phi = SuperOp::from_fn(3, crate::maps::apply_phi0);
        let w = choi_witness(&phi).unwrap();
        assert!(w.matrix.max_abs_diff(&CMatrix::identity(9).scale(1.0 / 3.0)) < 1e-15);
        assert!(!w.proper);
    }

    #[test]
    fn choi_contraction_matches_k_sum_and_rescaled_form() {
        let basis = gm3();
        let rot = vec![cycle_rotation(3); 4];
        let povm = build_povm_for_x(&basis, 0.5).unwrap();
        let t = povm.params.t;
        let spec = MapSpec::new(povm, RotationSet::strict(rot.clone()).unwrap(), 3).unwrap();
        let choi = choi_witness(&build_map(&spec).unwrap()).unwrap();
        assert!(choi.matrix.max_abs_diff(&choi_from_k(&spec)) < 1e-10);
        let rescaled = rescaled_witness(&basis, &rot, 3).unwrap();
        let scaled = choi.matrix.scale(spec.b / (t * t));
        assert!(scaled.max_abs_diff(&rescaled.matrix) < 1e-8);
    }

    #[test]
    fn reduction_map_from_identity_rotations() {
        let basis = gm3();
        let w = rescaled_witness(&basis, &vec![identity_rotation(3); 4], 4).unwrap();
        let p = proportionality(&w.matrix, &reduction_witness(3)).unwrap();
        assert!(p.holds(1e-10), "{p:?}");
        let s = 3f64.sqrt() + 1.0;
        assert!((p.ratio - 9.0 * s * s / 3.0).abs() < 1e-9);
        let ccnr = ccnr_witness(&CcnrSpec::identity(basis.elements())).unwrap();
        assert!(ccnr.matrix.max_abs_diff(&reduction_witness(3)) < 1e-12);
        assert!(ccnr.proper);
    }

    #[test]
    fn ccnr_embedding_reproduces_rescaled() {
        let basis = gm3();
        let rot = vec![cycle_rotation(3); 4];
        let spec = CcnrSpec::from_recipe(&basis, &rot, 3).unwrap();
        let w = ccnr_witness(&spec).unwrap();
        let r = rescaled_witness(&basis, &rot, 3).unwrap();
        let s = 3f64.sqrt() + 1.0;
        let factor = 3.0 / (9.0 * s * s);
        assert!(w.matrix.max_abs_diff(&r.matrix.scale(factor)) < 1e-10);
        assert!((w.recipe.q_norm.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ccnr_zero_and_oversized_q() {
        let basis = gm3().elements();
        let zero = CcnrSpec {
            basis: basis.clone(),
            q: vec![vec![0.0; 9]; 9],
        };
        let w = ccnr_witness(&zero).unwrap();
        assert!(w.matrix.max_abs_diff(&CMatrix::identity(9)) < 1e-15);
        assert!(!w.proper);
        let mut big = CcnrSpec::identity(basis);
        big.q[0][0] = 1.5;
        assert!(matches!(ccnr_witness(&big), Err(Error::SingularValueViolation(_))));
    }

    #[test]
    fn m2_all_plus_is_not_proper_and_all_minus_is_reduction() {
        let b = resolve_basis("gellmann:3", "seq:2").unwrap();
        let plus = m2_witness(&b, &[1; 9]).unwrap();
        assert!(!plus.proper);
        let minus = m2_witness(&b, &[-1; 9]).unwrap();
        assert!(minus.matrix.max_abs_diff(&reduction_witness(3)) < 1e-12);
        assert!(m2_witness(&gm3(), &[1; 5]).is_err());
    }

    #[test]
    fn m2_matches_rescaled_two_outcome_witness() {
        let b = resolve_basis("mub3", "seq:2").unwrap();
        let l = 3;
        let r = rescaled_witness(&b, &vec![identity_rotation(2); 8], l).unwrap();
        let mut signs = vec![-1i8; 4];
        signs.extend(std::iter::repeat(1).take(5));
        let w = m2_witness(&b, &signs).unwrap();
        assert!(proportionality(&r.matrix, &w.matrix).unwrap().holds(1e-10));
    }

    #[test]
    fn weighted_generalizes_rescaled() {
        let basis = gm3();
        let rot = vec![cycle_rotation(3); 4];
        let r = rescaled_witness(&basis, &rot, 4).unwrap();
        let w = weighted_witness(&basis, &rot, &[1.0; 4]).unwrap();
        assert!(r.matrix.max_abs_diff(&w.matrix) < 1e-12);
        let z = weighted_witness(&basis, &rot, &[0.0; 4]).unwrap();
        let c = identity_weight(3, 3);
        assert!(z.matrix.max_abs_diff(&CMatrix::identity(9).scale(c)) < 1e-12);
        assert!((z.recipe.q_norm.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_flip_rotation_allowed_in_ccnr_path_only() {
        let b = resolve_basis("gellmann:3", "seq:2").unwrap();
        let flip = vec![vec![-1.0, 0.0], vec![0.0, -1.0]];
        let mut rot = vec![identity_rotation(2); 8];
        rot[0] = flip.clone();
        assert!(rescaled_witness(&b, &rot, 8).is_ok());
        assert!(RotationSet::strict(rot).is_err());
        let bad = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        assert!(weighted_witness(&b, &vec![bad; 8], &[1.0; 8]).is_err());
    }

    #[test]
    fn proportionality_detects_sign_and_shape() {
        let a = reduction_witness(3);
        assert!(proportionality(&a.scale(2.5), &a).unwrap().holds(1e-12));
        assert!(!proportionality(&a.scale(-1.0), &a).unwrap().holds(1e-12));
        assert!(!proportionality(&CMatrix::identity(9), &a).unwrap().holds(1e-3));
    }

    #[test]
    fn display_scale_normalizes_diagonal() {
        let w = Witness::from_matrix(reduction_witness(3).scale(7.0)).unwrap();
        let disp = w.display();
        let top = (0..9).map(|i| disp[(i, i)].re).fold(f64::MIN, f64::max);
        assert!((top - 1.0).abs() < 1e-15);
        assert_eq!(w.d(), 3);
    }
}
