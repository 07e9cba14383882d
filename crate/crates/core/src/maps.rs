//! Positive trace-preserving maps built from symmetric measurements.
//!
//! ```text
//! Φ_α[X] = (M/d) Σ_{k,l} O_{kl} E_{α,k} Tr(X E_{α,l})
//! Φ₀[X]  = Tr(X) 𝟙/d
//! Φ      = (1/b) [a Φ₀ + Σ_{α>L} Φ_α − Σ_{α≤L} Φ_α]
//! ```
//!
//! with `y = (d − Mx)/(M(M−1))`, `b = (d−1)M(x−y)/d` and `a = b − N + 2L`.
//! Maps are stored as Choi matrices `W = Σ |k⟩⟨l| ⊗ Φ[|k⟩⟨l|]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, min_eigenvalue, CMatrix, Subsystem};
use crate::povm::SymmetricPovm;
use crate::random::{haar_pure_state, stream_rng};

/// Real `M×M` matrix, row-major.
pub type Rotation = Vec<Vec<f64>>;

const ROTATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// Orthogonal with every row and column summing to one.
    Strict,
    /// Orthogonal and sending the uniform vector to minus itself.
    SignFlip,
    /// The zero matrix.
    Zero,
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationCheck {
    pub valid: bool,
    pub orthogonality_dev: f64,
    pub row_sum_dev: f64,
    pub col_sum_dev: f64,
    pub reason: Option<String>,
}

fn is_square(o: &Rotation) -> bool {
    !o.is_empty() && o.iter().all(|r| r.len() == o.len())
}

/// Checks `o` against the requirements of `mode`.
pub fn validate_rotation(o: &Rotation, mode: RotationMode) -> RotationCheck {
    if !is_square(o) {
        return RotationCheck {
            valid: false,
            orthogonality_dev: f64::NAN,
            row_sum_dev: f64::NAN,
            col_sum_dev: f64::NAN,
            reason: Some("not a square matrix".into()),
        };
    }
    let m = o.len();
    let target_sum = match mode {
        RotationMode::Strict => 1.0,
        RotationMode::SignFlip => -1.0,
        RotationMode::Zero => 0.0,
    };
    let mut orth = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let dot: f64 = (0..m).map(|k| o[k][i] * o[k][j]).sum();
            let want = if i == j && mode != RotationMode::Zero { 1.0 } else { 0.0 };
            orth = orth.max((dot - want).abs());
        }
    }
    let row = (0..m)
        .map(|i| (o[i].iter().sum::<f64>() - target_sum).abs())
        .fold(0.0, f64::max);
    let col = (0..m)
        .map(|j| ((0..m).map(|i| o[i][j]).sum::<f64>() - target_sum).abs())
        .fold(0.0, f64::max);
    let reason = if orth > ROTATION_TOL {
        Some(match mode {
            RotationMode::Zero => "not the zero matrix".to_string(),
            _ => format!("not orthogonal (deviation {orth:.3e})"),
        })
    } else if row > ROTATION_TOL || col > ROTATION_TOL {
        Some(format!("row/column sums differ from {target_sum}"))
    } else {
        None
    };
    RotationCheck {
        valid: reason.is_none(),
        orthogonality_dev: orth,
        row_sum_dev: row,
        col_sum_dev: col,
        reason,
    }
}

/// First mode that `o` satisfies, if any.
pub fn classify_rotation(o: &Rotation) -> Option<RotationMode> {
    [RotationMode::Strict, RotationMode::SignFlip, RotationMode::Zero]
        .into_iter()
        .find(|&mode| validate_rotation(o, mode).valid)
}

pub fn identity_rotation(m: usize) -> Rotation {
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Cyclic permutation with `O_{k,k+1} = 1` (indices mod `M`).
pub fn cycle_rotation(m: usize) -> Rotation {
    (0..m)
        .map(|i| (0..m).map(|j| if j == (i + 1) % m { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Parses `identity:<M>`, `cycle:<M>` or `cycle-inv:<M>`.
pub fn rotation_preset(name: &str) -> Result<Rotation> {
    let (kind, m) = name
        .split_once(':')
        .ok_or_else(|| Error::Unknown(name.to_string()))?;
    let m: usize = m.parse().map_err(|_| Error::Unknown(name.to_string()))?;
    if m < 2 {
        return Err(Error::InvalidInput(format!("rotation size must be ≥ 2, got {m}")));
    }
    match kind {
        "identity" => Ok(identity_rotation(m)),
        "cycle" => Ok(cycle_rotation(m)),
        "cycle-inv" => {
            let o = cycle_rotation(m);
            Ok((0..m).map(|i| (0..m).map(|j| o[j][i]).collect()).collect())
        }
        _ => Err(Error::Unknown(name.to_string())),
    }
}

/// One rotation per group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationSet {
    pub matrices: Vec<Rotation>,
    pub modes: Vec<RotationMode>,
}

impl RotationSet {
    /// Validates every matrix against its mode.
    pub fn new(matrices: Vec<Rotation>, modes: Vec<RotationMode>) -> Result<Self> {
        if matrices.len() != modes.len() {
            return Err(Error::InvalidInput("one mode per rotation required".into()));
        }
        for (a, (o, &mode)) in matrices.iter().zip(&modes).enumerate() {
            let check = validate_rotation(o, mode);
            if let Some(reason) = check.reason {
                return Err(Error::InvalidRotation { alpha: a + 1, reason });
            }
        }
        Ok(Self { matrices, modes })
    }

    pub fn strict(matrices: Vec<Rotation>) -> Result<Self> {
        let n = matrices.len();
        Self::new(matrices, vec![RotationMode::Strict; n])
    }

    /// Infers each mode, rejecting matrices that fit none.
    pub fn classify(matrices: Vec<Rotation>) -> Result<Self> {
        let mut modes = Vec::with_capacity(matrices.len());
        for (a, o) in matrices.iter().enumerate() {
            modes.push(classify_rotation(o).ok_or_else(|| Error::InvalidRotation {
                alpha: a + 1,
                reason: "neither strict, sign-flipping nor zero".into(),
            })?);
        }
        Ok(Self { matrices, modes })
    }

    pub fn uniform(o: Rotation, n: usize) -> Result<Self> {
        Self::strict(vec![o; n])
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn all_strict(&self) -> bool {
        self.modes.iter().all(|&m| m == RotationMode::Strict)
    }
}

/// Parameters of the map `Φ`.
#[derive(Clone, Debug)]
pub struct MapSpec {
    pub povm: SymmetricPovm,
    pub rotations: RotationSet,
    /// Groups `1..=l` are subtracted, the rest added.
    pub l: usize,
    pub a: f64,
    pub b: f64,
    pub y: f64,
}

/// `(y, b)` for the given POVM parameters.
pub fn map_constants(d: usize, m: usize, x: f64) -> (f64, f64) {
    let (df, mf) = (d as f64, m as f64);
    let y = (df - mf * x) / (mf * (mf - 1.0));
    let b = (df - 1.0) * mf * (x - y) / df;
    (y, b)
}

impl MapSpec {
    pub fn new(povm: SymmetricPovm, rotations: RotationSet, l: usize) -> Result<Self> {
        let n = povm.params.n;
        if rotations.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} rotations given for {n} POVMs",
                rotations.len()
            )));
        }
        if l > n {
            return Err(Error::InvalidInput(format!("L = {l} exceeds N = {n}")));
        }
        let m = povm.params.m;
        if let Some(bad) = rotations.matrices.iter().position(|o| o.len() != m) {
            return Err(Error::InvalidRotation {
                alpha: bad + 1,
                reason: format!("expected {m}x{m}"),
            });
        }
        let (y, b) = map_constants(povm.params.d, m, povm.params.x);
        let a = b - n as f64 + 2.0 * l as f64;
        Ok(Self {
            povm,
            rotations,
            l,
            a,
            b,
            y,
        })
    }

    /// The value of `a` that makes `Φ` trace preserving.
    pub fn standard_a(&self) -> f64 {
        self.b - self.povm.params.n as f64 + 2.0 * self.l as f64
    }

    /// `-1` for subtracted groups, `+1` for added ones (1-based `alpha`).
    pub fn sign(&self, alpha: usize) -> f64 {
        if alpha <= self.l {
            -1.0
        } else {
            1.0
        }
    }
}

/// A linear map on `d×d` matrices, stored as its Choi matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuperOp {
    pub d: usize,
    pub choi: CMatrix,
}

impl SuperOp {
    /// Choi matrix of `f`, evaluated on matrix units.
    pub fn from_fn(d: usize, mut f: impl FnMut(&CMatrix) -> CMatrix) -> Self {
        let mut choi = CMatrix::zeros(d * d, d * d);
        for k in 0..d {
            for l in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(k, l)] = c(1.0, 0.0);
                let out = f(&unit);
                for i in 0..d {
                    for j in 0..d {
                        choi[(k * d + i, l * d + j)] = out[(i, j)];
                    }
                }
            }
        }
        Self { d, choi }
    }

    /// `Φ[X] = Tr₁[(Xᵀ ⊗ 𝟙) W]`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let d = self.d;
        if x.rows() != d || x.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "map acts on {d}x{d}, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| {
            let mut s = c(0.0, 0.0);
            for k in 0..d {
                for l in 0..d {
                    s += x[(k, l)] * self.choi[(k * d + i, l * d + j)];
                }
            }
            s
        }))
    }

    /// `max |Tr_out W − 𝟙|`.
    pub fn trace_preservation_dev(&self) -> f64 {
        let reduced = self
            .choi
            .partial_trace((self.d, self.d), Subsystem::B)
            .expect("Choi matrix is d²×d²");
        reduced.max_abs_diff(&CMatrix::identity(self.d))
    }

    pub fn transposition(d: usize) -> Self {
        Self::from_fn(d, CMatrix::transpose)
    }
}

pub fn apply_phi0(x: &CMatrix) -> CMatrix {
    let d = x.rows();
    CMatrix::identity(d).scale_c(x.trace() / d as f64)
}

/// `Φ_α[X]` for 1-based `alpha` with rotation `o`.
pub fn apply_phi_alpha(povm: &SymmetricPovm, o: &Rotation, alpha: usize, x: &CMatrix) -> Result<CMatrix> {
    let n = povm.params.n;
    if alpha == 0 || alpha > n {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside 1..={n}")));
    }
    let (d, m) = (povm.params.d, povm.params.m);
    if x.rows() != d || x.cols() != d {
        return Err(Error::DimensionMismatch(format!("expected {d}x{d} input")));
    }
    if o.len() != m || o.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidRotation {
            alpha,
            reason: format!("expected {m}x{m}"),
        });
    }
    let es = &povm.elements[alpha - 1];
    let overlaps: Vec<_> = es.iter().map(|e| (x * e).trace()).collect();
    let mut out = CMatrix::zeros(d, d);
    for (k, ek) in es.iter().enumerate() {
        let coeff: num_complex::Complex64 = (0..m).map(|l| overlaps[l] * o[k][l]).sum();
        out += &ek.scale_c(coeff * (m as f64 / d as f64));
    }
    Ok(out)
}

/// Assembles `Φ` by applying it to every matrix unit.
pub fn build_map(spec: &MapSpec) -> Result<SuperOp> {
    if spec.b <= 1e-12 {
        return Err(Error::DegenerateScale(spec.b));
    }
    for (a, o) in spec.rotations.matrices.iter().enumerate() {
        if let Some(reason) = validate_rotation(o, RotationMode::Strict).reason {
            return Err(Error::InvalidRotation { alpha: a + 1, reason });
        }
    }
    let d = spec.povm.params.d;
    let n = spec.povm.params.n;
    let mut failure = None;
    let op = SuperOp::from_fn(d, |x| {
        let mut out = apply_phi0(x).scale(spec.a);
        for alpha in 1..=n {
            match apply_phi_alpha(&spec.povm, &spec.rotations.matrices[alpha - 1], alpha, x) {
                Ok(y) => out += &y.scale(spec.sign(alpha)),
                Err(e) => failure = Some(e),
            }
        }
        out.scale(1.0 / spec.b)
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(op),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityProbe {
    pub samples: usize,
    pub seed: u64,
    pub max_output_purity: f64,
    pub purity_bound: f64,
    pub min_output_eigenvalue: f64,
    pub purity_violation: bool,
    pub eigenvalue_violation: bool,
}

impl PositivityProbe {
    pub fn violation(&self) -> bool {
        self.purity_violation || self.eigenvalue_violation
    }
}

/// Applies `phi` to Haar-random rank-1 projectors; sample `i` draws from
/// stream `i` of `seed`, so the result does not depend on thread count.
pub fn positivity_probe(phi: &SuperOp, samples: usize, seed: u64) -> PositivityProbe {
    let d = phi.d;
    let (purity, low) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let p = haar_pure_state(d, &mut rng);
            let out = phi.apply(&p).expect("dimensions match");
            ((&out * &out).trace().re, min_eigenvalue(&out))
        })
        .reduce(
            || (f64::NEG_INFINITY, f64::INFINITY),
            |a, b| (a.0.max(b.0), a.1.min(b.1)),
        );
    let bound = 1.0 / (d as f64 - 1.0);
    PositivityProbe {
        samples,
        seed,
        max_output_purity: purity,
        purity_bound: bound,
        min_output_eigenvalue: low,
        purity_violation: purity > bound + 1e-9,
        eigenvalue_violation: low < -1e-8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::resolve_basis;
    use crate::povm::build_povm_for_x;
    use crate::random::random_hermitian;

    fn ex3_spec(x: f64) -> MapSpec {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let povm = build_povm_for_x(&b, x).unwrap();
        MapSpec::new(povm, RotationSet::uniform(cycle_rotation(3), 4).unwrap(), 3).unwrap()
    }

    #[test]
    fn rotation_modes() {
        assert!(validate_rotation(&identity_rotation(4), RotationMode::Strict).valid);
        assert!(validate_rotation(&cycle_rotation(3), RotationMode::Strict).valid);
        let minus = vec![vec![-1.0, 0.0], vec![0.0, -1.0]];
        assert!(!validate_rotation(&minus, RotationMode::Strict).valid);
        assert!(validate_rotation(&minus, RotationMode::SignFlip).valid);
        assert!(validate_rotation(&vec![vec![0.0; 3]; 3], RotationMode::Zero).valid);
        assert!(!validate_rotation(&vec![vec![1.0, 1.0]], RotationMode::Strict).valid);
        assert_eq!(classify_rotation(&minus), Some(RotationMode::SignFlip));
        assert_eq!(classify_rotation(&vec![vec![2.0, 0.0], vec![0.0, 1.0]]), None);
    }

    #[test]
    fn presets() {
        assert_eq!(rotation_preset("cycle:3").unwrap(), cycle_rotation(3));
        assert_eq!(rotation_preset("identity:2").unwrap(), identity_rotation(2));
        let inv = rotation_preset("cycle-inv:5").unwrap();
        assert_eq!(inv[1][0], 1.0);
        assert_eq!(inv[0][4], 1.0);
        assert!(rotation_preset("spin:3").is_err());
    }

    #[test]
    fn phi0_examples() {
        assert!(apply_phi0(&CMatrix::identity(3)).max_abs_diff(&CMatrix::identity(3)) < 1e-15);
        let mut unit = CMatrix::zeros(3, 3);
        unit[(0, 1)] = c(1.0, 0.0);
        assert!(apply_phi0(&unit).max_abs() < 1e-15);
    }

    #[test]
    fn phi_alpha_unital_and_trace_preserving() {
        let spec = ex3_spec(5.0 / 9.0);
        let o = cycle_rotation(3);
        let out = apply_phi_alpha(&spec.povm, &o, 1, &CMatrix::identity(3)).unwrap();
        assert!(out.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
        let mut rng = stream_rng(5, 0);
        let x = random_hermitian(3, &mut rng);
        let y = apply_phi_alpha(&spec.povm, &o, 2, &x).unwrap();
        assert!((y.trace() - x.trace()).norm() < 1e-12);
        let p = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
        let y = apply_phi_alpha(&spec.povm, &o, 1, &p).unwrap();
        assert!((y.trace().re - 1.0).abs() < 1e-12 && y.is_hermitian(1e-12));
        assert!(apply_phi_alpha(&spec.povm, &o, 5, &p).is_err());
    }

    #[test]
    fn constants_close_the_algebra() {
        let spec = ex3_spec(5.0 / 9.0);
        let (d, m, x) = (3.0, 3.0, 5.0 / 9.0);
        assert!((spec.b - (d - 1.0) * (m * m * x - d) / (d * (m - 1.0))).abs() < 1e-14);
        assert_eq!(spec.a, spec.standard_a());
        assert!((spec.a - (spec.b + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn identity_rotations_give_unital_map() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let povm = build_povm_for_x(&b, 0.5).unwrap();
        let spec = MapSpec::new(povm, RotationSet::uniform(identity_rotation(3), 4).unwrap(), 0).unwrap();
        let phi = build_map(&spec).unwrap();
        let out = phi.apply(&CMatrix::identity(3)).unwrap();
        assert!(out.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn choi_application_matches_direct_sum() {
        let spec = ex3_spec(0.5);
        let phi = build_map(&spec).unwrap();
        assert!(phi.trace_preservation_dev() < 1e-12);
        let mut rng = stream_rng(9, 0);
        let x = random_hermitian(3, &mut rng);
        let mut direct = apply_phi0(&x).scale(spec.a);
        for alpha in 1..=4 {
            let y = apply_phi_alpha(&spec.povm, &cycle_rotation(3), alpha, &x).unwrap();
            direct += &y.scale(spec.sign(alpha));
        }
        let direct = direct.scale(1.0 / spec.b);
        assert!(phi.apply(&x).unwrap().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn degenerate_scale_rejected() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let povm = crate::povm::build_povm(&b, 0.0).unwrap();
        let spec = MapSpec::new(povm, RotationSet::uniform(identity_rotation(3), 4).unwrap(), 0).unwrap();
        assert!(matches!(build_map(&spec), Err(Error::DegenerateScale(_))));
    }

    #[test]
    fn probe_accepts_valid_map_and_transposition() {
        let phi = build_map(&ex3_spec(5.0 / 9.0)).unwrap();
        let r = positivity_probe(&phi, 300, 0);
        assert!(!r.violation(), "{r:?}");
        let t = positivity_probe(&SuperOp::transposition(3), 100, 0);
        assert!(!t.eigenvalue_violation);
    }

    #[test]
    fn probe_catches_over_subtraction() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let povm = build_povm_for_x(&b, 5.0 / 9.0).unwrap();
        let mut spec = MapSpec::new(povm, RotationSet::uniform(identity_rotation(3), 4).unwrap(), 4).unwrap();
        spec.a = spec.standard_a() - spec.b;
        let r = positivity_probe(&build_map(&spec).unwrap(), 300, 0);
        assert!(r.eigenvalue_violation, "{r:?}");
    }

    #[test]
    fn probe_is_reproducible() {
        let phi = build_map(&ex3_spec(0.5)).unwrap();
        let a = positivity_probe(&phi, 64, 3);
        let b = positivity_probe(&phi, 64, 3);
        assert_eq!(a.max_output_purity, b.max_output_purity);
        assert_eq!(a.min_output_eigenvalue, b.min_output_eigenvalue);
    }
}
