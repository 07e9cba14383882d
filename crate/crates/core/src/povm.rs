//! Symmetric `(N,M)`-POVMs built from grouped operator bases.
//!
//! Elements are `E_{α,k} = 𝟙/M + t·H_{α,k}` with
//!
//! ```text
//! H_{α,k} = G_α − √M(√M+1)·G_{α,k}     (k < M)
//! H_{α,M} = (√M+1)·G_α                  G_α = Σ_k G_{α,k}
//! ```
//!
//! and purity `x = d/M² + t²(M−1)(√M+1)²`. The resulting family satisfies
//!
//! ```text
//! Tr E_{α,k}        = d/M
//! Tr E_{α,k}²       = x
//! Tr E_{α,k}E_{α,l} = (d − Mx)/(M(M−1))     k ≠ l
//! Tr E_{α,k}E_{β,l} = d/M²                  α ≠ β
//! ```
//!
//! for every admissible `x ∈ (d/M², min{d²/M², d/M}]`.

use serde::Serialize;

use crate::bases::GroupedBasis;
use crate::error::{Error, Result};
use crate::lab::validate_density;
use crate::matrix::{frob_inner, min_eigenvalue, CMatrix};

/// Tolerance on each symmetry trace condition.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Elements with a smaller eigenvalue than `-POSITIVITY_TOL` are rejected.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PovmParams {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub x: f64,
    pub t: f64,
}

/// Admissible purity range `(d/M², min{d²/M², d/M}]` (open below).
pub fn x_range(d: usize, m: usize) -> (f64, f64) {
    let (d, m) = (d as f64, m as f64);
    (d / (m * m), (d * d / (m * m)).min(d / m))
}

fn sqrt_m_plus_one_sq(m: usize) -> f64 {
    let s = (m as f64).sqrt() + 1.0;
    s * s
}

pub fn x_from_t(d: usize, m: usize, t: f64) -> f64 {
    let (low, _) = x_range(d, m);
    low + t * t * (m as f64 - 1.0) * sqrt_m_plus_one_sq(m)
}

/// Non-negative `t` for a purity `x ≥ d/M²`.
pub fn t_from_x(d: usize, m: usize, x: f64) -> f64 {
    let (low, _) = x_range(d, m);
    ((x - low).max(0.0) / ((m as f64 - 1.0) * sqrt_m_plus_one_sq(m))).sqrt()
}

/// The traceless operators `H_{α,k}` of a grouped basis.
#[derive(Clone, Debug)]
pub struct HFamily {
    /// `operators[α][k]` is `H_{α+1,k+1}`, `k` running over all `M` outcomes.
    pub operators: Vec<Vec<CMatrix>>,
    /// `G_α` for each group.
    pub group_sums: Vec<CMatrix>,
}

pub fn build_h_family(basis: &GroupedBasis) -> HFamily {
    let m = basis.m();
    let sm = (m as f64).sqrt();
    let mut operators = Vec::with_capacity(basis.n());
    let mut group_sums = Vec::with_capacity(basis.n());
    for alpha in 1..=basis.n() {
        let g_alpha = basis.group_sum(alpha);
        let mut hs: Vec<CMatrix> = basis
            .group(alpha)
            .iter()
            .map(|g| &g_alpha - &g.scale(sm * (sm + 1.0)))
            .collect();
        hs.push(g_alpha.scale(sm + 1.0));
        operators.push(hs);
        group_sums.push(g_alpha);
    }
    HFamily {
        operators,
        group_sums,
    }
}

/// `N` POVMs of `M` elements each.
#[derive(Clone, Debug)]
pub struct SymmetricPovm {
    pub params: PovmParams,
    /// `elements[α][k]` is `E_{α+1,k+1}`.
    pub elements: Vec<Vec<CMatrix>>,
    pub basis: GroupedBasis,
    /// Set when `x` sits on the excluded lower boundary (`t = 0`).
    pub degenerate: bool,
}

/// Builds the POVM for a given `t ≥ 0`; fails if any element is not PSD.
pub fn build_povm(basis: &GroupedBasis, t: f64) -> Result<SymmetricPovm> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!("t must be finite and non-negative, got {t}")));
    }
    let (d, m) = (basis.d(), basis.m());
    let h = build_h_family(basis);
    let base = CMatrix::identity(d).scale(1.0 / m as f64);
    let mut elements = Vec::with_capacity(basis.n());
    for (a, hs) in h.operators.iter().enumerate() {
        let mut row = Vec::with_capacity(m);
        for (k, hk) in hs.iter().enumerate() {
            let e = &base + &hk.scale(t);
            let lam = min_eigenvalue(&e);
            if lam < -POSITIVITY_TOL {
                return Err(Error::PositivityViolation {
                    alpha: a + 1,
                    k: k + 1,
                    min_eigenvalue: lam,
                });
            }
            row.push(e);
        }
        elements.push(row);
    }
    Ok(SymmetricPovm {
        params: PovmParams {
            d,
            n: basis.n(),
            m,
            x: x_from_t(d, m, t),
            t,
        },
        elements,
        basis: basis.clone(),
        degenerate: t == 0.0,
    })
}

/// Builds the POVM for a purity `x` inside the admissible range.
pub fn build_povm_for_x(basis: &GroupedBasis, x: f64) -> Result<SymmetricPovm> {
    let (low, high) = x_range(basis.d(), basis.m());
    if !(x.is_finite() && x > low && x <= high * (1.0 + 1e-12)) {
        return Err(Error::XOutOfRange { x, low, high });
    }
    build_povm(basis, t_from_x(basis.d(), basis.m(), x))
}

/// Deviations of a POVM family from the symmetry conditions.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub x: f64,
    pub trace_dev: f64,
    pub purity_dev: f64,
    pub within_overlap_dev: f64,
    pub cross_overlap_dev: f64,
    pub resolution_dev: f64,
    pub min_eigenvalue: f64,
    pub x_in_range: bool,
    pub holds: bool,
}

/// Checks the four symmetry conditions, the resolution of identity and
/// positivity for an arbitrary `N×M` family. `x` is read off `Tr E_{1,1}²`.
pub fn check_symmetry(elements: &[Vec<CMatrix>]) -> Result<SymmetryReport> {
    let n = elements.len();
    if n == 0 || elements[0].len() < 2 {
        return Err(Error::InvalidInput("need at least one POVM with two outcomes".into()));
    }
    let m = elements[0].len();
    if elements.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidInput("POVMs have different numbers of outcomes".into()));
    }
    let d = elements[0][0].rows();
    for e in elements.iter().flatten() {
        if !e.is_square() || e.rows() != d {
            return Err(Error::DimensionMismatch("POVM elements differ in size".into()));
        }
        let dev = e.hermitian_deviation();
        if dev > crate::matrix::HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
    }
    let (df, mf) = (d as f64, m as f64);
    let x = frob_inner(&elements[0][0], &elements[0][0])?.re;
    let within = (df - mf * x) / (mf * (mf - 1.0));
    let cross = df / (mf * mf);

    let mut r = SymmetryReport {
        d,
        n,
        m,
        x,
        trace_dev: 0.0,
        purity_dev: 0.0,
        within_overlap_dev: 0.0,
        cross_overlap_dev: 0.0,
        resolution_dev: 0.0,
        min_eigenvalue: f64::INFINITY,
        x_in_range: false,
        holds: false,
    };
    let id = CMatrix::identity(d);
    for (a, row) in elements.iter().enumerate() {
        let mut sum = CMatrix::zeros(d, d);
        for (k, e) in row.iter().enumerate() {
            sum += e;
            r.trace_dev = r.trace_dev.max((e.trace().re - df / mf).abs());
            r.min_eigenvalue = r.min_eigenvalue.min(min_eigenvalue(e));
            for (b, other_row) in elements.iter().enumerate() {
                for (l, f) in other_row.iter().enumerate() {
                    let ov = frob_inner(e, f)?.re;
                    if a == b && k == l {
                        r.purity_dev = r.purity_dev.max((ov - x).abs());
                    } else if a == b {
                        r.within_overlap_dev = r.within_overlap_dev.max((ov - within).abs());
                    } else {
                        r.cross_overlap_dev = r.cross_overlap_dev.max((ov - cross).abs());
                    }
                }
            }
        }
        r.resolution_dev = r.resolution_dev.max(sum.max_abs_diff(&id));
    }
    let (low, high) = x_range(d, m);
    r.x_in_range = x > low + 1e-12 && x <= high + 1e-12;
    r.holds = r.trace_dev <= SYMMETRY_TOL
        && r.purity_dev <= SYMMETRY_TOL
        && r.within_overlap_dev <= SYMMETRY_TOL
        && r.cross_overlap_dev <= SYMMETRY_TOL
        && r.resolution_dev <= 1e-10
        && r.min_eigenvalue >= -POSITIVITY_TOL;
    Ok(r)
}

impl SymmetricPovm {
    pub fn check(&self) -> SymmetryReport {
        check_symmetry(&self.elements).expect("constructed POVM has consistent shape")
    }

    /// Rank of the Gram matrix `Tr(E_i E_j)` over all `N·M` elements.
    pub fn span_rank(&self) -> usize {
        let all: Vec<&CMatrix> = self.elements.iter().flatten().collect();
        let gram = CMatrix::from_fn(all.len(), all.len(), |i, j| {
            frob_inner(all[i], all[j]).unwrap()
        });
        let ev = crate::matrix::eigenvalues(&gram.hermitian_part()).unwrap();
        let top = ev.last().copied().unwrap_or(0.0);
        ev.iter().filter(|&&l| l > 1e-9 * top.max(1.0)).count()
    }
}

/// Named informationally complete classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IcTag {
    /// `M = d²`, `N = 1`.
    GeneralSic,
    /// `M = d`, `N = d + 1`.
    Mum,
    /// `M = 2`, `N = d² − 1`.
    TwoOutcome,
    /// `M = d + 2`, `N = d − 1`.
    DPlusTwo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IcClass {
    pub n: usize,
    pub m: usize,
    pub tags: Vec<IcTag>,
}

/// All `(N, M)` with `N = (d²−1)/(M−1)` integral and `M ≥ 2`, sorted by `M`.
pub fn ic_classes(d: usize) -> Vec<IcClass> {
    let total = d * d - 1;
    (2..=d * d)
        .filter(|m| total % (m - 1) == 0)
        .map(|m| {
            let mut tags = Vec::new();
            if m == d * d {
                tags.push(IcTag::GeneralSic);
            }
            if m == d {
                tags.push(IcTag::Mum);
            }
            if m == 2 {
                tags.push(IcTag::TwoOutcome);
            }
            if m == d + 2 {
                tags.push(IcTag::DPlusTwo);
            }
            IcClass {
                n: total / (m - 1),
                m,
                tags,
            }
        })
        .collect()
}

/// Largest purity `x` for which every `E_{α,k}` built from `basis` is
/// positive semidefinite, capped at the upper end of [`x_range`].
///
/// Since `E = 𝟙/M + tH` shares eigenvectors with `H`, positivity at `t` is
/// `1/M + t·λ_min(H) ≥ 0` for every `H`; the bisection runs on that predicate.
pub fn optimal_x(basis: &GroupedBasis) -> f64 {
    let (d, m) = (basis.d(), basis.m());
    let (_, high) = x_range(d, m);
    let t_upper = t_from_x(d, m, high);
    let lows: Vec<f64> = build_h_family(basis)
        .operators
        .iter()
        .flatten()
        .map(min_eigenvalue)
        .collect();
    let inv_m = 1.0 / m as f64;
    let admissible = |t: f64| lows.iter().all(|&l| inv_m + t * l >= 0.0);
    if admissible(t_upper) {
        return high;
    }
    let (mut lo, mut hi) = (0.0, t_upper);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    x_from_t(d, m, lo)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbabilityTable {
    /// `p[α][k] = Tr(E_{α,k} ρ)`.
    pub p: Vec<Vec<f64>>,
    pub purity: f64,
}

pub fn probabilities(povm: &SymmetricPovm, rho: &CMatrix) -> Result<ProbabilityTable> {
    validate_density(rho)?;
    if rho.rows() != povm.params.d {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, POVM acts on d={}",
            rho.rows(),
            rho.cols(),
            povm.params.d
        )));
    }
    let p = povm
        .elements
        .iter()
        .map(|row| row.iter().map(|e| (e * rho).trace().re).collect())
        .collect();
    Ok(ProbabilityTable {
        p,
        purity: (rho * rho).trace().re,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceBound {
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `|lhs − rhs|`, reported when `L = N` where the bound is an identity.
    pub equality_deviation: Option<f64>,
}

/// `Σ_{α≤L} Σ_k p_{α,k}² ≤ L/M + (M²x − d)(d·Tr ρ² − 1)/(dM(M−1))`.
pub fn coincidence_bound_check(povm: &SymmetricPovm, rho: &CMatrix, l: usize) -> Result<CoincidenceBound> {
    let PovmParams { d, n, m, x, .. } = povm.params;
    if l == 0 || l > n {
        return Err(Error::InvalidInput(format!("L must be in 1..={n}, got {l}")));
    }
    let table = probabilities(povm, rho)?;
    let lhs: f64 = table.p[..l].iter().flatten().map(|p| p * p).sum();
    let (df, mf) = (d as f64, m as f64);
    let rhs = l as f64 / mf + (mf * mf * x - df) * (df * table.purity - 1.0) / (df * mf * (mf - 1.0));
    Ok(CoincidenceBound {
        l,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
        equality_deviation: (l == n).then(|| (lhs - rhs).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{mub_basis_d3, resolve_basis};
    use crate::random::{haar_pure_state, random_mixed_state, stream_rng};

    #[test]
    fn x_range_examples() {
        let (lo, hi) = x_range(3, 3);
        assert!((lo - 1.0 / 3.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi) = x_range(2, 4);
        assert!((lo - 0.125).abs() < 1e-15 && (hi - 0.25).abs() < 1e-15);
        let (lo, hi) = x_range(3, 2);
        assert!((lo - 0.75).abs() < 1e-15 && (hi - 1.5).abs() < 1e-15);
    }

    #[test]
    fn x_t_round_trip() {
        for &(d, m) in &[(3, 3), (2, 2), (4, 5)] {
            let t = 0.0123;
            assert!((t_from_x(d, m, x_from_t(d, m, t)) - t).abs() < 1e-14);
        }
    }

    #[test]
    fn h_family_two_outcomes() {
        let b = resolve_basis("gellmann:3", "seq:2").unwrap();
        let h = build_h_family(&b);
        let s2 = 2f64.sqrt();
        let g = &b.group(1)[0];
        assert!(h.operators[0][0].max_abs_diff(&g.scale(-(1.0 + s2))) < 1e-14);
        assert!(h.operators[0][1].max_abs_diff(&g.scale(1.0 + s2)) < 1e-14);
    }

    #[test]
    fn h_family_overlaps() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let h = build_h_family(&b);
        let s = 3f64.sqrt() + 1.0;
        let diag = frob_inner(&h.operators[0][0], &h.operators[0][0]).unwrap().re;
        assert!((diag - 2.0 * s * s).abs() < 1e-9);
        let off = frob_inner(&h.operators[0][0], &h.operators[0][1]).unwrap().re;
        assert!((off + s * s).abs() < 1e-9);
        let cross = frob_inner(&h.operators[0][0], &h.operators[1][2]).unwrap();
        assert!(cross.norm() < 1e-12);
        for hk in h.operators.iter().flatten() {
            assert!(hk.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn zero_t_is_degenerate_maximally_mixed() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let p = build_povm(&b, 0.0).unwrap();
        assert!(p.degenerate);
        assert!((p.params.x - 1.0 / 3.0).abs() < 1e-15);
        let third = CMatrix::identity(3).scale(1.0 / 3.0);
        assert!(p.elements.iter().flatten().all(|e| e.max_abs_diff(&third) < 1e-15));
        assert!(build_povm_for_x(&b, 1.0 / 3.0).is_err());
    }

    #[test]
    fn worked_configurations_are_valid() {
        let gm = resolve_basis("gellmann:3", "ex3").unwrap();
        let p = build_povm_for_x(&gm, 5.0 / 9.0).unwrap();
        let r = p.check();
        assert!(r.holds, "{r:?}");
        assert_eq!(p.params.n, 4);

        let mub2 = resolve_basis("mub3", "seq:2").unwrap();
        let x = 3.0 * (5.0 - 2.0 * 3f64.sqrt()) / 4.0;
        let r = build_povm_for_x(&mub2, x).unwrap().check();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn rejects_out_of_range_x_and_non_positive_elements() {
        let gm = resolve_basis("gellmann:3", "ex3").unwrap();
        assert!(matches!(build_povm_for_x(&gm, 2.0), Err(Error::XOutOfRange { .. })));
        assert!(matches!(
            build_povm_for_x(&gm, 0.9),
            Err(Error::PositivityViolation { .. })
        ));
    }

    #[test]
    fn ic_class_enumeration() {
        let pairs = |d| ic_classes(d).into_iter().map(|c| (c.n, c.m)).collect::<Vec<_>>();
        assert_eq!(pairs(2), vec![(3, 2), (1, 4)]);
        let d3 = pairs(3);
        for want in [(1, 9), (4, 3), (8, 2), (2, 5)] {
            assert!(d3.contains(&want), "{want:?}");
        }
        assert!(pairs(4).contains(&(5, 4)));
        let d3 = ic_classes(3);
        let tagged = |t| d3.iter().find(|c| c.tags.contains(&t)).map(|c| (c.n, c.m));
        assert_eq!(tagged(IcTag::GeneralSic), Some((1, 9)));
        assert_eq!(tagged(IcTag::Mum), Some((4, 3)));
        assert_eq!(tagged(IcTag::TwoOutcome), Some((8, 2)));
        assert_eq!(tagged(IcTag::DPlusTwo), Some((2, 5)));
    }

    // The basis-restricted optimum: values the worked examples use for x.
    #[test]
    fn optimal_x_for_worked_bases() {
        let gm3 = resolve_basis("gellmann:3", "ex3").unwrap();
        assert!((optimal_x(&gm3) - 5.0 / 9.0).abs() < 1e-9);
        let mub2 = resolve_basis("mub3", "seq:2").unwrap();
        assert!((optimal_x(&mub2) - 3.0 * (5.0 - 2.0 * 3f64.sqrt()) / 4.0).abs() < 1e-9);
        let gm5 = resolve_basis("gellmann:3", "ex5").unwrap();
        assert!((optimal_x(&gm5) - 0.183).abs() < 1e-3);
        // MUB-derived basis reaches the projective bound
        assert!((optimal_x(&mub_basis_d3()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_x_is_tight() {
        for b in [
            resolve_basis("gellmann:3", "ex3").unwrap(),
            resolve_basis("gellmann:3", "ex5").unwrap(),
            resolve_basis("gellmann:4", "seq:4").unwrap(),
        ] {
            let x = optimal_x(&b);
            let p = build_povm_for_x(&b, x).unwrap();
            assert!(p.check().min_eigenvalue >= -1e-9);
            let t = t_from_x(b.d(), b.m(), x * (1.0 + 1e-6));
            let over = build_h_family(&b)
                .operators
                .iter()
                .flatten()
                .map(|h| min_eigenvalue(&(&CMatrix::identity(b.d()).scale(1.0 / b.m() as f64) + &h.scale(t))))
                .fold(f64::INFINITY, f64::min);
            assert!(over < -1e-12);
        }
    }

    #[test]
    fn probabilities_of_maximally_mixed_state() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let p = build_povm_for_x(&b, 0.5).unwrap();
        let t = probabilities(&p, &CMatrix::identity(3).scale(1.0 / 3.0)).unwrap();
        assert!(t.p.iter().flatten().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
        assert!(probabilities(&p, &CMatrix::identity(3)).is_err());
    }

    #[test]
    fn coincidence_identity_and_bound() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        let p = build_povm_for_x(&b, 0.5).unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..20 {
            let rho = random_mixed_state(3, &mut rng);
            let full = coincidence_bound_check(&p, &rho, 4).unwrap();
            assert!(full.equality_deviation.unwrap() < 1e-10);
            let pure = haar_pure_state(3, &mut rng);
            let part = coincidence_bound_check(&p, &pure, 1).unwrap();
            assert!(part.holds && part.equality_deviation.is_none());
        }
        let mm = CMatrix::identity(3).scale(1.0 / 3.0);
        for l in 1..=4 {
            let r = coincidence_bound_check(&p, &mm, l).unwrap();
            assert!((r.lhs - l as f64 / 3.0).abs() < 1e-12 && (r.rhs - l as f64 / 3.0).abs() < 1e-12);
        }
        assert!(coincidence_bound_check(&p, &mm, 0).is_err());
    }

    #[test]
    fn informational_completeness_rank() {
        let b = resolve_basis("gellmann:3", "ex3").unwrap();
        assert_eq!(build_povm_for_x(&b, 0.5).unwrap().span_rank(), 9);
        let partial = b.select(&[1, 2]).unwrap();
        assert!(build_povm_for_x(&partial, 0.5).unwrap().span_rank() < 9);
    }
}
