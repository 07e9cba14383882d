//! Hermitian orthonormal operator bases and their `(α, k)` groupings.
//!
//! A [`GroupedBasis`] holds `G₀ = 𝟙/√d` together with `N` groups of `M−1`
//! traceless Hermitian operators `G_{α,k}`, orthonormal under `Tr(A†B)`. It is
//! the input to every measurement and witness construction in this crate.
//!
//! Labels `(α, k)` are 1-based throughout the public API; storage is 0-based.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{c, frob_inner, re, CMatrix, C64};

/// Tolerance on the Gram matrix when validating orthonormality.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Generalized Gell-Mann matrices for dimension `d`, normalized to
/// `Tr(g²) = 1`.
///
/// Order: for each pair `j < k` (lexicographic) the symmetric element
/// `g_{jk}` then the antisymmetric `g_{kj}`; afterwards the diagonal elements
/// `g_{11}, …, g_{d−1,d−1}`. For `d = 3` this gives
/// `g01, g10, g02, g20, g12, g21, g11, g22`.
pub fn gell_mann_basis(d: usize) -> Result<Vec<CMatrix>> {
    Ok(gell_mann_labeled(d)?.into_iter().map(|(_, g)| g).collect())
}

/// Same as [`gell_mann_basis`] with labels such as `"g01"`.
pub fn gell_mann_labeled(d: usize) -> Result<Vec<(String, CMatrix)>> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("Gell-Mann basis needs d >= 2, got {d}")));
    }
    let s = FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = re(s);
            sym[(k, j)] = re(s);
            out.push((format!("g{j}{k}"), sym));

            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = c(0.0, -s);
            anti[(k, j)] = c(0.0, s);
            out.push((format!("g{k}{j}"), anti));
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(l) {
            *v = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push((format!("g{l}{l}"), CMatrix::diag_real(&diag)));
    }
    Ok(out)
}

/// The four mutually unbiased bases of `C³` as rank-1 projectors.
#[derive(Clone, Debug)]
pub struct MubFamily {
    pub d: usize,
    /// `projectors[α][k]` is `E_{α+1,k+1}`.
    pub projectors: Vec<Vec<CMatrix>>,
    pub omega: C64,
    pub u: C64,
    pub v: C64,
}

/// `ω = exp(2πi/3)`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// `u = (1−i)(1+√3)`.
pub fn mub_u() -> C64 {
    c(1.0, -1.0) * (1.0 + 3f64.sqrt())
}

/// `v = 2+√3+i`.
pub fn mub_v() -> C64 {
    c(2.0 + 3f64.sqrt(), 1.0)
}

pub fn mub_projectors_d3() -> MubFamily {
    let w = omega();
    let w2 = w * w;
    let one = re(1.0);
    let third = |rows: [[C64; 3]; 3]| CMatrix::from_rows(rows).scale(1.0 / 3.0);

    let computational = (0..3)
        .map(|k| {
            let mut m = CMatrix::zeros(3, 3);
            m[(k, k)] = one;
            m
        })
        .collect();
    let fourier = vec![
        third([[one, one, one], [one, one, one], [one, one, one]]),
        third([[one, w2, w], [w, one, w2], [w2, w, one]]),
        third([[one, w, w2], [w2, one, w], [w, w2, one]]),
    ];
    let third_basis = vec![
        third([[one, w2, w2], [w, one, one], [w, one, one]]),
        third([[one, w, one], [w2, one, w2], [one, w, one]]),
        third([[one, one, w], [one, one, w], [w2, w2, one]]),
    ];
    let fourth_basis = vec![
        third([[one, w, w], [w2, one, one], [w2, one, one]]),
        third([[one, w2, one], [w, one, w], [one, w2, one]]),
        third([[one, one, w2], [one, one, w2], [w, w, one]]),
    ];
    MubFamily {
        d: 3,
        projectors: vec![computational, fourier, third_basis, fourth_basis],
        omega: w,
        u: mub_u(),
        v: mub_v(),
    }
}

/// The eight `G_{α,k}` matrices exactly as printed, prefactors included,
/// ordered `G11, G12, G21, G22, G31, G32, G41, G42`.
///
/// `G22`, `G32` and `G42` carry the prefactor `1/(√3(1+√3))`, which makes
/// their Hilbert-Schmidt norm 2 instead of 1; see [`mub_prefactor_report`].
pub fn mub_basis_d3_as_printed() -> Vec<CMatrix> {
    let s3 = 3f64.sqrt();
    let p1 = 1.0 / (s3 * (1.0 + s3));
    let p2 = 1.0 / (2.0 * s3 * (1.0 + s3));
    let (u, v) = (mub_u(), mub_v());
    let (uc, vc) = (u.conj(), v.conj());
    let i = c(0.0, 1.0);
    let z = re(0.0);
    vec![
        CMatrix::diag_real(&[-2.0 - s3, 1.0, 1.0 + s3]).scale(p1),
        CMatrix::diag_real(&[1.0, -2.0 - s3, 1.0 + s3]).scale(p1),
        CMatrix::from_rows([[z, -vc, -v], [-v, z, -vc], [-vc, -v, z]]).scale(p2),
        CMatrix::from_rows([[z, i * vc, -i * v], [-i * v, z, i * vc], [i * vc, -i * v, z]]).scale(p1),
        CMatrix::from_rows([[z, uc, i * vc], [u, z, -vc], [-i * v, -v, z]]).scale(p2),
        CMatrix::from_rows([[z, u, -vc], [uc, z, i * vc], [-v, -i * v, z]]).scale(p1),
        CMatrix::from_rows([[z, u, -i * v], [uc, z, -v], [i * vc, -vc, z]]).scale(p2),
        CMatrix::from_rows([[z, uc, -v], [u, z, -i * v], [-vc, i * vc, z]]).scale(p1),
    ]
}

pub const MUB_LABELS: [&str; 8] = ["G11", "G12", "G21", "G22", "G31", "G32", "G41", "G42"];

/// Unit-norm check of each printed `G_{α,k}`.
#[derive(Clone, Debug, Serialize)]
pub struct PrefactorCheck {
    pub label: &'static str,
    pub printed_norm_sq: f64,
    /// Factor applied to the printed matrix to restore `Tr(G²) = 1`.
    pub correction: f64,
}

pub fn mub_prefactor_report() -> Vec<PrefactorCheck> {
    mub_basis_d3_as_printed()
        .iter()
        .zip(MUB_LABELS)
        .map(|(g, label)| {
            let n2 = frob_inner(g, g).unwrap().re;
            PrefactorCheck {
                label,
                printed_norm_sq: n2,
                correction: 1.0 / n2.sqrt(),
            }
        })
        .collect()
}

/// The Hermitian orthonormal basis derived from the d=3 MUBs, grouped
/// `N = 4`, `M = 3` with group α taken from the α-th MUB.
///
/// Built from the printed matrices with the prefactor of `G22`, `G32`, `G42`
/// halved so every element has unit norm.
pub fn mub_basis_d3() -> GroupedBasis {
    GroupedBasis::from_sequential("mub3", 3, mub_basis_d3_elements(), 3)
        .expect("MUB basis is orthonormal")
}

/// Ungrouped elements of [`mub_basis_d3`], ordered as [`MUB_LABELS`].
pub fn mub_basis_d3_elements() -> Vec<CMatrix> {
    mub_basis_d3_as_printed()
        .into_iter()
        .zip(mub_prefactor_report())
        .map(|(g, check)| {
            if (check.printed_norm_sq - 1.0).abs() > 1e-9 {
                g.scale(check.correction)
            } else {
                g
            }
        })
        .collect()
}

/// A set of `(α, k)` labels, one per basis element, in element order.
pub type Assignment = Vec<(usize, usize)>;

/// `G_{1,1}=g01, G_{1,2}=g10, G_{2,1}=g02, …, G_{4,2}=g22` (N=4, M=3).
pub const EX3_GROUPING: [(usize, usize); 8] =
    [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2)];

/// `G_{1,·} = g01, g02, g10, g20`; `G_{2,·} = g12, g21, g11, g22` (N=2, M=5),
/// expressed against the Gell-Mann order `g01, g10, g02, g20, g12, g21, g11, g22`.
pub const EX5_GROUPING: [(usize, usize); 8] =
    [(1, 1), (1, 3), (1, 2), (1, 4), (2, 1), (2, 2), (2, 3), (2, 4)];

/// `{G₁,G₂,G₃} = {G12, G21, G22}`, `{G₄,…,G₈} = {G11, G31, G32, G41, G42}`
/// (N=8, M=2), expressed against the order of [`MUB_LABELS`].
pub const EX4_GROUPING: [(usize, usize); 8] =
    [(4, 1), (1, 1), (2, 1), (3, 1), (5, 1), (6, 1), (7, 1), (8, 1)];

/// Orthonormal Hermitian operator basis `{G₀ = 𝟙/√d, G_{α,k}}` with group
/// structure.
#[derive(Clone, Debug)]
pub struct GroupedBasis {
    name: String,
    d: usize,
    m: usize,
    g0: CMatrix,
    /// `groups[α][k]` is `G_{α+1,k+1}`.
    groups: Vec<Vec<CMatrix>>,
}

impl GroupedBasis {
    /// Validates and wraps already-grouped elements.
    pub fn new(name: impl Into<String>, d: usize, groups: Vec<Vec<CMatrix>>) -> Result<Self> {
        if groups.is_empty() || groups[0].is_empty() {
            return Err(Error::InvalidGrouping("need at least one non-empty group".into()));
        }
        let width = groups[0].len();
        if groups.iter().any(|g| g.len() != width) {
            return Err(Error::InvalidGrouping("groups have unequal sizes".into()));
        }
        if groups.len() * width > d * d - 1 {
            return Err(Error::InvalidGrouping(format!(
                "{} elements exceed d²−1 = {}",
                groups.len() * width,
                d * d - 1
            )));
        }
        let basis = Self {
            name: name.into(),
            d,
            m: width + 1,
            g0: CMatrix::identity(d).scale(1.0 / (d as f64).sqrt()),
            groups,
        };
        basis.validate()?;
        Ok(basis)
    }

    /// Chunks `elements` in order into groups of `m − 1`.
    pub fn from_sequential(
        name: impl Into<String>,
        d: usize,
        elements: Vec<CMatrix>,
        m: usize,
    ) -> Result<Self> {
        if m < 2 || elements.len() % (m - 1) != 0 {
            return Err(Error::InvalidGrouping(format!(
                "{} elements cannot be split into groups of {}",
                elements.len(),
                m.saturating_sub(1)
            )));
        }
        let groups = elements.chunks(m - 1).map(|c| c.to_vec()).collect();
        Self::new(name, d, groups)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of groups `N`.
    pub fn n(&self) -> usize {
        self.groups.len()
    }

    /// POVM size `M`; each group holds `M − 1` elements.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn g0(&self) -> &CMatrix {
        &self.g0
    }

    /// Elements of group `alpha` (1-based).
    pub fn group(&self, alpha: usize) -> &[CMatrix] {
        &self.groups[alpha - 1]
    }

    pub fn groups(&self) -> &[Vec<CMatrix>] {
        &self.groups
    }

    /// `G_α = Σ_k G_{α,k}`.
    pub fn group_sum(&self, alpha: usize) -> CMatrix {
        let mut sum = CMatrix::zeros(self.d, self.d);
        for g in self.group(alpha) {
            sum += g;
        }
        sum
    }

    pub fn is_complete(&self) -> bool {
        self.n() * (self.m - 1) == self.d * self.d - 1
    }

    /// `G₀` followed by `G_{1,1}, …, G_{N,M−1}`.
    pub fn elements(&self) -> Vec<CMatrix> {
        std::iter::once(self.g0.clone())
            .chain(self.groups.iter().flatten().cloned())
            .collect()
    }

    /// Keeps only the listed groups (1-based, in the given order).
    pub fn select(&self, alphas: &[usize]) -> Result<Self> {
        let mut groups = Vec::with_capacity(alphas.len());
        for &a in alphas {
            if a == 0 || a > self.n() {
                return Err(Error::InvalidGrouping(format!("group {a} out of range 1..={}", self.n())));
            }
            groups.push(self.groups[a - 1].clone());
        }
        let name = format!(
            "{}[{}]",
            self.name,
            alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        );
        Self::new(name, self.d, groups)
    }

    /// Extends `{G₀, G_{α,k}}` to a full orthonormal Hermitian basis of `d²`
    /// elements; the extra elements are Gram-Schmidt completions of the
    /// Gell-Mann matrices.
    pub fn completed_elements(&self) -> Vec<CMatrix> {
        let mut out = self.elements();
        let target = self.d * self.d;
        for cand in gell_mann_basis(self.d).expect("d >= 2") {
            if out.len() == target {
                break;
            }
            let mut r = cand;
            for _ in 0..2 {
                for e in &out {
                    let proj = frob_inner(e, &r).unwrap();
                    r -= &e.scale_c(proj);
                }
            }
            let n = r.frob_norm();
            if n > 1e-8 {
                // stays Hermitian: projections onto Hermitian elements are real
                out.push(r.hermitian_part().scale(1.0 / n));
            }
        }
        out
    }

    /// Largest deviation of the Gram matrix of [`Self::elements`] from 𝟙.
    pub fn gram_deviation(&self) -> f64 {
        gram_deviation(&self.elements())
    }

    fn validate(&self) -> Result<()> {
        for (a, group) in self.groups.iter().enumerate() {
            for (k, g) in group.iter().enumerate() {
                if g.rows() != self.d || !g.is_square() {
                    return Err(Error::DimensionMismatch(format!(
                        "G_{{{},{}}} is {}x{}, expected {}x{}",
                        a + 1,
                        k + 1,
                        g.rows(),
                        g.cols(),
                        self.d,
                        self.d
                    )));
                }
                let dev = g.hermitian_deviation();
                if dev > crate::matrix::HERMITIAN_TOL {
                    return Err(Error::NotHermitian { deviation: dev });
                }
                if g.trace().norm() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "G_{{{},{}}} has trace {:.3e}",
                        a + 1,
                        k + 1,
                        g.trace().norm()
                    )));
                }
            }
        }
        let dev = self.gram_deviation();
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NonOrthonormal(dev));
        }
        Ok(())
    }
}

pub fn gram_deviation(elements: &[CMatrix]) -> f64 {
    let mut dev = 0.0f64;
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((frob_inner(a, b).unwrap() - re(target)).norm());
        }
    }
    dev
}

/// Places each element at its `(α, k)` label and validates the result.
pub fn group_basis(
    name: impl Into<String>,
    d: usize,
    elements: &[CMatrix],
    assignment: &[(usize, usize)],
) -> Result<GroupedBasis> {
    if elements.len() != assignment.len() {
        return Err(Error::InvalidGrouping(format!(
            "{} elements but {} labels",
            elements.len(),
            assignment.len()
        )));
    }
    let n = assignment.iter().map(|l| l.0).max().unwrap_or(0);
    let width = assignment.iter().map(|l| l.1).max().unwrap_or(0);
    if n == 0 || width == 0 || assignment.iter().any(|&(a, k)| a == 0 || k == 0) {
        return Err(Error::InvalidGrouping("labels are 1-based".into()));
    }
    let mut slots: Vec<Vec<Option<CMatrix>>> = vec![vec![None; width]; n];
    for (el, &(a, k)) in elements.iter().zip(assignment) {
        let slot = &mut slots[a - 1][k - 1];
        if slot.is_some() {
            return Err(Error::InvalidGrouping(format!("duplicate label ({a},{k})")));
        }
        *slot = Some(el.clone());
    }
    let mut groups = Vec::with_capacity(n);
    for (a, row) in slots.into_iter().enumerate() {
        let mut group = Vec::with_capacity(width);
        for (k, slot) in row.into_iter().enumerate() {
            group.push(slot.ok_or_else(|| {
                Error::InvalidGrouping(format!("label ({},{}) missing", a + 1, k + 1))
            })?);
        }
        groups.push(group);
    }
    GroupedBasis::new(name, d, groups)
}

/// Element list for a basis preset: `gellmann:<d>` or `mub3`.
pub fn basis_elements(preset: &str) -> Result<(usize, Vec<CMatrix>)> {
    if preset == "mub3" {
        return Ok((3, mub_basis_d3_elements()));
    }
    if let Some(d) = preset.strip_prefix("gellmann:") {
        let d: usize = d.parse().map_err(|_| Error::Unknown(preset.to_string()))?;
        return Ok((d, gell_mann_basis(d)?));
    }
    Err(Error::Unknown(preset.to_string()))
}

/// Assignment for a grouping preset: `ex3`, `ex4`, `ex5`, or `seq:<M>`
/// (consecutive chunks of `M − 1` elements).
pub fn grouping_assignment(preset: &str, element_count: usize) -> Result<Assignment> {
    match preset {
        "ex3" => Ok(EX3_GROUPING.to_vec()),
        "ex4" => Ok(EX4_GROUPING.to_vec()),
        "ex5" => Ok(EX5_GROUPING.to_vec()),
        _ => {
            let m: usize = preset
                .strip_prefix("seq:")
                .and_then(|m| m.parse().ok())
                .ok_or_else(|| Error::Unknown(preset.to_string()))?;
            if m < 2 || element_count % (m - 1) != 0 {
                return Err(Error::InvalidGrouping(format!(
                    "{element_count} elements do not split into groups of {}",
                    m.saturating_sub(1)
                )));
            }
            Ok((0..element_count).map(|i| (i / (m - 1) + 1, i % (m - 1) + 1)).collect())
        }
    }
}

/// Resolves a `(basis preset, grouping preset)` pair.
pub fn resolve_basis(basis: &str, grouping: &str) -> Result<GroupedBasis> {
    let (d, elements) = basis_elements(basis)?;
    let assignment = grouping_assignment(grouping, elements.len())?;
    group_basis(format!("{basis}/{grouping}"), d, &elements, &assignment)
}
