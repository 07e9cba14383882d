//! The three worked `d = 3` examples: printed witnesses and states, the
//! recipes that produce them, and a `reproduce` driver.
//!
//! Matrices are stored as printed (including prefactors). Where the print is
//! inconsistent the bundle keeps an [`Erratum`] next to the value used.

use serde::Serialize;

use crate::bases::{mub_u, mub_v, omega, resolve_basis, GroupedBasis};
use crate::error::{Error, Result};
use crate::lab::{block_positivity_min, certify_indecomposable, evaluate_matrix, validate_state, CertificateReport};
use crate::maps::{identity_rotation, rotation_preset, Rotation};
use crate::matrix::{c, CMatrix, C64};
use crate::povm::optimal_x;
use crate::witness::{proportionality, rescaled_witness, weighted_witness, Proportionality, Witness};

pub const EXAMPLE_IDS: [&str; 3] = ["ex3", "ex4", "ex5"];

/// Entrywise match tolerance for reproduced witnesses.
pub const MATCH_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ExampleRecipe {
    pub basis: String,
    pub grouping: String,
    /// Groups kept from the grouping, 1-based and in order.
    pub groups: Vec<usize>,
    pub m: usize,
    pub l: usize,
    pub rotations: Vec<Rotation>,
    /// Set for weighted witnesses: `c𝟙 − Σ w_α J_α`.
    pub weights: Option<Vec<f64>>,
    /// Purity parameter the example's POVMs use.
    pub x: f64,
}

impl ExampleRecipe {
    pub fn grouped_basis(&self) -> Result<GroupedBasis> {
        resolve_basis(&self.basis, &self.grouping)?.select(&self.groups)
    }

    pub fn build(&self) -> Result<Witness> {
        let basis = self.grouped_basis()?;
        match &self.weights {
            Some(w) => weighted_witness(&basis, &self.rotations, w),
            None => rescaled_witness(&basis, &self.rotations, self.l),
        }
    }

    /// Same recipe on a different basis preset.
    pub fn with_basis(&self, basis: &str) -> Self {
        Self {
            basis: basis.to_string(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Erratum {
    pub location: String,
    pub printed: String,
    pub used: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleBundle {
    pub id: String,
    pub witness_label: String,
    pub state_label: String,
    /// Printed witness including its prefactor (Hermitian-corrected).
    pub witness_display: CMatrix,
    /// Printed state including its prefactor.
    pub state_display: CMatrix,
    pub recipe: ExampleRecipe,
    pub constants: Vec<(String, C64)>,
    pub errata: Vec<Erratum>,
    pub notes: Vec<String>,
}

/// Builds a `9×9` matrix from a diagonal and upper-triangle entries; the
/// lower triangle is filled by Hermitian conjugation.
fn hermitian_9(diag: [f64; 9], upper: &[(usize, usize, C64)], prefactor: f64) -> CMatrix {
    let mut m = CMatrix::diag_real(&diag);
    for &(i, j, v) in upper {
        m[(i, j)] = v;
        m[(j, i)] = v.conj();
    }
    m.scale(prefactor)
}

fn ex3() -> Result<ExampleBundle> {
    let s3 = 3f64.sqrt();
    let a = c(3.0, -3.0 * s3);
    let witness = hermitian_9(
        [2.0, 2.0, 8.0, 8.0, 2.0, 2.0, 2.0, 8.0, 2.0],
        &[(0, 4, a), (0, 8, a), (4, 8, a)],
        1.0 / 6.0,
    );
    let b = c(-25.0, 60.0);
    let state = hermitian_9(
        [125.0, 125.0, 34.0, 34.0, 125.0, 125.0, 125.0, 34.0, 125.0],
        &[(0, 4, b), (0, 8, b), (4, 8, b)],
        1.0 / 579.0,
    );
    Ok(ExampleBundle {
        id: "ex3".into(),
        witness_label: "W̃₁".into(),
        state_label: "ρ₁".into(),
        witness_display: witness,
        state_display: state,
        recipe: ExampleRecipe {
            basis: "gellmann:3".into(),
            grouping: "ex3".into(),
            groups: vec![1, 2, 3, 4],
            m: 3,
            l: 3,
            rotations: vec![rotation_preset("cycle:3")?; 4],
            weights: None,
            x: 5.0 / 9.0,
        },
        constants: vec![("x".into(), c(5.0 / 9.0, 0.0))],
        errata: vec![Erratum {
            location: "ρ₁ prefactor".into(),
            printed: "1/579".into(),
            used: "1/852 (sum of the printed diagonal: 6·125 + 3·34); applied by trace renormalization".into(),
        }],
        notes: vec![],
    })
}

fn ex4() -> Result<ExampleBundle> {
    let s3 = 3f64.sqrt();
    let r = |v: f64| c(v, 0.0);
    let witness = hermitian_9(
        [2.0 + s3, 5.0, 5.0 - s3, 5.0, 2.0 - s3, 5.0 + s3, 5.0 - s3, 5.0 + s3, 2.0],
        &[
            (0, 4, r(2.0)),
            (0, 8, r(2.0)),
            (4, 8, r(2.0)),
            (1, 5, r(-4.0)),
            (1, 6, r(-4.0)),
            (5, 6, r(-4.0)),
            (2, 3, r(-4.0)),
            (2, 7, r(-4.0)),
            (3, 7, r(-4.0)),
        ],
        1.0 / 6.0,
    );
    let state = hermitian_9(
        [3.0, 2.0, 2.0, 2.0, 3.0, 2.0, 2.0, 2.0, 3.0],
        &[
            (0, 4, r(1.0)),
            (0, 8, r(1.0)),
            (4, 8, r(1.0)),
            (1, 5, r(2.0)),
            (1, 6, r(2.0)),
            (5, 6, r(2.0)),
            (2, 3, r(2.0)),
            (2, 7, r(2.0)),
            (3, 7, r(2.0)),
        ],
        1.0 / 21.0,
    );
    Ok(ExampleBundle {
        id: "ex4".into(),
        witness_label: "W̃₂".into(),
        state_label: "ρ₂".into(),
        witness_display: witness,
        state_display: state,
        recipe: ExampleRecipe {
            basis: "mub3".into(),
            grouping: "ex4".into(),
            groups: vec![1, 2, 3, 5, 6, 7, 8],
            m: 2,
            l: 3,
            rotations: vec![identity_rotation(2); 7],
            weights: None,
            x: 3.0 * (5.0 - 2.0 * s3) / 4.0,
        },
        constants: vec![
            ("omega".into(), omega()),
            ("u".into(), mub_u()),
            ("v".into(), mub_v()),
            ("x".into(), c(3.0 * (5.0 - 2.0 * s3) / 4.0, 0.0)),
        ],
        errata: vec![],
        notes: vec![
            "N = 7 of the 8 single-element groups: G_{1,1} (group 4 of the grouping) is left out; \
             subtracted G₀, G_{1,2}, G_{2,1}, G_{2,2}, added G_{3,1}, G_{3,2}, G_{4,1}, G_{4,2}"
                .into(),
        ],
    })
}

/// `A, B, C, D` of the third example.
pub fn ex5_constants() -> [C64; 4] {
    let s5 = 5f64.sqrt();
    let one_minus_i = c(1.0, -1.0);
    let a = one_minus_i * c(2.0 + s5, -1.0) * 15.0;
    let b = one_minus_i * c(2.0 + s5, 1.0) * 15.0;
    let cc = c(-30.0 * s5 * (2.0 + s5), 0.0);
    let d = c(1.0, -2.0) * (30.0 * (2.0 + s5));
    [a, b, cc, d]
}

/// The boost of the third example: `5(1+√5)²`.
pub fn ex5_boost() -> f64 {
    let s = 1.0 + 5f64.sqrt();
    5.0 * s * s
}

fn ex5() -> Result<ExampleBundle> {
    let [a, b, cc, d] = ex5_constants();
    let i30 = c(0.0, 30.0);
    let witness = hermitian_9(
        [4.0; 9],
        &[
            (0, 4, b.conj()),
            (0, 5, cc),
            (0, 7, d.conj()),
            (0, 8, b.conj()),
            (1, 3, a.conj()),
            (1, 6, -i30),
            (2, 3, i30),
            (2, 6, -a),
        ],
        1.0 / 6.0,
    );
    let state = hermitian_9(
        [10.0; 9],
        &[(1, 3, c(3.0, -6.0)), (2, 6, c(-3.0, -6.0))],
        1.0 / 90.0,
    );
    Ok(ExampleBundle {
        id: "ex5".into(),
        witness_label: "W̃′₃".into(),
        state_label: "ρ₃".into(),
        witness_display: witness,
        state_display: state,
        recipe: ExampleRecipe {
            basis: "gellmann:3".into(),
            grouping: "ex5".into(),
            groups: vec![1],
            m: 5,
            l: 1,
            rotations: vec![rotation_preset("cycle-inv:5")?],
            weights: Some(vec![ex5_boost()]),
            x: optimal_x(&resolve_basis("gellmann:3", "ex5")?),
        },
        constants: vec![
            ("A".into(), a),
            ("B".into(), b),
            ("C".into(), cc),
            ("D".into(), d),
            ("boost".into(), c(ex5_boost(), 0.0)),
        ],
        errata: vec![Erratum {
            location: "W̃′₃ row 3, column 7 (1-based)".into(),
            printed: "−A*".into(),
            used: "−A (Hermitian partner of the printed −A* at row 7, column 3)".into(),
        }],
        notes: vec![
            "only group α=1 of the grouping takes part (N = 1)".into(),
            "the boosted term enters with total weight 5(1+√5)²".into(),
        ],
    })
}

pub fn load_example(id: &str) -> Result<ExampleBundle> {
    match id {
        "ex3" => ex3(),
        "ex4" => ex4(),
        "ex5" => ex5(),
        _ => Err(Error::Unknown(id.to_string())),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReproduceOptions {
    pub see_saw_restarts: usize,
    pub see_saw_iters: usize,
    pub seed: u64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            see_saw_restarts: 200,
            see_saw_iters: 500,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightReading {
    pub label: String,
    pub weight: f64,
    pub max_deviation: f64,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceReport {
    pub id: String,
    pub recipe: ExampleRecipe,
    pub witness_match: Proportionality,
    pub matches: bool,
    /// Constructed witness, at the printed scale, against the renormalized state.
    pub certificate: CertificateReport,
    /// `Tr(Wρ)` with both matrices exactly as printed (state renormalized).
    pub printed_expectation: f64,
    /// See-saw estimate of the product-state minimum at the printed scale.
    pub see_saw_min: f64,
    pub witness_min_eigenvalue: f64,
    /// Third example only: the unboosted witness on the same state.
    pub unboosted_expectation: Option<f64>,
    pub weight_readings: Vec<WeightReading>,
    /// First example only: the same recipe on the `mub3` basis.
    pub cross_basis_expectation: Option<f64>,
    pub errata: Vec<Erratum>,
    pub certified: bool,
}

pub fn reproduce(id: &str) -> Result<ReproduceReport> {
    reproduce_with(id, &ReproduceOptions::default())
}

pub fn reproduce_with(id: &str, opts: &ReproduceOptions) -> Result<ReproduceReport> {
    let bundle = load_example(id)?;
    let built = bundle.recipe.build()?;
    let witness_match = proportionality(&built.matrix, &bundle.witness_display)?;
    let matches = witness_match.holds(MATCH_TOL);
    let at_print = built.scaled(1.0 / witness_match.ratio)?;
    let state = validate_state(&bundle.state_display, (3, 3), true)?;
    let certificate = certify_indecomposable(&at_print, &state)?;
    let printed_expectation = evaluate_matrix(&bundle.witness_display, &state.matrix)?;
    let see_saw = block_positivity_min(&at_print.matrix, (3, 3), opts.see_saw_restarts, opts.see_saw_iters, opts.seed)?;

    let mut unboosted_expectation = None;
    let mut weight_readings = Vec::new();
    if let Some(weights) = &bundle.recipe.weights {
        let basis = bundle.recipe.grouped_basis()?;
        let plain = weighted_witness(&basis, &bundle.recipe.rotations, &vec![1.0; weights.len()])?;
        unboosted_expectation = Some(evaluate_matrix(&plain.matrix, &state.matrix)? / witness_match.ratio);
        for (label, w) in [
            ("5(1+√5)²", ex5_boost()),
            ("1+5(1+√5)²", 1.0 + ex5_boost()),
        ] {
            let cand = weighted_witness(&basis, &bundle.recipe.rotations, &vec![w; weights.len()])?;
            let p = proportionality(&cand.matrix, &bundle.witness_display)?;
            weight_readings.push(WeightReading {
                label: label.to_string(),
                weight: w,
                max_deviation: p.max_deviation,
                matches: p.holds(MATCH_TOL),
            });
        }
    }

    let cross_basis_expectation = if id == "ex3" {
        let other = bundle.recipe.with_basis("mub3").build()?;
        Some(evaluate_matrix(&other.matrix, &state.matrix)? / witness_match.ratio)
    } else {
        None
    };

    Ok(ReproduceReport {
        id: id.to_string(),
        recipe: bundle.recipe.clone(),
        witness_match,
        matches,
        certified: matches && certificate.indecomposable_certified,
        certificate,
        printed_expectation,
        see_saw_min: see_saw.min,
        witness_min_eigenvalue: at_print.min_eigenvalue,
        unboosted_expectation,
        weight_readings,
        cross_basis_expectation,
        errata: bundle.errata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::is_ppt;

    #[test]
    fn printed_entries() {
        let s3 = 3f64.sqrt();
        let e3 = load_example("ex3").unwrap();
        assert!((e3.witness_display[(0, 4)] - c(3.0, -3.0 * s3) / 6.0).norm() < 1e-15);
        let e4 = load_example("ex4").unwrap();
        assert!((e4.witness_display[(0, 0)].re - (2.0 + s3) / 6.0).abs() < 1e-15);
        assert!((e4.state_display[(0, 0)].re - 3.0 / 21.0).abs() < 1e-15);
        let e5 = load_example("ex5").unwrap();
        assert!((e5.state_display[(1, 3)] - c(3.0, -6.0) / 90.0).norm() < 1e-15);
        assert_eq!(e5.recipe.rotations[0][0][4], 1.0);
        assert_eq!(e5.recipe.rotations[0][1][0], 1.0);
        assert!(load_example("ex9").is_err());
    }

    #[test]
    fn displays_are_hermitian_and_states_valid() {
        for id in EXAMPLE_IDS {
            let b = load_example(id).unwrap();
            assert!(b.witness_display.is_hermitian(1e-12), "{id}");
            assert!(b.state_display.is_hermitian(1e-12), "{id}");
            let s = validate_state(&b.state_display, (3, 3), true).unwrap();
            assert!(is_ppt(&s).ppt, "{id}");
            assert!(crate::matrix::min_eigenvalue(&b.witness_display) < 0.0, "{id}");
        }
    }

    #[test]
    fn first_state_trace_disagrees_with_prefactor() {
        let b = load_example("ex3").unwrap();
        assert!((b.state_display.trace().re * 579.0 - 852.0).abs() < 1e-9);
        assert!(validate_state(&b.state_display, (3, 3), false).is_err());
    }

    #[test]
    fn constants() {
        let [a, b, cc, d] = ex5_constants();
        let s5 = 5f64.sqrt();
        assert!((a - c(15.0 * (1.0 + s5), -15.0 * (3.0 + s5))).norm() < 1e-12);
        assert!((b - c(15.0 * (3.0 + s5), -15.0 * (1.0 + s5))).norm() < 1e-12);
        assert!((cc.re + 30.0 * s5 * (2.0 + s5)).abs() < 1e-12);
        assert!((d - c(30.0 * (2.0 + s5), -60.0 * (2.0 + s5))).norm() < 1e-12);
    }
}
