use std::f64::consts::SQRT_2;

use nalgebra::{Matrix4, SymmetricEigen};
use serde::Serialize;
use serde_json::{json, Value};
use typgas::chsh::{
    block_operator, chsh_value, eta_state, violation_fraction_analytic, ChshSetting, Convention,
};
use typgas::fock::{dimension, SectorSpec, Statistics};
use typgas::hilbert::Dims;

use crate::args::DEFAULT_CURVE_POINTS;
use crate::commands::density_curve;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

fn dim(stats: Statistics, n: u32, m: u64) -> Option<u64> {
    dimension(&SectorSpec::exact(stats, n, m)).ok()
}

/// Eigenvalues of the 4x4 block of `F`, ascending.
pub fn block_spectrum(convention: Convention) -> [f64; 4] {
    let b = block_operator(convention);
    let eig = SymmetricEigen::new(Matrix4::from_fn(|i, j| b[i][j]));
    let mut ev = [0.0; 4];
    ev.copy_from_slice(eig.eigenvalues.as_slice());
    ev.sort_by(f64::total_cmp);
    ev
}

fn check_dims() -> Vec<Check> {
    let bose = dim(Statistics::Bose, 5, 30);
    let fermi = dim(Statistics::Fermi, 5, 40);
    let pairs: Vec<u64> = (0..=100)
        .filter(|&m| dim(Statistics::Bose, 2, m) != Some(m / 2 + 1))
        .collect();
    let mut staircase_bad = Vec::new();
    for n in 1..=6u32 {
        let shift = SectorSpec::fermi_ground_quanta(n);
        for m in 0..=40u64 {
            let f = dim(Statistics::Fermi, n, m);
            let b = if m >= shift {
                dim(Statistics::Bose, n, m - shift)
            } else {
                Some(0)
            };
            if f != b {
                staircase_bad.push((n, m));
            }
        }
    }
    vec![
        Check {
            name: "dimension_bose_5_30",
            passed: bose == Some(674),
            detail: json!({ "value": bose, "expected": 674 }),
        },
        Check {
            name: "dimension_fermi_5_40",
            passed: fermi == Some(674),
            detail: json!({ "value": fermi, "expected": 674 }),
        },
        Check {
            name: "two_particle_closed_form",
            passed: pairs.is_empty(),
            detail: json!({ "m_max": 100, "mismatches": pairs }),
        },
        Check {
            name: "staircase_identity",
            passed: staircase_bad.is_empty(),
            detail: json!({ "n_max": 6, "m_max": 40, "mismatches": staircase_bad }),
        },
    ]
}

fn check_spectrum() -> Check {
    let ev = block_spectrum(Convention::Relabeled);
    let want = [-2.0 * SQRT_2, 0.0, 0.0, 2.0 * SQRT_2];
    let err = ev
        .iter()
        .zip(want)
        .map(|(e, w)| (e - w).abs())
        .fold(0.0, f64::max);
    Check {
        name: "block_spectrum",
        passed: err < 1e-12,
        detail: json!({ "eigenvalues": ev, "expected": want, "max_error": err }),
    }
}

fn check_eta_law() -> Check {
    let dims = Dims::new(3, 3);
    let setting = ChshSetting::new((0, 2), (1, 0));
    let mut rows = Vec::new();
    let mut err: f64 = 0.0;
    for eta in [0.0, 0.25, 0.5, 1.0] {
        let f = eta_state(dims, &setting, eta).and_then(|s| chsh_value(&s, &setting));
        let want = 2.0 * SQRT_2 * eta + 2.0 * (1.0 - eta);
        let e = f.as_ref().map_or(f64::INFINITY, |f| (f - want).abs());
        err = err.max(e);
        rows.push(json!({ "eta": eta, "value": f.ok(), "expected": want }));
    }
    Check {
        name: "eta_family_law",
        passed: err < 1e-12,
        detail: json!({ "rows": rows, "max_error": err }),
    }
}

fn check_density() -> Vec<Check> {
    let (_, curve) = density_curve(-40.0, 12.0, DEFAULT_CURVE_POINTS);
    let closed = (10.0 - 7.0 * SQRT_2) / 8.0;
    let fraction = violation_fraction_analytic();
    vec![
        Check {
            name: "density_normalization",
            passed: (curve.integral - 1.0).abs() < 1e-6,
            detail: serde_json::to_value(curve).expect("plain numbers"),
        },
        Check {
            name: "violation_fraction",
            passed: (fraction - closed).abs() < 1e-12,
            detail: json!({ "value": fraction, "closed_form": closed }),
        },
    ]
}

pub fn run() -> Report {
    let mut checks = check_dims();
    checks.push(check_spectrum());
    checks.push(check_eta_law());
    checks.extend(check_density());
    Report {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
