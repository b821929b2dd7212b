//! Python bindings for the pquintic engine.
//!
//! The module exposes the main operations behind a small surface:
//! `Group` (a finite p-group given by a spec string), `mu`, `canonicalize`,
//! `are_isomorphic`, `classify_json`, and `fingerprint_json`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pquintic::classify::{classify_with_workers, Mode};
use pquintic::families::{canonical_params, label_display};
use pquintic::groupspec::GroupSpec;
use pquintic::invariants::fingerprint;
use pquintic::iso::{are_isomorphic as iso_check, IsoResult};
use pquintic::mindeg::{minimal_degree, Strategy};
use pquintic::pc::PcPresentation;
use pquintic::table::GroupTable;

fn parse(spec: &str) -> PyResult<GroupSpec> {
    spec.parse::<GroupSpec>()
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn build(spec: &str) -> PyResult<PcPresentation> {
    parse(spec)?
        .build()
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A finite p-group given by a spec string such as `"Q@5"`,
/// `"params:Q@5:(1,0,1,3)"`, `"Qzeta:1@7:(1,1,0)"`, or `"named:E5@5"`.
#[pyclass]
struct Group {
    pres: PcPresentation,
    spec: String,
}

#[pymethods]
impl Group {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Group {
            pres: build(spec)?,
            spec: parse(spec)?.to_string(),
        })
    }

    fn order(&self) -> u64 {
        self.pres.order()
    }

    fn prime(&self) -> u32 {
        self.pres.prime()
    }

    fn generators(&self) -> Vec<String> {
        self.pres.labels().to_vec()
    }

    /// Order of the element `prod(generators[i] ** exponents[i])`.
    fn element_order(&self, exponents: Vec<u32>) -> PyResult<u64> {
        if exponents.len() != self.pres.ngens() {
            return Err(PyValueError::new_err(format!(
                "expected {} exponents",
                self.pres.ngens()
            )));
        }
        let mut e = self.pres.identity();
        e.exponents.copy_from_slice(&exponents);
        Ok(self.pres.element_order(&e))
    }

    /// Minimal faithful permutation degree.
    fn mu(&self) -> PyResult<usize> {
        let table = GroupTable::from_presentation(&self.pres)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(minimal_degree(&table, Strategy::Johnson).0)
    }

    /// Structural fingerprint as a JSON string.
    fn fingerprint_json(&self) -> PyResult<String> {
        let fp = fingerprint(&self.pres);
        serde_json::to_string(&fp).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn is_isomorphic(&self, other: &Group, budget: u64) -> PyResult<bool> {
        if self.pres.order() != other.pres.order() {
            return Ok(false);
        }
        match iso_check(&self.pres, &other.pres, budget)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?
        {
            IsoResult::Iso(_) => Ok(true),
            IsoResult::NotIso => Ok(false),
            IsoResult::BudgetExceeded => {
                Err(PyRuntimeError::new_err("isomorphism search budget exceeded"))
            }
        }
    }

    fn __repr__(&self) -> String {
        format!("Group({:?}, order={})", self.spec, self.pres.order())
    }
}

/// Minimal faithful permutation degree of the group given by `spec`.
#[pyfunction]
fn mu(spec: &str) -> PyResult<usize> {
    Group::new(spec)?.mu()
}

/// Canonical form of a parameter spec: returns
/// `(label, canonical_spec, trail)` where `trail` lists the generator maps
/// applied.
#[pyfunction]
fn canonicalize(spec: &str) -> PyResult<(String, String, Vec<String>)> {
    let GroupSpec::Params(fp) = parse(spec)? else {
        return Err(PyValueError::new_err(
            "canonicalize expects a parameter spec, e.g. params:Q@5:(2,3,1,4)",
        ));
    };
    let (label, canonical, trail) =
        canonical_params(&fp).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((
        label_display(fp.family, &label),
        canonical.to_string(),
        trail.iter().map(|m| m.to_string()).collect(),
    ))
}

/// Isomorphism test between two spec strings.
#[pyfunction]
#[pyo3(signature = (a, b, budget = 10_000_000))]
fn are_isomorphic(a: &str, b: &str, budget: u64) -> PyResult<bool> {
    Group::new(a)?.is_isomorphic(&Group::new(b)?, budget)
}

/// Classification report for one prime, as a JSON string.
#[pyfunction]
#[pyo3(signature = (p, mode = "invariants", workers = 1))]
fn classify_json(p: u32, mode: &str, workers: usize) -> PyResult<String> {
    let mode: Mode = mode.parse().map_err(PyValueError::new_err)?;
    let report = classify_with_workers(p, mode, workers.max(1))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(report.to_json())
}

#[pymodule]
fn _pquintic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Group>()?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(are_isomorphic, m)?)?;
    m.add_function(wrap_pyfunction!(classify_json, m)?)?;
    Ok(())
}
