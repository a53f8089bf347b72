//! Python bindings for the conesmith toolkit.
//!
//! Small typed accessors return native Python values; full analyses return
//! the same deterministic JSON documents the CLI prints, as strings.

use conesmith::cones::RationalCone;
use conesmith::k3::{main_theorem_probe, standard_scenario};
use conesmith::lattice::{discriminant_form, IntegralLattice};
use conesmith::linalg::{bint, IntMat, IntVec};
use conesmith::perfect::{default_height, verify_perfect_canonical, SelfAdjointConeModel, Window};
use conesmith::quotient::{quotient_analysis, DEFAULT_GROUP_BOUND};
use conesmith::report;
use conesmith::toric::singularity_verdict;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn int_mat(rows: &[Vec<i64>]) -> IntMat {
    IntMat::from_rows(rows)
}

fn int_vecs(rows: &[Vec<i64>]) -> Vec<IntVec> {
    rows.iter()
        .map(|r| r.iter().map(|&x| bint(x)).collect())
        .collect()
}

fn strings<T: std::fmt::Display>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Even or odd integral lattice with exact arithmetic.
#[pyclass(name = "Lattice")]
struct PyLattice {
    inner: IntegralLattice,
}

#[pymethods]
impl PyLattice {
    #[new]
    fn new(gram: Vec<Vec<i64>>) -> PyResult<Self> {
        let inner = IntegralLattice::new(int_mat(&gram)).map_err(err)?;
        Ok(PyLattice { inner })
    }

    /// Built-in names: "U", "E8", "E8(-1)", "<k>" and '+'-sums.
    #[staticmethod]
    fn from_name(name: &str) -> PyResult<Self> {
        Ok(PyLattice {
            inner: IntegralLattice::from_name(name).map_err(err)?,
        })
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn det(&self) -> String {
        self.inner.det().to_string()
    }

    fn is_even(&self) -> bool {
        self.inner.is_even()
    }

    fn signature(&self) -> PyResult<(usize, usize, usize)> {
        self.inner.signature().map_err(err)
    }

    fn gram(&self) -> Vec<Vec<String>> {
        (0..self.inner.rank())
            .map(|i| strings(&self.inner.gram().row(i)))
            .collect()
    }

    /// Discriminant group and quadratic form as a JSON document.
    fn discriminant_json(&self) -> PyResult<String> {
        let form = discriminant_form(&self.inner).map_err(err)?;
        Ok(report::to_pretty_string(&report::discriminant_value(&form)))
    }

    fn __repr__(&self) -> String {
        let (p, n, z) = self.inner.signature().unwrap_or((0, 0, 0));
        format!(
            "Lattice(rank={}, signature=({p},{n},{z}), det={})",
            self.inner.rank(),
            self.inner.det()
        )
    }
}

/// Rational polyhedral cone with exact double description.
#[pyclass(name = "Cone")]
struct PyCone {
    inner: RationalCone,
}

#[pymethods]
impl PyCone {
    #[new]
    fn new(generators: Vec<Vec<i64>>) -> PyResult<Self> {
        if generators.is_empty() {
            return Err(PyValueError::new_err("cone needs at least one generator"));
        }
        let dim = generators[0].len();
        let inner = RationalCone::from_generators(&int_vecs(&generators), dim).map_err(err)?;
        Ok(PyCone { inner })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn is_pointed(&self) -> bool {
        self.inner.is_pointed()
    }

    fn rays(&self) -> Vec<Vec<String>> {
        self.inner.rays().iter().map(|r| strings(r)).collect()
    }

    fn facet_normals(&self) -> Vec<Vec<String>> {
        self.inner
            .facet_normals()
            .iter()
            .map(|r| strings(r))
            .collect()
    }

    fn dual(&self) -> PyCone {
        PyCone {
            inner: conesmith::cones::dual_cone(&self.inner),
        }
    }

    /// Q-Gorenstein / canonical verdict as a JSON document.
    fn singularity_json(&self) -> PyResult<String> {
        let verdict = singularity_verdict(&self.inner).map_err(err)?;
        Ok(report::to_pretty_string(&report::verdict_value(&verdict)))
    }

    fn __repr__(&self) -> String {
        format!(
            "Cone(ambient_dim={}, dim={}, rays={})",
            self.inner.ambient_dim(),
            self.inner.dim(),
            self.inner.rays().len()
        )
    }
}

/// Local perfect cone decomposition with canonical-singularity verification.
#[pyfunction]
#[pyo3(signature = (model, window, lattice=None, g=None, height=None, component=None))]
fn perfect_fan_json(
    model: &str,
    window: Vec<Vec<i64>>,
    lattice: Option<&str>,
    g: Option<usize>,
    height: Option<i64>,
    component: Option<Vec<i64>>,
) -> PyResult<String> {
    let model = match model {
        "lorentzian" => {
            let name =
                lattice.ok_or_else(|| PyValueError::new_err("lorentzian model needs lattice="))?;
            let lat = IntegralLattice::from_name(name).map_err(err)?;
            match component {
                Some(p) => {
                    SelfAdjointConeModel::lorentzian(lat, p.iter().map(|&x| bint(x)).collect())
                        .map_err(err)?
                }
                None => SelfAdjointConeModel::lorentzian_auto(lat).map_err(err)?,
            }
        }
        "psd" => {
            SelfAdjointConeModel::psd(g.ok_or_else(|| PyValueError::new_err("psd model needs g="))?)
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown model '{other}' (expected lorentzian or psd)"
            )))
        }
    };
    let dim = model.dim();
    let cone = RationalCone::from_generators(&int_vecs(&window), dim).map_err(err)?;
    let window = Window::new(&model, cone).map_err(err)?;
    let height = height.unwrap_or_else(|| default_height(&model));
    let result = verify_perfect_canonical(&model, &window, height).map_err(err)?;
    Ok(report::to_pretty_string(&report::perfect_canonical_value(
        &result,
    )))
}

/// Quotient of the toric variety of a cone by a finite matrix group.
#[pyfunction]
fn quotient_json(generators: Vec<Vec<i64>>, group: Vec<Vec<Vec<i64>>>) -> PyResult<String> {
    if generators.is_empty() {
        return Err(PyValueError::new_err("cone needs at least one generator"));
    }
    let dim = generators[0].len();
    let cone = RationalCone::from_generators(&int_vecs(&generators), dim).map_err(err)?;
    let mats: Vec<IntMat> = group.iter().map(|m| int_mat(m)).collect();
    let analysis = quotient_analysis(&cone, &mats, DEFAULT_GROUP_BOUND).map_err(err)?;
    Ok(report::to_pretty_string(&report::quotient_value(
        &cone, &analysis,
    )))
}

/// Polarized K3 scenario for half-degree d, with an optional lifting probe.
#[pyfunction]
#[pyo3(signature = (d, probe_height=0, lift_bound=4))]
fn k3_scenario_json(d: i64, probe_height: i64, lift_bound: i64) -> PyResult<String> {
    let scenario = standard_scenario(d).map_err(err)?;
    let probe = if probe_height > 0 {
        Some(main_theorem_probe(&scenario.isotropic, probe_height, lift_bound).map_err(err)?)
    } else {
        None
    };
    Ok(report::to_pretty_string(&report::scenario_value(
        &scenario,
        Some(d),
        probe.as_ref(),
    )))
}

/// The worked quotient example, identical to the CLI's `paper-example`.
#[pyfunction]
fn paper_example_json() -> PyResult<String> {
    let value = report::paper_example().map_err(err)?;
    Ok(report::to_pretty_string(&value))
}

#[pymodule]
fn conesmith_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyCone>()?;
    m.add_function(wrap_pyfunction!(perfect_fan_json, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_json, m)?)?;
    m.add_function(wrap_pyfunction!(k3_scenario_json, m)?)?;
    m.add_function(wrap_pyfunction!(paper_example_json, m)?)?;
    Ok(())
}
