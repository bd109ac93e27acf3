//! Python bindings for the volume-product toolkit: grid densities, star
//! bodies, and the verifiers, with reports returned as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use santalo::grid::GridFunction;
use santalo::instances::InstanceSpec;
use santalo::polar::{default_polar_box, polar_function};
use santalo::starbody::{verify_cn_identity, verify_lutwak, StarBody};
use santalo::theorems::{santalo_product, verify_thm2, verify_thm3_median};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

/// A log-concave density sampled on a uniform grid.
#[pyclass(name = "GridFunction", frozen)]
struct PyGridFunction {
    inner: GridFunction,
}

#[pymethods]
impl PyGridFunction {
    /// Builds a density from an instance spec string such as `gaussian`,
    /// `scaled_gaussian(2)`, or `logconcave_mixture(7,3)`.
    #[staticmethod]
    #[pyo3(signature = (spec, dim = 1))]
    fn from_instance(spec: &str, dim: usize) -> PyResult<Self> {
        let parsed = InstanceSpec::parse(spec, dim).map_err(value_err)?;
        let built = parsed.build().map_err(value_err)?;
        let inner = built
            .as_function()
            .ok_or_else(|| value_err("spec names a star body, not a density"))?
            .clone();
        Ok(PyGridFunction { inner })
    }

    /// Reads the binary grid format written by `save`.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyGridFunction {
            inner: GridFunction::load_path(path).map_err(value_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_path(path).map_err(value_err)
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn counts(&self) -> Vec<usize> {
        self.inner.counts().to_vec()
    }

    /// Trapezoid mass of the density.
    fn mass(&self) -> f64 {
        self.inner.integrate()
    }

    fn barycenter(&self) -> PyResult<Vec<f64>> {
        self.inner.barycenter().map_err(value_err)
    }

    /// The density shifted so that `x` maps to `x - z`.
    fn translate(&self, z: Vec<f64>) -> PyResult<Self> {
        if z.len() != self.inner.dim() {
            return Err(value_err(format!(
                "shift has {} components, expected {}",
                z.len(),
                self.inner.dim()
            )));
        }
        Ok(PyGridFunction {
            inner: self.inner.translate(&z),
        })
    }

    /// Polar dual on the mirrored support box.
    fn polar(&self) -> PyResult<Self> {
        let out = default_polar_box(&self.inner);
        let tr = polar_function(&self.inner, &out).map_err(value_err)?;
        Ok(PyGridFunction { inner: tr.output })
    }

    fn __repr__(&self) -> String {
        format!(
            "GridFunction(dim={}, counts={:?}, mass={:.6})",
            self.inner.dim(),
            self.inner.counts(),
            self.inner.integrate()
        )
    }
}

/// A star-shaped body described by a radial function on an angular grid.
#[pyclass(name = "StarBody", frozen)]
struct PyStarBody {
    inner: StarBody,
}

#[pymethods]
impl PyStarBody {
    /// Builds a body from an instance spec string such as `ball`, `cube`,
    /// `ellipsoid(2,0.5)`, or `random_star(3)`.
    #[staticmethod]
    #[pyo3(signature = (spec, dim = 2))]
    fn from_instance(spec: &str, dim: usize) -> PyResult<Self> {
        let parsed = InstanceSpec::parse(spec, dim).map_err(value_err)?;
        let built = parsed.build().map_err(value_err)?;
        let inner = built
            .as_body()
            .ok_or_else(|| value_err("spec names a density, not a star body"))?
            .clone();
        Ok(PyStarBody { inner })
    }

    /// Reads the JSON body format written by `save`.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyStarBody {
            inner: StarBody::load_json_path(path).map_err(value_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_json_path(path).map_err(value_err)
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn centroid(&self) -> Vec<f64> {
        self.inner.centroid()
    }

    /// Minkowski gauge of a point: below 1 inside, above 1 outside.
    fn gauge(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(value_err(format!(
                "point has {} components, expected {}",
                x.len(),
                self.inner.dim()
            )));
        }
        Ok(self.inner.gauge(&x))
    }

    fn polar(&self) -> PyResult<Self> {
        Ok(PyStarBody {
            inner: self.inner.polar_body().map_err(value_err)?,
        })
    }

    /// Translated copy whose centroid sits at the origin.
    fn recenter(&self) -> PyResult<Self> {
        Ok(PyStarBody {
            inner: self.inner.recenter().map_err(value_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "StarBody(dim={}, volume={:.6})",
            self.inner.dim(),
            self.inner.volume()
        )
    }
}

/// Centered product bound report for a density, as JSON.
#[pyfunction]
fn verify_functional(f: PyRef<'_, PyGridFunction>) -> PyResult<String> {
    let rep = verify_thm2(&f.inner, None).map_err(value_err)?;
    Ok(to_json(&rep))
}

/// Median-split bound report along `direction`, as JSON.
#[pyfunction]
fn verify_median(f: PyRef<'_, PyGridFunction>, direction: Vec<f64>) -> PyResult<String> {
    let rep = verify_thm3_median(&f.inner, &direction, None).map_err(value_err)?;
    Ok(to_json(&rep))
}

/// Volume product report for a star body (direct and functional routes),
/// as JSON.
#[pyfunction]
fn verify_star(b: PyRef<'_, PyStarBody>) -> PyResult<String> {
    let rep = verify_lutwak(&b.inner).map_err(value_err)?;
    Ok(to_json(&rep))
}

/// Gaussian-weight identity report for a star body, as JSON.
#[pyfunction]
fn verify_volume_identity(b: PyRef<'_, PyStarBody>) -> PyResult<String> {
    let rep = verify_cn_identity(&b.inner).map_err(value_err)?;
    Ok(to_json(&rep))
}

/// Product of the mass of `f` and the mass of its polar dual.
#[pyfunction]
fn product(f: PyRef<'_, PyGridFunction>) -> PyResult<f64> {
    santalo_product(&f.inner, None).map_err(value_err)
}

#[pymodule]
fn santalopy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridFunction>()?;
    m.add_class::<PyStarBody>()?;
    m.add_function(wrap_pyfunction!(verify_functional, m)?)?;
    m.add_function(wrap_pyfunction!(verify_median, m)?)?;
    m.add_function(wrap_pyfunction!(verify_star, m)?)?;
    m.add_function(wrap_pyfunction!(verify_volume_identity, m)?)?;
    m.add_function(wrap_pyfunction!(product, m)?)?;
    Ok(())
}
