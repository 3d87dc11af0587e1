//! On-disk form of a complex: a JSON manifest next to Matrix Market
//! operator files and Gram files (CSV diagonals or Matrix Market).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complex::{HilbertComplex, WeightedSpace};
use crate::error::{Error, Result};
use crate::instances::{Instance, InstanceSpec};
use crate::linalg::io::{read_matrix_market, read_vector_csv, write_matrix_market, write_vector_csv};
use crate::linalg::GramOperator;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceEntry {
    pub dim: usize,
    /// Gram file relative to the manifest; identity when absent.
    #[serde(default)]
    pub gram: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorEntry {
    pub file: String,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub spaces: Vec<SpaceEntry>,
    pub operators: Vec<OperatorEntry>,
    /// How the complex was built, if it came from a builder.
    #[serde(default)]
    pub instance: Option<InstanceSpec>,
}

fn gram_from_file(path: &Path, dim: usize) -> Result<GramOperator> {
    let gram = if path.extension().is_some_and(|e| e == "mtx") {
        GramOperator::general(read_matrix_market(path)?)?
    } else {
        GramOperator::diagonal(read_vector_csv(path)?)?
    };
    if gram.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "gram file",
            expected: dim,
            found: gram.dim(),
        });
    }
    Ok(gram)
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads the complex; relative paths resolve against `base`.
    pub fn load_complex(&self, base: &Path) -> Result<HilbertComplex> {
        let spaces = self
            .spaces
            .iter()
            .map(|s| match &s.gram {
                None => Ok(WeightedSpace::euclidean(s.dim)),
                Some(file) => Ok(WeightedSpace::new(gram_from_file(&base.join(file), s.dim)?)),
            })
            .collect::<Result<Vec<_>>>()?;
        let ops = self
            .operators
            .iter()
            .map(|o| read_matrix_market(&base.join(&o.file)))
            .collect::<Result<Vec<_>>>()?;
        let names = self.operators.iter().map(|o| o.label.clone()).collect();
        HilbertComplex::new(spaces, ops, names)
    }
}

/// Reads a manifest (file or directory containing `manifest.json`) and
/// returns the instance, with geometry when the builder spec is recorded
/// and reproduces the stored dimensions.
pub fn load_instance(path: &Path) -> Result<(Manifest, Instance)> {
    let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let base = file.parent().map(Path::to_path_buf).unwrap_or_default();
    let manifest = Manifest::read(&file)?;
    let complex = manifest.load_complex(&base)?;
    let mut geometry = None;
    let mut spec = None;
    if let Some(inst) = &manifest.instance {
        if let Ok(built) = inst.build() {
            let dims_match = built.complex.num_spaces() == complex.num_spaces()
                && (0..complex.num_spaces() as isize).all(|l| built.complex.dim(l) == complex.dim(l));
            if dims_match {
                geometry = built.geometry;
                spec = built.spec;
            }
        }
    }
    let instance = Instance {
        name: manifest.name.clone(),
        complex,
        geometry,
        spec,
    };
    Ok((manifest, instance))
}

/// Writes `manifest.json`, `op_<l>.mtx` and `gram_<l>.csv|mtx` into `dir`.
pub fn write_instance(dir: &Path, instance: &Instance, spec: Option<&InstanceSpec>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let c = &instance.complex;
    let mut spaces = Vec::new();
    for (l, s) in c.spaces().iter().enumerate() {
        let gram = match s.gram.as_diagonal() {
            Some(d) if d.iter().all(|v| *v == 1.0) => None,
            Some(d) => {
                let name = format!("gram_{l}.csv");
                write_vector_csv(&dir.join(&name), d)?;
                Some(name)
            }
            None => {
                let name = format!("gram_{l}.mtx");
                write_matrix_market(&dir.join(&name), &s.gram.to_sparse())?;
                Some(name)
            }
        };
        spaces.push(SpaceEntry { dim: s.dim, gram });
    }
    let mut operators = Vec::new();
    for (l, a) in c.ops().iter().enumerate() {
        let file = format!("op_{l}.mtx");
        write_matrix_market(&dir.join(&file), a)?;
        operators.push(OperatorEntry {
            file,
            label: c.names().get(l).cloned().flatten(),
        });
    }
    let manifest = Manifest {
        name: instance.name.clone(),
        spaces,
        operators,
        instance: spec.cloned(),
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}
