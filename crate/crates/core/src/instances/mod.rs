//! Concrete complexes: paths, cycles and cubical grids in one to three
//! dimensions, plus manufactured solutions on them.

mod grid;
mod manufacture;

pub use grid::{
    build_cycle, build_grid, build_grid2d, build_grid3d, build_path, Dirichlet, Epsilon, GammaT, Geometry, GridSpec,
    HoleBox, Side,
};
pub use manufacture::{manufacture, manufacture_second_order, ManufacturedScenario, Recipe, SecondOrderScenario};

use crate::complex::HilbertComplex;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub complex: HilbertComplex,
    pub geometry: Option<Geometry>,
    pub spec: Option<GridSpec>,
}

impl Instance {
    pub fn manufacture(&self, level: usize, recipe: Recipe, seed: u64) -> Result<ManufacturedScenario> {
        manufacture(&self.complex, self.geometry.as_ref(), level, recipe, seed)
    }

    pub fn manufacture_second_order(&self, level: usize, seed: u64) -> Result<SecondOrderScenario> {
        manufacture_second_order(&self.complex, self.geometry.as_ref(), level, seed)
    }

    /// The reversed complex; geometry follows the level renumbering.
    pub fn dual(&self) -> Result<Instance> {
        let geometry = self.geometry.as_ref().map(|g| Geometry {
            points: g.points.iter().rev().cloned().collect(),
        });
        Ok(Instance {
            name: format!("{}-dual", self.name),
            complex: self.complex.dual()?,
            geometry,
            spec: self.spec.clone(),
        })
    }
}

/// Serializable description of a buildable instance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpec {
    Path { n: usize, dirichlet: Dirichlet },
    Cycle { n: usize },
    Grid(GridSpec),
}

impl InstanceSpec {
    pub fn build(&self) -> Result<Instance> {
        match self {
            InstanceSpec::Path { n, dirichlet } => build_path(*n, *dirichlet),
            InstanceSpec::Cycle { n } => build_cycle(*n),
            InstanceSpec::Grid(spec) => build_grid(spec),
        }
    }
}
