//! Cubical complexes on axis-aligned boxes, optionally with a box-shaped
//! hole and homogeneous tangential data on a set of boundary sides.
//!
//! Entities live on a doubled-coordinate lattice: a point with coordinates
//! in `0..=2nᵢ` is a `p`-entity when exactly `p` of them are odd (nodes,
//! edges, faces, cells).

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::Instance;
use crate::complex::{HilbertComplex, WeightedSpace};
use crate::error::{Error, Result};
use crate::linalg::{GramOperator, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
    Hole,
}

impl Side {
    fn outer(axis: usize, max: bool) -> Side {
        match (axis, max) {
            (0, false) => Side::XMin,
            (0, true) => Side::XMax,
            (1, false) => Side::YMin,
            (1, true) => Side::YMax,
            (2, false) => Side::ZMin,
            _ => Side::ZMax,
        }
    }

    fn axis(self) -> Option<usize> {
        match self {
            Side::XMin | Side::XMax => Some(0),
            Side::YMin | Side::YMax => Some(1),
            Side::ZMin | Side::ZMax => Some(2),
            Side::Hole => None,
        }
    }
}

/// The part Γt of the boundary carrying homogeneous tangential data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GammaRepr", into = "GammaRepr")]
pub enum GammaT {
    All,
    Sides(BTreeSet<Side>),
}

impl GammaT {
    pub fn none() -> Self {
        GammaT::Sides(BTreeSet::new())
    }

    pub fn sides(sides: &[Side]) -> Self {
        GammaT::Sides(sides.iter().copied().collect())
    }

    pub fn contains(&self, side: Side) -> bool {
        match self {
            GammaT::All => true,
            GammaT::Sides(s) => s.contains(&side),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GammaRepr {
    Named(String),
    Sides(Vec<Side>),
}

impl TryFrom<GammaRepr> for GammaT {
    type Error = String;

    fn try_from(r: GammaRepr) -> std::result::Result<Self, String> {
        match r {
            GammaRepr::Named(s) if s == "all" => Ok(GammaT::All),
            GammaRepr::Named(s) if s == "none" => Ok(GammaT::none()),
            GammaRepr::Named(s) => Err(format!("unknown gamma_t '{s}', expected \"all\", \"none\" or a list of sides")),
            GammaRepr::Sides(v) => Ok(GammaT::Sides(v.into_iter().collect())),
        }
    }
}

impl From<GammaT> for GammaRepr {
    fn from(g: GammaT) -> Self {
        match g {
            GammaT::All => GammaRepr::Named("all".into()),
            GammaT::Sides(s) if s.is_empty() => GammaRepr::Named("none".into()),
            GammaT::Sides(s) => GammaRepr::Sides(s.into_iter().collect()),
        }
    }
}

/// Piecewise constant, diagonal material tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Uniform(f64),
    /// One value per axis, the same in every cell.
    Diagonal(Vec<f64>),
    /// One entry per cell (x fastest), each of length 1 or `dimension`.
    PerCell(Vec<Vec<f64>>),
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::Uniform(1.0)
    }
}

impl Epsilon {
    fn value(&self, cell: usize, axis: usize) -> f64 {
        match self {
            Epsilon::Uniform(v) => *v,
            Epsilon::Diagonal(v) => v[axis],
            Epsilon::PerCell(c) => {
                let e = &c[cell];
                if e.len() == 1 {
                    e[0]
                } else {
                    e[axis]
                }
            }
        }
    }
}

/// Box of removed cells, `lo ≤ index < hi` per axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    pub cells: Vec<usize>,
    /// Cell size; defaults to `1/cells[0]`.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub hole: Option<HoleBox>,
    #[serde(default = "GammaT::none")]
    pub gamma_t: GammaT,
    #[serde(default)]
    pub epsilon: Epsilon,
}

impl GridSpec {
    pub fn new(dimension: usize, n: usize) -> Self {
        Self {
            dimension,
            cells: vec![n; dimension],
            h: None,
            hole: None,
            gamma_t: GammaT::none(),
            epsilon: Epsilon::default(),
        }
    }

    pub fn with_gamma(mut self, gamma_t: GammaT) -> Self {
        self.gamma_t = gamma_t;
        self
    }

    pub fn with_hole(mut self, lo: Vec<usize>, hi: Vec<usize>) -> Self {
        self.hole = Some(HoleBox { lo, hi });
        self
    }

    pub fn with_epsilon(mut self, epsilon: Epsilon) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn spacing(&self) -> f64 {
        self.h.unwrap_or_else(|| 1.0 / self.cells.first().copied().unwrap_or(1) as f64)
    }

    pub fn num_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(1..=3).contains(&self.dimension) {
            return bad(format!("dimension must be 1, 2 or 3, got {}", self.dimension));
        }
        if self.cells.len() != self.dimension {
            return bad(format!("{} cell counts for dimension {}", self.cells.len(), self.dimension));
        }
        if let Some(&n) = self.cells.iter().find(|&&n| n < 2) {
            return bad(format!("cell counts must be at least 2, got {n}"));
        }
        let h = self.spacing();
        if !(h > 0.0 && h.is_finite()) {
            return bad(format!("spacing must be positive, got {h}"));
        }
        if let Some(hole) = &self.hole {
            if self.dimension < 2 {
                return bad("holes need dimension 2 or 3".into());
            }
            if hole.lo.len() != self.dimension || hole.hi.len() != self.dimension {
                return bad("hole bounds must have one entry per axis".into());
            }
            for a in 0..self.dimension {
                if hole.lo[a] < 1 || hole.hi[a] + 1 > self.cells[a] || hole.lo[a] >= hole.hi[a] {
                    return bad(format!(
                        "hole must lie strictly inside the box: axis {a} has [{}, {}) within 0..{}",
                        hole.lo[a], hole.hi[a], self.cells[a]
                    ));
                }
            }
        }
        if let GammaT::Sides(sides) = &self.gamma_t {
            for s in sides {
                match s.axis() {
                    Some(a) if a >= self.dimension => return bad(format!("side {s:?} invalid in dimension {}", self.dimension)),
                    None if self.hole.is_none() => return bad("side 'hole' given without a hole".into()),
                    _ => {}
                }
            }
        }
        let check = |v: f64| v > 0.0 && v.is_finite();
        match &self.epsilon {
            Epsilon::Uniform(v) if !check(*v) => return bad(format!("epsilon must be positive, got {v}")),
            Epsilon::Diagonal(v) if v.len() != self.dimension || !v.iter().all(|x| check(*x)) => {
                return bad("diagonal epsilon needs one positive value per axis".into())
            }
            Epsilon::PerCell(c) => {
                if c.len() != self.num_cells() {
                    return bad(format!("per-cell epsilon has {} entries for {} cells", c.len(), self.num_cells()));
                }
                if !c.iter().all(|e| (e.len() == 1 || e.len() == self.dimension) && e.iter().all(|x| check(*x))) {
                    return bad("per-cell epsilon entries must be positive with length 1 or dimension".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Physical coordinates of every degree of freedom, per level.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub points: Vec<Vec<[f64; 3]>>,
}

type Coord = [usize; 3];

struct Lattice {
    d: usize,
    ext: [usize; 3],
}

impl Lattice {
    fn odd_axes(&self, c: &Coord) -> Vec<usize> {
        (0..self.d).filter(|&a| c[a] % 2 == 1).collect()
    }

    fn all(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        let (ex, ey, ez) = (self.ext[0], self.ext[1], self.ext[2]);
        for z in 0..=ez {
            for y in 0..=ey {
                for x in 0..=ex {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }

    /// Cells whose closure contains `c`.
    fn adjacent_cells(&self, c: &Coord) -> Vec<Coord> {
        let mut out = vec![*c];
        for a in 0..self.d {
            if c[a] % 2 == 1 {
                continue;
            }
            let mut next = Vec::new();
            for base in &out {
                if base[a] >= 1 {
                    let mut b = *base;
                    b[a] -= 1;
                    next.push(b);
                }
                if base[a] < self.ext[a] {
                    let mut b = *base;
                    b[a] += 1;
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    /// Entities in the closure of `c` (including `c`).
    fn closure(&self, c: &Coord) -> Vec<Coord> {
        let mut out = vec![*c];
        for a in 0..self.d {
            if c[a] % 2 == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * 3);
            for base in &out {
                next.push(*base);
                let mut lo = *base;
                lo[a] -= 1;
                next.push(lo);
                let mut hi = *base;
                hi[a] += 1;
                next.push(hi);
            }
            out = next;
        }
        out
    }

    fn cell_index(&self, c: &Coord) -> usize {
        let n: Vec<usize> = (0..3).map(|a| self.ext[a] / 2).collect();
        let i = |a: usize| if a < self.d { (c[a] - 1) / 2 } else { 0 };
        i(0) + n[0] * (i(1) + n[1].max(1) * i(2))
    }
}

fn level_names(d: usize) -> Vec<Option<String>> {
    let all = ["grad_Γt", "rot_Γt", "div_Γt"];
    match d {
        1 => vec![Some(all[0].into())],
        2 => vec![Some(all[0].into()), Some(all[1].into())],
        _ => all.iter().map(|s| Some(s.to_string())).collect(),
    }
}

/// Builds the complex `H₀ → … → H_d` described by `spec`.
pub fn build_grid(spec: &GridSpec) -> Result<Instance> {
    spec.validate()?;
    let d = spec.dimension;
    let h = spec.spacing();
    let mut ext = [0usize; 3];
    for a in 0..d {
        ext[a] = 2 * spec.cells[a];
    }
    let lat = Lattice { d, ext };
    let all = lat.all();

    let in_hole = |c: &Coord| match &spec.hole {
        Some(hb) => (0..d).all(|a| {
            let i = (c[a] - 1) / 2;
            hb.lo[a] <= i && i < hb.hi[a]
        }),
        None => false,
    };
    let is_cell = |c: &Coord| (0..d).all(|a| c[a] % 2 == 1);
    let kept_cell = |c: &Coord| is_cell(c) && !in_hole(c);

    let mut present: HashMap<Coord, usize> = HashMap::new();
    for c in &all {
        let level = lat.odd_axes(c).len();
        if lat.adjacent_cells(c).iter().any(kept_cell) {
            present.insert(*c, level);
        }
    }

    // Boundary facets of the kept region and their sides.
    let mut removed: BTreeSet<Coord> = BTreeSet::new();
    for (c, &level) in &present {
        if level + 1 != d {
            continue;
        }
        let cells: Vec<Coord> = lat.adjacent_cells(c).into_iter().filter(kept_cell).collect();
        if cells.len() != 1 {
            continue;
        }
        let a = (0..d).find(|&a| c[a] % 2 == 0).expect("facet has one even axis");
        let side = if c[a] == 0 {
            Side::outer(a, false)
        } else if c[a] == ext[a] {
            Side::outer(a, true)
        } else {
            Side::Hole
        };
        if spec.gamma_t.contains(side) {
            removed.extend(lat.closure(c));
        }
    }

    let mut levels: Vec<Vec<Coord>> = vec![Vec::new(); d + 1];
    for c in &all {
        if let Some(&l) = present.get(c) {
            if !removed.contains(c) {
                levels[l].push(*c);
            }
        }
    }
    let index: Vec<HashMap<Coord, usize>> = levels
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, c)| (*c, i)).collect())
        .collect();

    let mut ops = Vec::with_capacity(d);
    for p in 0..d {
        let mut trips = Vec::new();
        for (j, e) in levels[p].iter().enumerate() {
            for a in 0..d {
                if e[a] % 2 == 1 {
                    continue;
                }
                for s in [-1i64, 1] {
                    if (s < 0 && e[a] == 0) || (s > 0 && e[a] == ext[a]) {
                        continue;
                    }
                    let mut f = *e;
                    f[a] = (e[a] as i64 + s) as usize;
                    let Some(&i) = index[p + 1].get(&f) else { continue };
                    let k = lat.odd_axes(&f).iter().position(|&b| b == a).expect("a is odd in f");
                    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
                    trips.push((i, j, -(s as f64) * parity / h));
                }
            }
        }
        ops.push(SparseOperator::from_triplets(levels[p + 1].len(), levels[p].len(), &trips)?);
    }

    let vol = h.powi(d as i32);
    let mut spaces = Vec::with_capacity(d + 1);
    for (p, ents) in levels.iter().enumerate() {
        let weights: Vec<f64> = if p == 1 {
            ents.iter()
                .map(|e| {
                    let a = lat.odd_axes(e)[0];
                    let cells: Vec<Coord> = lat.adjacent_cells(e).into_iter().filter(kept_cell).collect();
                    let avg = cells.iter().map(|c| spec.epsilon.value(lat.cell_index(c), a)).sum::<f64>() / cells.len() as f64;
                    vol * avg
                })
                .collect()
        } else {
            vec![vol; ents.len()]
        };
        spaces.push(WeightedSpace::new(GramOperator::diagonal(weights)?));
    }

    let complex = HilbertComplex::new(spaces, ops, level_names(d))?;
    let points = levels
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| [c[0] as f64 * h / 2.0, c[1] as f64 * h / 2.0, c[2] as f64 * h / 2.0])
                .collect()
        })
        .collect();
    Ok(Instance {
        name: format!("grid{d}d"),
        complex,
        geometry: Some(Geometry { points }),
        spec: Some(spec.clone()),
    })
}

pub fn build_grid2d(spec: &GridSpec) -> Result<Instance> {
    if spec.dimension != 2 {
        return Err(Error::InvalidSpec(format!("build_grid2d needs dimension 2, got {}", spec.dimension)));
    }
    build_grid(spec)
}

pub fn build_grid3d(spec: &GridSpec) -> Result<Instance> {
    if spec.dimension != 3 {
        return Err(Error::InvalidSpec(format!("build_grid3d needs dimension 3, got {}", spec.dimension)));
    }
    build_grid(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dirichlet {
    None,
    Left,
    Both,
}

/// Path with `n` edges on `[0, 1]`: nodes → edges, `grad` with `h = 1/n`.
pub fn build_path(n: usize, dirichlet: Dirichlet) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("path needs at least 2 edges, got {n}")));
    }
    let gamma = match dirichlet {
        Dirichlet::None => GammaT::none(),
        Dirichlet::Left => GammaT::sides(&[Side::XMin]),
        Dirichlet::Both => GammaT::sides(&[Side::XMin, Side::XMax]),
    };
    let mut inst = build_grid(&GridSpec::new(1, n).with_gamma(gamma))?;
    inst.name = format!("path{n}-{}", serde_json::to_value(dirichlet)?.as_str().unwrap_or("?"));
    Ok(inst)
}

/// Cycle graph with `n` nodes and `n` edges, `h = 1/n`.
pub fn build_cycle(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!("cycle needs at least 3 nodes, got {n}")));
    }
    let h = 1.0 / n as f64;
    let mut trips = Vec::with_capacity(2 * n);
    for e in 0..n {
        trips.push((e, e, -1.0 / h));
        trips.push((e, (e + 1) % n, 1.0 / h));
    }
    let grad = SparseOperator::from_triplets(n, n, &trips)?;
    let space = || WeightedSpace::new(GramOperator::Diagonal(vec![h; n]));
    let complex = HilbertComplex::new(vec![space(), space()], vec![grad], vec![Some("grad".into())])?;
    let tau = std::f64::consts::TAU;
    let node = |i: f64| [(tau * i / n as f64).cos(), (tau * i / n as f64).sin(), 0.0];
    let points = vec![
        (0..n).map(|i| node(i as f64)).collect(),
        (0..n).map(|i| node(i as f64 + 0.5)).collect(),
    ];
    Ok(Instance {
        name: format!("cycle{n}"),
        complex,
        geometry: Some(Geometry { points }),
        spec: None,
    })
}
