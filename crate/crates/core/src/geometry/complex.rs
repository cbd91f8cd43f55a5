use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An oriented simplicial n-complex with boundary.
///
/// Every k-simplex is stored as a sorted vertex tuple; lower simplices carry the
/// orientation of their sorted order. Top cells carry an extra sign so that the
/// complex is coherently oriented when the input is. Simplices of each degree are
/// kept in lexicographic order, which is the canonical cochain ordering.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    dim: usize,
    simplices: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    faces: Vec<Vec<Vec<(usize, i8)>>>,
    cofaces: Vec<Vec<Vec<usize>>>,
    cells_of: Vec<Vec<Vec<usize>>>,
    orientation: Vec<i8>,
    on_boundary: Vec<Vec<bool>>,
    fingerprint: u64,
}

/// Sign of the permutation sorting `tuple`.
pub(crate) fn sort_parity(tuple: &[usize]) -> i8 {
    let mut sign = 1i8;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            if tuple[i] > tuple[j] {
                sign = -sign;
            }
        }
    }
    sign
}

impl SimplicialComplex {
    /// Builds a complex from its top cells. The listed vertex order of each cell
    /// defines its orientation.
    pub fn from_cells(dim: usize, num_vertices: usize, cells: &[Vec<usize>]) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension {dim} outside 1..=4")));
        }
        if cells.is_empty() {
            return Err(Error::InvalidMesh("no cells".into()));
        }
        let mut sorted_cells = Vec::with_capacity(cells.len());
        let mut orientation = Vec::with_capacity(cells.len());
        for cell in cells {
            if cell.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!(
                    "cell {cell:?} does not have {} vertices",
                    dim + 1
                )));
            }
            if let Some(v) = cell.iter().find(|&&v| v >= num_vertices) {
                return Err(Error::InvalidMesh(format!("vertex {v} out of range")));
            }
            let mut s = cell.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidMesh(format!("degenerate cell {cell:?}")));
            }
            orientation.push(sort_parity(cell));
            sorted_cells.push(s);
        }
        // canonical order of top cells
        let order: Vec<usize> = (0..sorted_cells.len())
            .sorted_by(|&a, &b| sorted_cells[a].cmp(&sorted_cells[b]))
            .collect();
        let sorted_cells: Vec<Vec<usize>> = order.iter().map(|&i| sorted_cells[i].clone()).collect();
        let orientation: Vec<i8> = order.iter().map(|&i| orientation[i]).collect();
        if sorted_cells.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMesh("duplicate cell".into()));
        }

        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::with_capacity(dim + 1);
        for k in 0..dim {
            let mut set = BTreeSet::new();
            for cell in &sorted_cells {
                for face in cell.iter().copied().combinations(k + 1) {
                    set.insert(face);
                }
            }
            simplices.push(set.into_iter().collect());
        }
        simplices.push(sorted_cells);
        if simplices[0].len() != num_vertices {
            return Err(Error::InvalidMesh(format!(
                "{} of {} vertices are used by cells",
                simplices[0].len(),
                num_vertices
            )));
        }

        let lookup: Vec<HashMap<Vec<usize>, usize>> = simplices
            .iter()
            .map(|list| list.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();

        let mut faces = vec![Vec::new()];
        for k in 1..=dim {
            let list: Vec<Vec<(usize, i8)>> = simplices[k]
                .iter()
                .enumerate()
                .map(|(idx, s)| {
                    let top_sign = if k == dim { orientation[idx] } else { 1 };
                    (0..=k)
                        .map(|i| {
                            let mut f = s.clone();
                            f.remove(i);
                            let sign = if i % 2 == 0 { 1 } else { -1 };
                            (lookup[k - 1][&f], sign * top_sign)
                        })
                        .collect()
                })
                .collect();
            faces.push(list);
        }

        let mut cofaces: Vec<Vec<Vec<usize>>> =
            simplices.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for k in 1..=dim {
            for (idx, fl) in faces[k].iter().enumerate() {
                for &(f, _) in fl {
                    cofaces[k - 1][f].push(idx);
                }
            }
        }

        let mut cells_of: Vec<Vec<Vec<usize>>> =
            simplices.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for (c, cell) in simplices[dim].iter().enumerate() {
            for k in 0..=dim {
                for face in cell.iter().copied().combinations(k + 1) {
                    cells_of[k][lookup[k][&face]].push(c);
                }
            }
        }

        let mut on_boundary: Vec<Vec<bool>> =
            simplices.iter().map(|l| vec![false; l.len()]).collect();
        for (f, co) in cofaces[dim - 1].iter().enumerate() {
            match co.len() {
                1 => on_boundary[dim - 1][f] = true,
                2 => {}
                m => {
                    return Err(Error::InvalidMesh(format!(
                        "face {:?} has {m} cofaces",
                        simplices[dim - 1][f]
                    )))
                }
            }
        }
        for k in (1..dim).rev() {
            for s in 0..simplices[k].len() {
                if on_boundary[k][s] {
                    for &(f, _) in &faces[k][s] {
                        on_boundary[k - 1][f] = true;
                    }
                }
            }
        }

        let mut hasher = DefaultHasher::new();
        dim.hash(&mut hasher);
        num_vertices.hash(&mut hasher);
        simplices[dim].hash(&mut hasher);
        orientation.hash(&mut hasher);
        let fingerprint = hasher.finish();

        Ok(Self {
            dim,
            simplices,
            lookup,
            faces,
            cofaces,
            cells_of,
            orientation,
            on_boundary,
            fingerprint,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.simplices[0].len()
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    /// Face counts (f-vector) for k = 0..=n.
    pub fn f_vector(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(k, l)| if k % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        &self.simplices[k]
    }

    pub fn simplex(&self, k: usize, i: usize) -> &[usize] {
        &self.simplices[k][i]
    }

    /// Index of a k-simplex given by any vertex tuple (order ignored).
    pub fn find(&self, vertices: &[usize]) -> Option<usize> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        let k = key.len().checked_sub(1)?;
        self.lookup.get(k)?.get(&key).copied()
    }

    /// Faces of a k-simplex with incidence signs (k ≥ 1).
    pub fn faces(&self, k: usize, i: usize) -> &[(usize, i8)] {
        &self.faces[k][i]
    }

    /// (k+1)-simplices containing the k-simplex `i`.
    pub fn cofaces(&self, k: usize, i: usize) -> &[usize] {
        &self.cofaces[k][i]
    }

    /// Top cells containing the k-simplex `i`, in increasing index order.
    pub fn cells_containing(&self, k: usize, i: usize) -> &[usize] {
        &self.cells_of[k][i]
    }

    /// Orientation sign of top cell `c` relative to its sorted vertex order.
    pub fn orientation(&self, c: usize) -> i8 {
        self.orientation[c]
    }

    pub fn orientations(&self) -> &[i8] {
        &self.orientation
    }

    pub fn is_boundary(&self, k: usize, i: usize) -> bool {
        self.on_boundary[k][i]
    }

    pub fn boundary_flags(&self, k: usize) -> &[bool] {
        &self.on_boundary[k]
    }

    /// Indices of boundary k-simplices in canonical order.
    pub fn boundary_indices(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&i| self.on_boundary[k][i]).collect()
    }

    pub fn interior_indices(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&i| !self.on_boundary[k][i]).collect()
    }

    pub fn has_boundary(&self) -> bool {
        self.on_boundary[self.dim - 1].iter().any(|&b| b)
    }

    /// Identifier used to check that cochains belong to this complex.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Local positions (within the sorted cell tuple) of the vertices of `simplex`.
    pub(crate) fn local_positions(&self, cell: usize, simplex: &[usize]) -> Vec<usize> {
        let c = &self.simplices[self.dim][cell];
        simplex
            .iter()
            .map(|v| c.binary_search(v).expect("simplex not in cell"))
            .collect()
    }

    /// Integer incidence matrix ∂_k as (row, col, sign) triplets, rows indexing
    /// (k-1)-simplices.
    pub fn boundary_triplets(&self, k: usize) -> Vec<(usize, usize, i8)> {
        let mut out = Vec::new();
        if k == 0 || k > self.dim {
            return out;
        }
        for (col, fl) in self.faces[k].iter().enumerate() {
            for &(row, s) in fl {
                out.push((row, col, s));
            }
        }
        out
    }

    /// Checks ∂_{k-1}∘∂_k = 0 in exact integer arithmetic for every k.
    pub fn check_boundary_squared(&self) -> bool {
        for k in 2..=self.dim {
            for fl in &self.faces[k] {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for &(f, s) in fl {
                    for &(g, t) in &self.faces[k - 1][f] {
                        *acc.entry(g).or_default() += (s as i64) * (t as i64);
                    }
                }
                if acc.values().any(|&v| v != 0) {
                    return false;
                }
            }
        }
        true
    }

    /// True when every interior (n-1)-face sees opposite induced orientations from
    /// its two cofaces.
    pub fn is_coherently_oriented(&self) -> bool {
        let n = self.dim;
        let mut seen = vec![0i32; self.count(n - 1)];
        for fl in &self.faces[n] {
            for &(f, s) in fl {
                seen[f] += s as i32;
            }
        }
        (0..self.count(n - 1)).all(|f| {
            if self.on_boundary[n - 1][f] {
                seen[f].abs() == 1
            } else {
                seen[f] == 0
            }
        })
    }
}

/// An integer k-chain on a complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub degree: usize,
    pub coeffs: Vec<i64>,
}

impl Chain {
    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Self {
        Self { degree, coeffs: vec![0; complex.count(degree)] }
    }

    pub fn boundary(&self, complex: &SimplicialComplex) -> Chain {
        let mut out = Chain::zero(complex, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                for &(f, s) in complex.faces(self.degree, i) {
                    out.coeffs[f] += c * s as i64;
                }
            }
        }
        out
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, _)| i)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}
