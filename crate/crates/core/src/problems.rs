//! Model problems on regular grids and reproducible right-hand sides.
//!
//! Grids exclude the (Dirichlet) boundary: `laplace2d(nx, ny)` has `nx * ny`
//! unknowns, the elasticity problems have `dim` unknowns per interior node.

use std::fmt;
use std::str::FromStr;

use crate::csr::{CsrMatrix, TripletBuilder};
use crate::error::{Error, Result};

/// Default Poisson ratio for the elasticity problems (unit Young's modulus).
pub const DEFAULT_POISSON_RATIO: f64 = 0.25;

/// 3-point Laplacian `tridiag(-1, 2, -1)`.
pub fn laplace1d(n: usize) -> CsrMatrix<f64> {
    stencil_laplace([n, 1, 1], 1)
}

/// 5-point Laplacian, diagonal 4, lexicographic ordering with `x` fastest.
pub fn laplace2d(nx: usize, ny: usize) -> CsrMatrix<f64> {
    stencil_laplace([nx, ny, 1], 2)
}

/// 7-point Laplacian, diagonal 6.
pub fn laplace3d(nx: usize, ny: usize, nz: usize) -> CsrMatrix<f64> {
    stencil_laplace([nx, ny, nz], 3)
}

fn stencil_laplace(dims: [usize; 3], axes: usize) -> CsrMatrix<f64> {
    let [nx, ny, nz] = dims;
    let n = nx * ny * nz;
    let diag = 2.0 * axes as f64;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * (2 * axes + 1));
    let mut values = Vec::with_capacity(col_idx.capacity());
    row_ptr.push(0);
    let idx = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                // ascending column order: -z, -y, -x, self, +x, +y, +z
                let mut push = |c: usize, v: f64| {
                    col_idx.push(c);
                    values.push(v);
                };
                if z > 0 {
                    push(idx(x, y, z - 1), -1.0);
                }
                if y > 0 {
                    push(idx(x, y - 1, z), -1.0);
                }
                if x > 0 {
                    push(idx(x - 1, y, z), -1.0);
                }
                push(idx(x, y, z), diag);
                if x + 1 < nx {
                    push(idx(x + 1, y, z), -1.0);
                }
                if y + 1 < ny {
                    push(idx(x, y + 1, z), -1.0);
                }
                if z + 1 < nz {
                    push(idx(x, y, z + 1), -1.0);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    CsrMatrix::from_parts_unchecked(n, n, row_ptr, col_idx, values)
}

/// Plane-strain isotropic elasticity, bilinear elements on the unit square,
/// clamped on the whole boundary. Unknowns interleaved `(u_x, u_y)` per node.
pub fn elasticity2d(nx: usize, ny: usize, nu: f64) -> Result<CsrMatrix<f64>> {
    elasticity(&[nx, ny], nu)
}

/// Isotropic elasticity, trilinear elements on the unit cube, clamped boundary.
pub fn elasticity3d(nx: usize, ny: usize, nz: usize, nu: f64) -> Result<CsrMatrix<f64>> {
    elasticity(&[nx, ny, nz], nu)
}

fn elasticity(interior: &[usize], nu: f64) -> Result<CsrMatrix<f64>> {
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::Config(format!(
            "Poisson ratio must lie in [0, 0.5), got {nu}"
        )));
    }
    if interior.contains(&0) {
        return Err(Error::Config("grid counts must be at least 1".into()));
    }
    let dim = interior.len();
    // h per axis; elements per axis = interior + 1
    let h: Vec<f64> = interior.iter().map(|&m| 1.0 / (m + 1) as f64).collect();
    let ke = element_stiffness(&h, nu);
    let nodes_per_elem = 1usize << dim;
    let ndof = dim * interior.iter().product::<usize>();
    let nelem: usize = interior.iter().map(|&m| m + 1).product();
    let mut builder =
        TripletBuilder::with_capacity(ndof, ndof, nelem * (dim * nodes_per_elem).pow(2));

    let mut e = vec![0usize; dim];
    let mut gdof = vec![None; dim * nodes_per_elem];
    for _ in 0..nelem {
        for a in 0..nodes_per_elem {
            // node coordinates on the full grid including boundary
            let mut id = 0usize;
            let mut stride = 1usize;
            let mut free = true;
            for ax in 0..dim {
                let p = e[ax] + ((a >> ax) & 1);
                if p == 0 || p == interior[ax] + 1 {
                    free = false;
                    break;
                }
                id += (p - 1) * stride;
                stride *= interior[ax];
            }
            for c in 0..dim {
                gdof[dim * a + c] = free.then_some(dim * id + c);
            }
        }
        for (p, gp) in gdof.iter().enumerate() {
            let Some(i) = *gp else { continue };
            for (q, gq) in gdof.iter().enumerate() {
                let Some(j) = *gq else { continue };
                builder.push(i, j, ke[p][q])?;
            }
        }
        // advance element multi-index, x fastest
        for ax in 0..dim {
            e[ax] += 1;
            if e[ax] <= interior[ax] {
                break;
            }
            e[ax] = 0;
        }
    }
    Ok(builder.build())
}

/// Dense element stiffness for a box element with edge lengths `h`, using
/// tensor-product 2-point Gauss quadrature. Local dof `dim * a + c` is
/// component `c` of corner `a`, where bit `ax` of `a` selects the far face
/// along axis `ax`. Exactly symmetric.
fn element_stiffness(h: &[f64], nu: f64) -> Vec<Vec<f64>> {
    let dim = h.len();
    let young = 1.0;
    let lambda = young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = young / (2.0 * (1.0 + nu));
    let voigt: Vec<(usize, usize)> = if dim == 2 {
        vec![(0, 0), (1, 1), (0, 1)]
    } else {
        vec![(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)]
    };
    let nv = voigt.len();
    let mut dmat = vec![vec![0.0; nv]; nv];
    for (r, &(p, q)) in voigt.iter().enumerate() {
        if p == q {
            for (s, &(u, v)) in voigt.iter().enumerate() {
                if u == v {
                    dmat[r][s] = lambda + if r == s { 2.0 * mu } else { 0.0 };
                }
            }
        } else {
            dmat[r][r] = mu;
        }
    }

    let nn = 1usize << dim;
    let ndof = dim * nn;
    let g = 1.0 / 3f64.sqrt();
    let det_j: f64 = h.iter().map(|&hx| hx / 2.0).product();
    let mut ke = vec![vec![0.0; ndof]; ndof];
    for qp in 0..nn {
        let xi: Vec<f64> = (0..dim)
            .map(|ax| if (qp >> ax) & 1 == 1 { g } else { -g })
            .collect();
        // physical shape-function gradients
        let grad: Vec<Vec<f64>> = (0..nn)
            .map(|a| {
                let sgn: Vec<f64> = (0..dim)
                    .map(|ax| if (a >> ax) & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                (0..dim)
                    .map(|k| {
                        let mut d = sgn[k] / 2.0;
                        for m in 0..dim {
                            if m != k {
                                d *= (1.0 + sgn[m] * xi[m]) / 2.0;
                            }
                        }
                        d * 2.0 / h[k]
                    })
                    .collect()
            })
            .collect();
        let mut bmat = vec![vec![0.0; ndof]; nv];
        for (r, &(p, q)) in voigt.iter().enumerate() {
            for a in 0..nn {
                if p == q {
                    bmat[r][dim * a + p] = grad[a][p];
                } else {
                    bmat[r][dim * a + p] = grad[a][q];
                    bmat[r][dim * a + q] = grad[a][p];
                }
            }
        }
        let db: Vec<Vec<f64>> = (0..nv)
            .map(|r| {
                (0..ndof)
                    .map(|col| (0..nv).map(|s| dmat[r][s] * bmat[s][col]).sum())
                    .collect()
            })
            .collect();
        for i in 0..ndof {
            for j in i..ndof {
                let v: f64 = (0..nv).map(|r| bmat[r][i] * db[r][j]).sum();
                ke[i][j] += v * det_j;
            }
        }
    }
    for i in 0..ndof {
        for j in 0..i {
            ke[i][j] = ke[j][i];
        }
    }
    ke
}

/// Uniform(-1, 1) entries from a 64-bit linear congruential generator:
///
/// ```text
/// state <- state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
/// u      = (state >> 11) * 2^-53
/// b_i    = 2u - 1
/// ```
///
/// with `state` initialized to `seed` and advanced before each draw.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Lcg64(seed);
    (0..n).map(|_| 2.0 * rng.next_unit() - 1.0).collect()
}

/// Random sparse symmetric matrix with roughly `per_row` off-diagonal
/// entries per row drawn from uniform(-1, 1), and diagonal
/// `1 + sum_j |a_ij|`. Strict diagonal dominance makes it SPD.
pub fn random_spd(n: usize, per_row: usize, seed: u64) -> CsrMatrix<f64> {
    let mut rng = Lcg64(seed);
    let mut off = vec![0.0; n];
    let mut tb = TripletBuilder::with_capacity(n, n, n * (2 * per_row + 1));
    if n > 1 {
        for i in 0..n {
            for _ in 0..per_row {
                let j = (rng.next_u64() % n as u64) as usize;
                if j == i {
                    continue;
                }
                let v = 2.0 * rng.next_unit() - 1.0;
                tb.push(i, j, v).expect("in bounds");
                tb.push(j, i, v).expect("in bounds");
                off[i] += v.abs();
                off[j] += v.abs();
            }
        }
    }
    for (i, s) in off.iter().enumerate() {
        tb.push(i, i, 1.0 + s).expect("in bounds");
    }
    tb.build()
}

#[derive(Debug, Clone)]
pub struct Lcg64(pub u64);

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.0
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Laplace1d,
    Laplace2d,
    Laplace3d,
    Elasticity2d,
    Elasticity3d,
}

impl ProblemKind {
    pub fn dims(self) -> usize {
        match self {
            ProblemKind::Laplace1d => 1,
            ProblemKind::Laplace2d | ProblemKind::Elasticity2d => 2,
            ProblemKind::Laplace3d | ProblemKind::Elasticity3d => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ProblemKind::Laplace1d => "laplace1d",
            ProblemKind::Laplace2d => "laplace2d",
            ProblemKind::Laplace3d => "laplace3d",
            ProblemKind::Elasticity2d => "elasticity2d",
            ProblemKind::Elasticity3d => "elasticity3d",
        }
    }
}

/// A generated problem, written `kind:nx[,ny[,nz]]`; omitted counts repeat `nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Poisson ratio (elasticity only).
    pub nu: f64,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, nx: usize, ny: usize, nz: usize) -> Self {
        Self {
            kind,
            nx,
            ny,
            nz,
            nu: DEFAULT_POISSON_RATIO,
        }
    }

    pub fn with_poisson_ratio(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn build(&self) -> Result<CsrMatrix<f64>> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::Config("grid counts must be at least 1".into()));
        }
        Ok(match self.kind {
            ProblemKind::Laplace1d => laplace1d(self.nx),
            ProblemKind::Laplace2d => laplace2d(self.nx, self.ny),
            ProblemKind::Laplace3d => laplace3d(self.nx, self.ny, self.nz),
            ProblemKind::Elasticity2d => elasticity2d(self.nx, self.ny, self.nu)?,
            ProblemKind::Elasticity3d => elasticity3d(self.nx, self.ny, self.nz, self.nu)?,
        })
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, counts) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("problem `{s}` must look like kind:nx[,ny[,nz]]")))?;
        let kind = match kind {
            "laplace1d" => ProblemKind::Laplace1d,
            "laplace2d" => ProblemKind::Laplace2d,
            "laplace3d" => ProblemKind::Laplace3d,
            "elasticity2d" => ProblemKind::Elasticity2d,
            "elasticity3d" => ProblemKind::Elasticity3d,
            other => return Err(Error::Config(format!("unknown problem kind `{other}`"))),
        };
        let counts: Vec<usize> = counts
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad grid count `{c}` in `{s}`")))
            })
            .collect::<Result<_>>()?;
        if counts.is_empty() || counts.len() > kind.dims() {
            return Err(Error::Config(format!(
                "{} takes 1 to {} grid counts",
                kind.name(),
                kind.dims()
            )));
        }
        let nx = counts[0];
        let get = |k: usize| if kind.dims() > k { *counts.get(k).unwrap_or(&nx) } else { 1 };
        Ok(Self::new(kind, nx, get(1), get(2)))
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.dims() {
            1 => write!(f, "{}:{}", self.kind.name(), self.nx),
            2 => write!(f, "{}:{},{}", self.kind.name(), self.nx, self.ny),
            _ => write!(f, "{}:{},{},{}", self.kind.name(), self.nx, self.ny, self.nz),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace2d_small_cases() {
        assert_eq!(laplace2d(1, 1).to_dense(), vec![vec![4.0]]);
        let a = laplace2d(2, 2);
        assert_eq!(a.nrows(), 4);
        for i in 0..4 {
            let (cols, vals) = a.row(i);
            assert_eq!(a.get(i, i), Some(4.0));
            assert_eq!(vals.iter().filter(|&&v| v == -1.0).count(), 2);
            assert_eq!(cols.len(), 3);
        }
        assert!(a.is_symmetric());
    }

    #[test]
    fn laplace3d_small_cases() {
        assert_eq!(laplace3d(1, 1, 1).to_dense(), vec![vec![6.0]]);
        let a = laplace3d(2, 2, 2);
        assert_eq!(a.nrows(), 8);
        for i in 0..8 {
            let (_, vals) = a.row(i);
            assert_eq!(a.get(i, i), Some(6.0));
            assert_eq!(vals.iter().filter(|&&v| v == -1.0).count(), 3);
        }
        assert!(a.is_symmetric());
    }

    #[test]
    fn laplace1d_is_tridiagonal() {
        let a = laplace1d(4);
        assert_eq!(
            a.to_dense(),
            vec![
                vec![2.0, -1.0, 0.0, 0.0],
                vec![-1.0, 2.0, -1.0, 0.0],
                vec![0.0, -1.0, 2.0, -1.0],
                vec![0.0, 0.0, -1.0, 2.0],
            ]
        );
    }

    #[test]
    fn generated_matrices_pass_csr_validation() {
        let ms = [
            laplace1d(7),
            laplace2d(5, 3),
            laplace3d(3, 4, 2),
            elasticity2d(3, 2, 0.25).unwrap(),
            elasticity3d(2, 2, 3, 0.3).unwrap(),
        ];
        for m in ms {
            let again = CsrMatrix::new(
                m.nrows(),
                m.ncols(),
                m.row_ptr().to_vec(),
                m.col_idx().to_vec(),
                m.values().to_vec(),
            );
            assert!(again.is_ok());
            for i in 0..m.nrows() {
                assert!(m.get(i, i).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn elasticity_dimensions_and_symmetry() {
        let a = elasticity2d(4, 3, 0.25).unwrap();
        assert_eq!(a.nrows(), 2 * 4 * 3);
        assert!(a.is_symmetric());
        let a = elasticity3d(3, 2, 2, 0.25).unwrap();
        assert_eq!(a.nrows(), 3 * 3 * 2 * 2);
        assert!(a.is_symmetric());
    }

    #[test]
    fn elasticity_rejects_incompressible() {
        assert!(elasticity2d(2, 2, 0.5).is_err());
        assert!(elasticity3d(2, 2, 2, 0.7).is_err());
        assert!(elasticity2d(2, 2, -0.1).is_err());
    }

    #[test]
    fn element_stiffness_has_rigid_body_null_space() {
        // translations produce zero force on an unconstrained element
        for h in [vec![0.5, 0.25], vec![0.5, 0.25, 0.2]] {
            let dim = h.len();
            let ke = element_stiffness(&h, 0.3);
            for c in 0..dim {
                for row in &ke {
                    let f: f64 = row.iter().enumerate().filter(|(k, _)| k % dim == c).map(|(_, v)| v).sum();
                    assert!(f.abs() < 1e-12, "{f}");
                }
            }
        }
    }

    #[test]
    fn rhs_is_reproducible() {
        let a = random_rhs(100, 0);
        assert_eq!(a, random_rhs(100, 0));
        assert_ne!(a, random_rhs(100, 1));
        assert!(a.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn lcg_first_values_are_pinned() {
        let mut g = Lcg64(0);
        assert_eq!(g.next_u64(), 1442695040888963407);
        assert_eq!(
            g.next_u64(),
            1442695040888963407u64
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407)
        );
    }

    #[test]
    fn problem_spec_grammar() {
        let p: ProblemSpec = "laplace2d:50".parse().unwrap();
        assert_eq!((p.nx, p.ny, p.nz), (50, 50, 1));
        let p: ProblemSpec = "elasticity3d:4,5".parse().unwrap();
        assert_eq!((p.nx, p.ny, p.nz), (4, 5, 4));
        assert_eq!(p.to_string(), "elasticity3d:4,5,4");
        assert!("laplace2d:1,2,3".parse::<ProblemSpec>().is_err());
        assert!("poisson:3".parse::<ProblemSpec>().is_err());
        assert!("laplace2d".parse::<ProblemSpec>().is_err());
        assert!("laplace2d:x".parse::<ProblemSpec>().is_err());
        assert!("laplace2d:0".parse::<ProblemSpec>().unwrap().build().is_err());
    }
}
