use super::GridSpec;
use crate::report::SCHEMA;
use crate::{Error, Result, C64};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Triangulated surface over a grid in the domain chart.
#[derive(Clone, Debug, Default)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Unit normals from the Gauss map.
    pub gauss: Vec<[f64; 3]>,
    pub domain_uv: Vec<C64>,
    /// (i, j) grid position of each vertex.
    pub grid_index: Vec<(usize, usize)>,
    pub grid: Option<GridSpec>,
    /// Largest |Re ∮ω| over grid cells free of ends.
    pub closure_max: f64,
    /// max |X| over the vertices.
    pub scale: f64,
}

impl SurfaceMesh {
    /// X at grid position (i, j), if that vertex is in the mesh.
    pub fn at(&self, i: usize, j: usize) -> Option<[f64; 3]> {
        self.grid_index.iter().position(|&g| g == (i, j)).map(|k| self.vertices[k])
    }

    /// max ‖ΔₕX‖ over interior vertices with all four neighbours present, for
    /// grids with orthogonal edges of equal length (five-point stencil).
    pub fn laplacian_max(&self) -> Option<f64> {
        let g = self.grid?;
        if (g.e1.norm() - g.e2.norm()).abs() > 1e-12 * g.e1.norm()
            || (g.e1.conj() * g.e2).re.abs() > 1e-12 * g.e1.norm_sqr()
        {
            return None;
        }
        let h = g.e1.norm() / g.n as f64;
        let side = g.n + 1;
        let mut lookup = vec![usize::MAX; side * side];
        for (k, &(i, j)) in self.grid_index.iter().enumerate() {
            lookup[j * side + i] = k;
        }
        let get = |i: usize, j: usize| {
            let k = lookup[j * side + i];
            (k != usize::MAX).then(|| self.vertices[k])
        };
        let mut worst: f64 = 0.0;
        for j in 1..g.n {
            for i in 1..g.n {
                let (Some(c), Some(l), Some(r), Some(d), Some(u)) =
                    (get(i, j), get(i - 1, j), get(i + 1, j), get(i, j - 1), get(i, j + 1))
                else {
                    continue;
                };
                let lap: f64 = (0..3).map(|k| ((l[k] + r[k] + d[k] + u[k] - 4.0 * c[k]) / (h * h)).powi(2)).sum();
                worst = worst.max(lap.sqrt());
            }
        }
        Some(worst)
    }
}

/// Parsed OBJ contents.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjData {
    pub vertices: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

/// Writes "v", "vn" and "f v//n" lines (1-based, 17 significant digits).
pub fn export_obj(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    if mesh.vertices.is_empty() || mesh.faces.is_empty() {
        return Err(Error::InvalidInput("refusing to write an empty mesh".into()));
    }
    let mut s = String::with_capacity(mesh.vertices.len() * 80);
    s.push_str("# spinor-minimal surface mesh\n");
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
    }
    for n in &mesh.gauss {
        let _ = writeln!(s, "vn {:.16e} {:.16e} {:.16e}", n[0], n[1], n[2]);
    }
    let with_normals = mesh.gauss.len() == mesh.vertices.len();
    for f in &mesh.faces {
        let (a, b, c) = (f[0] + 1, f[1] + 1, f[2] + 1);
        if with_normals {
            let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(s, "f {a} {b} {c}");
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn parse_obj(path: &Path) -> Result<ObjData> {
    let text = std::fs::read_to_string(path)?;
    let mut out = ObjData::default();
    let bad = |line: &str| Error::InvalidInput(format!("malformed OBJ line: {line}"));
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some(tag @ ("v" | "vn")) => {
                let xs: Vec<f64> =
                    it.map(|t| t.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad(line))?;
                if xs.len() != 3 {
                    return Err(bad(line));
                }
                let p = [xs[0], xs[1], xs[2]];
                if tag == "v" {
                    out.vertices.push(p);
                } else {
                    out.normals.push(p);
                }
            }
            Some("f") => {
                let ids: Vec<usize> = it
                    .map(|t| t.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(line))?;
                if ids.len() != 3 || ids.iter().any(|&i| i == 0 || i > out.vertices.len()) {
                    return Err(bad(line));
                }
                out.faces.push([ids[0] - 1, ids[1] - 1, ids[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// CSV of (u_re, u_im, x, y, z, nx, ny, nz) per vertex.
pub fn write_csv(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let mut s = String::from("u_re,u_im,x,y,z,nx,ny,nz\n");
    for (k, v) in mesh.vertices.iter().enumerate() {
        let u = mesh.domain_uv[k];
        let n = mesh.gauss.get(k).copied().unwrap_or([0.0; 3]);
        let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}", u.re, u.im, v[0], v[1], v[2], n[0], n[1], n[2]);
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Sidecar JSON for a mesh.
#[derive(Clone, Debug, Serialize)]
pub struct MeshMetadata {
    pub schema: &'static str,
    pub construction: String,
    pub grid_n: usize,
    pub end_clearance: f64,
    pub vertices: usize,
    pub faces: usize,
    pub closure_max: f64,
    pub scale: f64,
    /// Largest |Re ∮ω| around the ends.
    pub end_period_max: f64,
    pub branch_points: usize,
}

impl MeshMetadata {
    pub fn new(
        construction: &str,
        mesh: &SurfaceMesh,
        end_clearance: f64,
        end_period_max: f64,
        branch_points: usize,
    ) -> Self {
        MeshMetadata {
            schema: SCHEMA,
            construction: construction.to_string(),
            grid_n: mesh.grid.map_or(0, |g| g.n),
            end_clearance,
            vertices: mesh.vertices.len(),
            faces: mesh.faces.len(),
            closure_max: mesh.closure_max,
            scale: mesh.scale,
            end_period_max,
            branch_points,
        }
    }
}

pub fn write_metadata(meta: &MeshMetadata, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::InvalidInput(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
