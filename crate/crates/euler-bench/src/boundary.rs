//! Plot-ready decision-boundary grids for 2-D fits: every grid point in the
//! (normalized) data plane is mapped into angle space, assigned to its
//! nearest centroid, and scored against each pairwise decision surface.

use std::path::Path;

use euler_clustering::algos::{assign, CentroidKind, ClusteringResult};
use euler_clustering::dataset::RealDataset;
use euler_clustering::error::{Error, Result};
use euler_clustering::kernel::AngleMatrix;
use euler_clustering::matrix::Matrix;
use euler_clustering::metrics::{boundary_eulerk, boundary_rek, BoundaryCoefficients};

/// Axis-aligned bounds of the grid in the original (normalized) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl GridBounds {
    /// The bounding box of a 2-D dataset.
    pub fn of(data: &RealDataset) -> Result<Self> {
        if data.n_dims() != 2 {
            return Err(Error::Shape(format!(
                "boundary grids need 2-D data, got {} dimensions",
                data.n_dims()
            )));
        }
        let mut x1 = (f64::INFINITY, f64::NEG_INFINITY);
        let mut x2 = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..data.n_points() {
            let row = data.values().row(j);
            x1 = (x1.0.min(row[0]), x1.1.max(row[0]));
            x2 = (x2.0.min(row[1]), x2.1.max(row[1]));
        }
        Ok(Self { x1, x2 })
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub x1: f64,
    pub x2: f64,
    pub label: usize,
    /// Surface values in the order of [`BoundaryGrid::pairs`].
    pub surfaces: Vec<f64>,
}

/// A fully evaluated boundary grid, row-major with `x2` varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    pub resolution: usize,
    /// Centroid pairs `(p, q)` with `p < q`, one surface column each.
    pub pairs: Vec<(usize, usize)>,
    pub rows: Vec<BoundaryRow>,
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

/// Evaluates the decision surfaces of a mapped-space fit on a uniform
/// `resolution x resolution` grid. The fit must come from a mapped-space
/// algorithm on 2-D data; surfaces use the free-centroid form for eulerk
/// fits and the on-sphere form for rectified ones.
pub fn compute_boundary_grid(
    result: &ClusteringResult,
    bounds: &GridBounds,
    resolution: usize,
) -> Result<BoundaryGrid> {
    let alpha = result.alpha.ok_or_else(|| {
        Error::InvalidParameter("decision surfaces are defined in the mapped space".into())
    })?;
    let centroids = &result.centroids;
    if centroids.d() != 2 {
        return Err(Error::Shape(format!(
            "boundary grids need 2-D centroids, got {} dimensions",
            centroids.d()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter(
            "grid resolution must be at least 2 per axis".into(),
        ));
    }

    let k = centroids.k();
    let mut pairs = Vec::new();
    let mut surfaces: Vec<BoundaryCoefficients> = Vec::new();
    for p in 0..k {
        for q in (p + 1)..k {
            let surface = match centroids.kind() {
                CentroidKind::EulerFree => boundary_eulerk(centroids, p, q)?,
                CentroidKind::EulerUnit => boundary_rek(centroids, p, q)?,
                CentroidKind::Euclidean => {
                    return Err(Error::InvalidParameter(
                        "decision surfaces are defined in the mapped space".into(),
                    ))
                }
            };
            pairs.push((p, q));
            surfaces.push(surface);
        }
    }

    let xs1 = linspace(bounds.x1.0, bounds.x1.1, resolution);
    let xs2 = linspace(bounds.x2.0, bounds.x2.1, resolution);
    let scale = alpha * std::f64::consts::PI;
    let mut points = Vec::with_capacity(resolution * resolution);
    let mut thetas = Vec::with_capacity(2 * resolution * resolution);
    for &x2 in &xs2 {
        for &x1 in &xs1 {
            points.push((x1, x2));
            thetas.push(scale * x1);
            thetas.push(scale * x2);
        }
    }
    let theta = AngleMatrix::new(Matrix::from_vec(points.len(), 2, thetas)?, alpha)?;
    let labels = assign(&theta, centroids)?;

    let rows = points
        .iter()
        .enumerate()
        .map(|(j, &(x1, x2))| BoundaryRow {
            x1,
            x2,
            label: labels.labels()[j],
            surfaces: surfaces.iter().map(|s| s.evaluate_angles(theta.row(j))).collect(),
        })
        .collect();
    Ok(BoundaryGrid {
        resolution,
        pairs,
        rows,
    })
}

/// Writes a grid as CSV with columns `x1, x2, label, surface_p_q...`,
/// suitable for external contour plotting.
pub fn write_boundary_csv(grid: &BoundaryGrid, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{other:?}")),
    })?;
    let mut header = vec!["x1".to_string(), "x2".to_string(), "label".to_string()];
    header.extend(grid.pairs.iter().map(|(p, q)| format!("surface_{p}_{q}")));
    let write_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{other:?}")),
    };
    writer.write_record(&header).map_err(write_err)?;
    for row in &grid.rows {
        let mut record = vec![row.x1.to_string(), row.x2.to_string(), row.label.to_string()];
        record.extend(row.surfaces.iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(write_err)?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Computes and writes the boundary grid in one step, returning the
/// in-memory grid for inspection.
pub fn emit_boundary_grid(
    result: &ClusteringResult,
    bounds: &GridBounds,
    resolution: usize,
    path: &Path,
) -> Result<BoundaryGrid> {
    let grid = compute_boundary_grid(result, bounds, resolution)?;
    write_boundary_csv(&grid, path)?;
    Ok(grid)
}
