//! CSV exchange format.
//!
//! Kernel files: a first record `N,kind,alpha` (alpha empty for explicit
//! kernels) followed by `N` rows of `N` entries, row-major.
//!
//! Grid files: a first record `N,kind,n,orbit_size` followed by one row per
//! node holding the real and imaginary parts of every complex coordinate, then
//! `t` for cylinder nodes, then the weight. Discrete grids store the weight only.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::grid::{GridKind, Nodes, QuadratureGrid};
use super::kernel::KernelMatrix;
use crate::error::{Error, Result};
use crate::heisenberg::HPoint;
use crate::sphere::SpherePoint;

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(true).from_writer(w)
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse '{field}' as a number")))
}

fn parse_usize(field: &str, what: &str) -> Result<usize> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse '{field}' as a count")))
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_kernel_csv(path: &Path, kernel: &KernelMatrix) -> Result<()> {
    let mut w = writer(File::create(path)?);
    let alpha = kernel.params.map(|p| fmt(p.alpha)).unwrap_or_default();
    w.write_record([
        kernel.dim().to_string(),
        kernel.spec.name().to_string(),
        alpha,
    ])?;
    for i in 0..kernel.dim() {
        w.write_record(kernel.row(i).iter().map(|&v| fmt(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a kernel file as an explicit kernel; the header kind and alpha are returned alongside.
pub fn read_kernel_csv(path: &Path) -> Result<(KernelMatrix, String, Option<f64>)> {
    let mut rd = reader(File::open(path)?);
    let mut records = rd.records();
    let head = records
        .next()
        .ok_or_else(|| Error::Parse("kernel file is empty".into()))??;
    let n = parse_usize(head.get(0).unwrap_or(""), "kernel header N")?;
    let kind = head.get(1).unwrap_or("explicit").to_string();
    let alpha = match head.get(2) {
        Some(s) if !s.is_empty() => Some(parse_f64(s, "kernel header alpha")?),
        _ => None,
    };
    let mut entries = Vec::with_capacity(n * n);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != n {
            return Err(Error::Parse(format!(
                "kernel row {i} has {} entries, expected {n}",
                rec.len()
            )));
        }
        for field in rec.iter() {
            entries.push(parse_f64(field, &format!("kernel row {i}"))?);
        }
    }
    if entries.len() != n * n {
        return Err(Error::Parse(format!(
            "kernel file has {} rows, expected {n}",
            entries.len() / n.max(1)
        )));
    }
    Ok((KernelMatrix::from_entries(n, entries)?, kind, alpha))
}

pub fn write_grid_csv(path: &Path, grid: &QuadratureGrid) -> Result<()> {
    let mut w = writer(File::create(path)?);
    w.write_record([
        grid.len().to_string(),
        grid.kind.as_str().to_string(),
        grid.n.to_string(),
        grid.orbit_size.to_string(),
    ])?;
    for (i, &wt) in grid.weights.iter().enumerate() {
        let mut row: Vec<String> = Vec::new();
        let push_z = |row: &mut Vec<String>, z: &[Complex64]| {
            for c in z {
                row.push(fmt(c.re));
                row.push(fmt(c.im));
            }
        };
        match &grid.nodes {
            Nodes::Sphere(v) => push_z(&mut row, v[i].coords()),
            Nodes::Cylinder(v) => {
                push_z(&mut row, &v[i].z);
                row.push(fmt(v[i].t));
            }
            Nodes::Discrete(_) => {}
        }
        row.push(fmt(wt));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid_csv(path: &Path) -> Result<QuadratureGrid> {
    let mut rd = reader(File::open(path)?);
    let mut records = rd.records();
    let head = records
        .next()
        .ok_or_else(|| Error::Parse("grid file is empty".into()))??;
    let len = parse_usize(head.get(0).unwrap_or(""), "grid header N")?;
    let kind = match head.get(1).unwrap_or("") {
        "sphere" => GridKind::Sphere,
        "cylinder" => GridKind::Cylinder,
        "discrete" => GridKind::Discrete,
        other => return Err(Error::Parse(format!("unknown grid kind '{other}'"))),
    };
    let n = parse_usize(head.get(2).unwrap_or("0"), "grid header n")?;
    let orbit_size = parse_usize(head.get(3).unwrap_or("1"), "grid header orbit_size")?.max(1);
    let width = match kind {
        GridKind::Sphere => 2 * (n + 1) + 1,
        GridKind::Cylinder => 2 * n + 2,
        GridKind::Discrete => 1,
    };
    let mut weights = Vec::with_capacity(len);
    let mut spheres = Vec::new();
    let mut points = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!(
                "grid row {i} has {} fields, expected {width}",
                rec.len()
            )));
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| parse_f64(s, &format!("grid row {i}")))
            .collect::<Result<_>>()?;
        let z = |m: usize| -> Vec<Complex64> {
            (0..m)
                .map(|k| Complex64::new(vals[2 * k], vals[2 * k + 1]))
                .collect()
        };
        match kind {
            GridKind::Sphere => spheres.push(SpherePoint::new(z(n + 1))?),
            GridKind::Cylinder => points.push(HPoint::new(z(n), vals[2 * n])?),
            GridKind::Discrete => {}
        }
        weights.push(vals[width - 1]);
    }
    if weights.len() != len {
        return Err(Error::Parse(format!(
            "grid file has {} nodes, header says {len}",
            weights.len()
        )));
    }
    if len % orbit_size != 0 {
        return Err(Error::Parse(format!(
            "orbit size {orbit_size} does not divide N = {len}"
        )));
    }
    let mut grid = QuadratureGrid::discrete(weights)?;
    grid.kind = kind;
    grid.n = n;
    grid.orbit_size = orbit_size;
    grid.nodes = match kind {
        GridKind::Sphere => Nodes::Sphere(spheres),
        GridKind::Cylinder => Nodes::Cylinder(points),
        GridKind::Discrete => Nodes::Discrete(len),
    };
    Ok(grid)
}

/// Reads positive weights, one per record (first field of each line).
pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let mut rd = reader(File::open(path)?);
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("");
        if field.is_empty() {
            continue;
        }
        out.push(parse_f64(field, &format!("weights line {i}"))?);
    }
    QuadratureGrid::discrete(out.clone())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{
        assemble_kernel, cylinder_grid, sphere_grid, CylinderResolution, KernelSpec,
        SphereResolution,
    };
    use crate::numerics::Params;

    #[test]
    fn kernel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = sphere_grid(SphereResolution::cubic(4)).unwrap();
        let k =
            assemble_kernel(&g, &KernelSpec::PureSingular, &Params::new(1, 2.0).unwrap()).unwrap();
        let path = dir.path().join("k.csv");
        write_kernel_csv(&path, &k).unwrap();
        let (back, kind, alpha) = read_kernel_csv(&path).unwrap();
        assert_eq!(kind, "pure_singular");
        assert_eq!(alpha, Some(2.0));
        assert_eq!(back.entries(), k.entries());
    }

    #[test]
    fn grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for g in [
            sphere_grid(SphereResolution::cubic(4)).unwrap(),
            cylinder_grid(2, 1.0, CylinderResolution::uniform(2, 4, 2)).unwrap(),
            QuadratureGrid::discrete(vec![0.5, 2.0]).unwrap(),
        ] {
            let path = dir.path().join("g.csv");
            write_grid_csv(&path, &g).unwrap();
            let back = read_grid_csv(&path).unwrap();
            assert_eq!(back.weights, g.weights);
            assert_eq!(back.kind, g.kind);
            assert_eq!(back.orbit_size, g.orbit_size);
            assert_eq!(back.nodes.len(), g.nodes.len());
        }
    }

    #[test]
    fn malformed_kernel_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "2,explicit,\n0,1\n1\n").unwrap();
        assert!(read_kernel_csv(&path).is_err());
        std::fs::write(&path, "2,explicit,\n0,x\n1,0\n").unwrap();
        assert!(matches!(read_kernel_csv(&path), Err(Error::Parse(_))));
    }
}
