//! Field file formats: the `VWF1` flat binary layout and CSV surface spectra.
//!
//! Binary layout: a 64-byte header
//!
//! ```text
//! [ 0.. 4]  magic "VWF1"
//! [ 4.. 8]  u32 LE  horizontal dimension d
//! [ 8..12]  u32 LE  points per axis
//! [12..16]  u32 LE  vertical node count (1 for surface spectra)
//! [16..24]  f64 LE  horizontal period L
//! [24..32]  f64 LE  depth b
//! [32..36]  u32 LE  component count
//! [36..64]  zero padding
//! ```
//!
//! followed by little-endian `(re, im)` pairs of `f64`, component-major, then
//! mode-major, then node. Vertical values sit on the Gauss-Legendre node set
//! of the stated order on `[0, b]`.

use crate::error::{Error, Result};
use crate::field::{SurfaceField, VolumeField};
use crate::grid::HorizontalGrid;
use crate::quadrature::VerticalNodes;
use crate::scalar::{Scalar, C};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"VWF1";
const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub d: u32,
    pub npts: u32,
    pub node_count: u32,
    pub length: f64,
    pub b: f64,
    pub components: u32,
}

fn encode_header(h: &FieldHeader) -> [u8; HEADER_LEN] {
    let mut buf = [0u8; HEADER_LEN];
    buf[0..4].copy_from_slice(MAGIC);
    buf[4..8].copy_from_slice(&h.d.to_le_bytes());
    buf[8..12].copy_from_slice(&h.npts.to_le_bytes());
    buf[12..16].copy_from_slice(&h.node_count.to_le_bytes());
    buf[16..24].copy_from_slice(&h.length.to_le_bytes());
    buf[24..32].copy_from_slice(&h.b.to_le_bytes());
    buf[32..36].copy_from_slice(&h.components.to_le_bytes());
    buf
}

fn decode_header(buf: &[u8; HEADER_LEN]) -> Result<FieldHeader> {
    if &buf[0..4] != MAGIC {
        return Err(Error::BadFieldFile("missing VWF1 magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    Ok(FieldHeader {
        d: u32_at(4),
        npts: u32_at(8),
        node_count: u32_at(12),
        length: f64_at(16),
        b: f64_at(24),
        components: u32_at(32),
    })
}

/// Write a multi-component volume field.
pub fn write_volume_fields<T: Scalar>(path: &Path, fields: &[VolumeField<T>]) -> Result<()> {
    assert!(!fields.is_empty());
    let grid = &fields[0].grid;
    let nodes = &fields[0].nodes;
    let header = FieldHeader {
        d: grid.d as u32,
        npts: grid.npts as u32,
        node_count: nodes.len() as u32,
        length: grid.length.to_f64().unwrap(),
        b: nodes.b.to_f64().unwrap(),
        components: fields.len() as u32,
    };
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_header(&header))?;
    for field in fields {
        for mode in 0..grid.num_modes() {
            for node in 0..nodes.len() {
                let v = field.data[[mode, node]];
                w.write_all(&v.re.to_f64().unwrap().to_le_bytes())?;
                w.write_all(&v.im.to_f64().unwrap().to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a multi-component volume field; grid and node set are rebuilt from
/// the header.
pub fn read_volume_fields<T: Scalar>(path: &Path) -> Result<Vec<VolumeField<T>>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut hbuf = [0u8; HEADER_LEN];
    r.read_exact(&mut hbuf)?;
    let header = decode_header(&hbuf)?;
    if header.node_count < 2 {
        return Err(Error::BadFieldFile("volume file with fewer than 2 nodes".into()));
    }
    let grid = HorizontalGrid::<T>::new(header.d as usize, header.npts as usize, T::of(header.length))?;
    let nodes = VerticalNodes::<T>::new(header.node_count as usize, T::of(header.b));
    let mut out = Vec::with_capacity(header.components as usize);
    let mut buf = [0u8; 16];
    for _ in 0..header.components {
        let mut field = VolumeField::zeros(&grid, &nodes);
        for mode in 0..grid.num_modes() {
            for node in 0..nodes.len() {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
                field.data[[mode, node]] = C::<T>::new(T::of(re), T::of(im));
            }
        }
        out.push(field);
    }
    Ok(out)
}

/// Write surface spectra (node count 1, the depth recorded for context).
pub fn write_surface_fields<T: Scalar>(path: &Path, fields: &[SurfaceField<T>], b: T) -> Result<()> {
    assert!(!fields.is_empty());
    let grid = &fields[0].grid;
    let header = FieldHeader {
        d: grid.d as u32,
        npts: grid.npts as u32,
        node_count: 1,
        length: grid.length.to_f64().unwrap(),
        b: b.to_f64().unwrap(),
        components: fields.len() as u32,
    };
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_header(&header))?;
    for field in fields {
        for c in &field.coeffs {
            w.write_all(&c.re.to_f64().unwrap().to_le_bytes())?;
            w.write_all(&c.im.to_f64().unwrap().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_surface_fields<T: Scalar>(path: &Path) -> Result<(Vec<SurfaceField<T>>, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut hbuf = [0u8; HEADER_LEN];
    r.read_exact(&mut hbuf)?;
    let header = decode_header(&hbuf)?;
    if header.node_count != 1 {
        return Err(Error::BadFieldFile(format!(
            "expected surface file (1 node), found {}",
            header.node_count
        )));
    }
    let grid = HorizontalGrid::<T>::new(header.d as usize, header.npts as usize, T::of(header.length))?;
    let mut out = Vec::with_capacity(header.components as usize);
    let mut buf = [0u8; 16];
    for _ in 0..header.components {
        let mut field = SurfaceField::zeros(&grid);
        for mode in 0..grid.num_modes() {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            field.coeffs[mode] = C::<T>::new(T::of(re), T::of(im));
        }
        out.push(field);
    }
    Ok((out, header.b))
}

/// CSV export of a surface spectrum: `k1[,k2],re,im` per mode.
pub fn write_surface_csv<T: Scalar>(path: &Path, field: &SurfaceField<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if field.grid.d == 1 {
        writeln!(w, "k,re,im")?;
    } else {
        writeln!(w, "k1,k2,re,im")?;
    }
    for mode in 0..field.grid.num_modes() {
        let k = field.grid.mode_k(mode);
        let c = field.coeffs[mode];
        if field.grid.d == 1 {
            writeln!(w, "{},{:e},{:e}", k[0], c.re.to_f64().unwrap(), c.im.to_f64().unwrap())?;
        } else {
            writeln!(
                w,
                "{},{},{:e},{:e}",
                k[0],
                k[1],
                c.re.to_f64().unwrap(),
                c.im.to_f64().unwrap()
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parse a surface-spectrum CSV written by [`write_surface_csv`].
pub fn read_surface_csv<T: Scalar>(path: &Path, grid: &HorizontalGrid<T>) -> Result<SurfaceField<T>> {
    let contents = std::fs::read_to_string(path)?;
    let mut field = SurfaceField::zeros(grid);
    for (lineno, line) in contents.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let expect = if grid.d == 1 { 3 } else { 4 };
        if parts.len() != expect {
            return Err(Error::BadFieldFile(format!("csv line {lineno}: wrong column count")));
        }
        let parse_int = |s: &str| {
            s.trim().parse::<i64>().map_err(|_| Error::BadFieldFile(format!("csv line {lineno}: bad index")))
        };
        let parse_f = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::BadFieldFile(format!("csv line {lineno}: bad value")))
        };
        let (k, re, im) = if grid.d == 1 {
            ([parse_int(parts[0])?, 0], parse_f(parts[1])?, parse_f(parts[2])?)
        } else {
            ([parse_int(parts[0])?, parse_int(parts[1])?], parse_f(parts[2])?, parse_f(parts[3])?)
        };
        field.coeffs[grid.index_of(k)] = C::<T>::new(T::of(re), T::of(im));
    }
    Ok(field)
}
