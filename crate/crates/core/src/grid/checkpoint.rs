//! Binary checkpoints for [`GridField`].
//!
//! One ASCII header line followed by the values as little-endian `f64`, time
//! slice by time slice, last spatial axis fastest:
//!
//! ```text
//! HJDG1 n=1 cells=64 h=0.03125 dt=0.001 t0=0 t1=0.25
//! ```
//!
//! Grids whose origin is not the centered default append ` origin=<o1,...>`.

use std::io::{BufRead, Write};

use super::{GridError, GridField, SpaceTimeGrid, SpatialGrid};

pub const CHECKPOINT_MAGIC: &str = "HJDG1";

pub fn write_checkpoint<W: Write>(field: &GridField, mut out: W) -> Result<(), GridError> {
    let grid = field.grid();
    let space = grid.space();
    let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
    let mut header = format!(
        "{CHECKPOINT_MAGIC} n={} cells={} h={} dt={} t0={} t1={}",
        space.dim(),
        join(&mut space.cells().iter().map(|c| c.to_string())),
        space.h(),
        grid.dt(),
        grid.t_start(),
        grid.t_end(),
    );
    if !space.is_centered() {
        header.push_str(" origin=");
        header.push_str(&join(&mut space.origin().iter().map(|o| o.to_string())));
    }
    header.push('\n');
    out.write_all(header.as_bytes())?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(mut input: R) -> Result<GridField, GridError> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let line = line.trim_end_matches(['\n', '\r']);
    let mut tokens = line.split(' ');
    if tokens.next() != Some(CHECKPOINT_MAGIC) {
        return Err(GridError::Checkpoint("missing HJDG1 magic".into()));
    }

    let mut n = None;
    let mut cells = None;
    let mut h = None;
    let mut dt = None;
    let mut t0 = None;
    let mut t1 = None;
    let mut origin = None;
    for tok in tokens.filter(|t| !t.is_empty()) {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| GridError::Checkpoint(format!("bad header token {tok:?}")))?;
        match key {
            "n" => n = Some(parse::<usize>(key, val)?),
            "cells" => cells = Some(parse_list::<usize>(key, val)?),
            "h" => h = Some(parse::<f64>(key, val)?),
            "dt" => dt = Some(parse::<f64>(key, val)?),
            "t0" => t0 = Some(parse::<f64>(key, val)?),
            "t1" => t1 = Some(parse::<f64>(key, val)?),
            "origin" => origin = Some(parse_list::<f64>(key, val)?),
            _ => return Err(GridError::Checkpoint(format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| GridError::Checkpoint(format!("header lacks {k}"));
    let n = n.ok_or_else(|| missing("n"))?;
    let cells = cells.ok_or_else(|| missing("cells"))?;
    let h = h.ok_or_else(|| missing("h"))?;
    if cells.len() != n {
        return Err(GridError::Checkpoint(format!(
            "n={n} but {} cell counts given",
            cells.len()
        )));
    }
    let space = match origin {
        Some(o) => SpatialGrid::new(cells, h, o)?,
        None => SpatialGrid::centered(cells, h)?,
    };
    let grid = SpaceTimeGrid::new(
        space,
        dt.ok_or_else(|| missing("dt"))?,
        t0.ok_or_else(|| missing("t0"))?,
        t1.ok_or_else(|| missing("t1"))?,
    )?;

    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(GridError::Checkpoint(format!(
            "expected {} payload bytes, found {}",
            grid.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridField::new(grid, values)
}

fn parse<T: std::str::FromStr>(key: &str, val: &str) -> Result<T, GridError> {
    val.parse()
        .map_err(|_| GridError::Checkpoint(format!("cannot parse {key}={val}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, val: &str) -> Result<Vec<T>, GridError> {
    val.split(',').map(|v| parse(key, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_centered_and_shifted() {
        let space = SpatialGrid::centered(vec![5, 4], 0.1).unwrap();
        let grid = SpaceTimeGrid::new(space, 0.01, 0.0, 0.03).unwrap();
        let u = GridField::from_fn(grid, |t, x| t + x[0] * 3.0 - x[1] / 7.0).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&u, &mut buf).unwrap();
        let header_end = buf.iter().position(|&b| b == b'\n').unwrap();
        let header = std::str::from_utf8(&buf[..header_end]).unwrap();
        assert_eq!(header, "HJDG1 n=2 cells=5,4 h=0.1 dt=0.01 t0=0 t1=0.03");
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back, u);

        let shifted = u.translated(0.03, &[0.25, -0.5]);
        let mut buf = Vec::new();
        write_checkpoint(&shifted, &mut buf).unwrap();
        assert_eq!(read_checkpoint(&buf[..]).unwrap(), shifted);
    }

    #[test]
    fn rejects_truncated_payload() {
        let space = SpatialGrid::centered(vec![4], 1.0).unwrap();
        let grid = SpaceTimeGrid::new(space, 1.0, 0.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&GridField::constant(grid, 1.0), &mut buf).unwrap();
        buf.pop();
        assert!(matches!(read_checkpoint(&buf[..]), Err(GridError::Checkpoint(_))));
        assert!(read_checkpoint(&b"HJDG2 n=1\n"[..]).is_err());
    }
}
