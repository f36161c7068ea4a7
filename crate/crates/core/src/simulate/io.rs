//! Trajectory files.
//!
//! CSV columns are `step,time,particle,x0,…` for a single system and
//! `step,time,system,particle,x0,…` for a coupled pair.
//!
//! The binary ledger is little-endian: the magic `MVC1`, `u32` row count,
//! `u32` dimension, `f64` step size, then one block per snapshot holding the
//! `f64` time followed by `rows × d` `f64` coordinates. A coupled pair stores
//! `2N` rows per block, the `X` system first.

use std::io::{Read, Write};

use super::ensemble::{Snapshot, Trajectory};
use crate::error::{Error, Result};

pub fn write_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["step".to_string(), "time".to_string()];
    if traj.systems > 1 {
        header.push("system".into());
    }
    header.push("particle".into());
    header.extend((0..traj.dim).map(|k| format!("x{k}")));
    out.write_record(&header)?;
    let d = traj.dim;
    for snap in &traj.snapshots {
        for (row, x) in snap.states.chunks_exact(d).enumerate() {
            let mut rec = vec![snap.step.to_string(), format!("{:.17e}", snap.time)];
            if traj.systems > 1 {
                rec.push((row / traj.n).to_string());
            }
            rec.push((row % traj.n).to_string());
            rec.extend(x.iter().map(|v| format!("{v:.17e}")));
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let rows = traj.n * traj.systems;
    let rows32 = u32::try_from(rows).map_err(|_| Error::InvalidInput("too many rows for the ledger".into()))?;
    let dim32 = u32::try_from(traj.dim).map_err(|_| Error::InvalidInput("dimension too large".into()))?;
    w.write_all(b"MVC1")?;
    w.write_all(&rows32.to_le_bytes())?;
    w.write_all(&dim32.to_le_bytes())?;
    w.write_all(&traj.h.to_le_bytes())?;
    for snap in &traj.snapshots {
        w.write_all(&snap.time.to_le_bytes())?;
        for v in &snap.states {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a binary ledger. Step indices are reconstructed as `round(t/h)`;
/// the result has `systems = 1` and `n` equal to the stored row count.
pub fn read_binary<R: Read>(mut r: R) -> Result<Trajectory> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 20 || &buf[..4] != b"MVC1" {
        return Err(Error::InvalidInput("not an MVC1 ledger".into()));
    }
    let rows = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
    let h = f64::from_le_bytes(buf[12..20].try_into().unwrap());
    let block = 8 * (1 + rows * dim);
    let body = &buf[20..];
    if body.len() % block != 0 {
        return Err(Error::InvalidInput(format!("ledger body of {} bytes is not a multiple of {block}", body.len())));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().unwrap());
    let snapshots = body
        .chunks_exact(block)
        .map(|blk| {
            let time = f(&blk[..8]);
            let states = blk[8..].chunks_exact(8).map(f).collect();
            Snapshot { step: (time / h).round() as u64, time, states }
        })
        .collect();
    Ok(Trajectory { n: rows, dim, systems: 1, h, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let traj = Trajectory {
            n: 2,
            dim: 1,
            systems: 1,
            h: 0.5,
            snapshots: vec![
                Snapshot { step: 0, time: 0.0, states: vec![1.0, -2.0] },
                Snapshot { step: 1, time: 0.5, states: vec![0.25, 3.5] },
            ],
        };
        let mut bytes = Vec::new();
        write_binary(&traj, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 20 + 2 * 8 * 3);
        assert_eq!(read_binary(bytes.as_slice()).unwrap(), traj);
    }

    #[test]
    fn csv_has_expected_columns() {
        let traj = Trajectory {
            n: 1,
            dim: 2,
            systems: 2,
            h: 0.1,
            snapshots: vec![Snapshot { step: 0, time: 0.0, states: vec![1.0, 2.0, 3.0, 4.0] }],
        };
        let mut out = Vec::new();
        write_csv(&traj, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,time,system,particle,x0,x1");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("0,0.00000000000000000e0,1,0,"));
    }
}
