//! Particle snapshots as CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};

pub const SNAPSHOT_HEADER: [&str; 9] = ["id", "w", "x", "y", "z", "vx", "vy", "vz", "f_init"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    id: usize,
    w: f64,
    x: f64,
    y: f64,
    z: f64,
    vx: f64,
    vy: f64,
    vz: f64,
    f_init: f64,
}

pub fn write_snapshot_to<W: Write>(out: W, ens: &ParticleEnsemble) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for i in 0..ens.len() {
        let (x, v) = (ens.pos[i], ens.vel[i]);
        wtr.serialize(Row {
            id: i,
            w: ens.weight[i],
            x: x.x,
            y: x.y,
            z: x.z,
            vx: v.x,
            vy: v.y,
            vz: v.z,
            f_init: ens.f_init[i],
        })?;
    }
    if ens.is_empty() {
        wtr.write_record(SNAPSHOT_HEADER)?;
    }
    wtr.flush().map_err(|e| Error::io("<snapshot>", e))?;
    Ok(())
}

pub fn write_snapshot(path: &Path, ens: &ParticleEnsemble) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot_to(std::io::BufWriter::new(file), ens)
}

/// Reads a snapshot; time, softening and seed are not stored and come back
/// as zero.
pub fn read_snapshot_from<R: Read>(input: R) -> Result<ParticleEnsemble> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != SNAPSHOT_HEADER {
        return Err(Error::Config(format!("snapshot header must be `{}`, got `{}`", SNAPSHOT_HEADER.join(","), header.join(","))));
    }
    let mut ens = ParticleEnsemble::empty();
    for (line, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        if row.id != line {
            return Err(Error::Config(format!("snapshot ids must be 0..N in order; row {line} has id {}", row.id)));
        }
        ens.pos.push(Vec3::new(row.x, row.y, row.z));
        ens.vel.push(Vec3::new(row.vx, row.vy, row.vz));
        ens.weight.push(row.w);
        ens.f_init.push(row.f_init);
    }
    ens.validate()?;
    ens.provenance = "snapshot".into();
    Ok(ens)
}

pub fn read_snapshot(path: &Path) -> Result<ParticleEnsemble> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot_from(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let ens = ParticleEnsemble {
            pos: vec![Vec3::new(0.1, -1e-300, 3.0), Vec3::new(1.0 / 3.0, 2.0, -7.5)],
            vel: vec![Vec3::new(0.0, 0.2, -0.3), Vec3::new(1e10, -1e-10, 0.7)],
            weight: vec![0.5, 0.5],
            f_init: vec![0.123456789012345678, 2.0],
            ..ParticleEnsemble::empty()
        };
        let mut buf = Vec::new();
        write_snapshot_to(&mut buf, &ens).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,w,x,y,z,vx,vy,vz,f_init\n"));
        let back = read_snapshot_from(&buf[..]).unwrap();
        assert_eq!(back.pos, ens.pos);
        assert_eq!(back.vel, ens.vel);
        assert_eq!(back.weight, ens.weight);
        assert_eq!(back.f_init, ens.f_init);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_snapshot_from("a,b\n1,2\n".as_bytes()).is_err());
    }
}
