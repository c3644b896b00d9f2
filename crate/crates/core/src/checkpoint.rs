//! Versioned JSON checkpoints of solver states.
//!
//! ```text
//! {
//!   "format": "swbench-checkpoint",
//!   "version": 1,
//!   "grid": { "dim": 2, "n": 64, "periods": [6.283185307179586, 6.283185307179586] },
//!   "states": [
//!     { "time": 0.0,
//!       "q":     { "mean_zero": false, "components": [[[re, im], ...]] },
//!       "u":     { ... }, "u_l": { ... }, "u_bar": { ... } }
//!   ]
//! }
//! ```
//!
//! Coefficients are in the storage order of [`SpectralField`]; floats are
//! written with shortest round-trip formatting, so reading a checkpoint
//! reproduces every state bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friedrichs::SolverState;
use crate::spectral::{PeriodicGrid, SpectralField};

pub const FORMAT: &str = "swbench-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GridMeta {
    dim: usize,
    n: usize,
    periods: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FieldDump {
    mean_zero: bool,
    components: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct StateDump {
    time: f64,
    q: FieldDump,
    u: FieldDump,
    u_l: FieldDump,
    u_bar: FieldDump,
}

#[derive(Serialize, Deserialize)]
struct Dump {
    format: String,
    version: u32,
    grid: GridMeta,
    states: Vec<StateDump>,
}

fn dump_field(f: &SpectralField) -> FieldDump {
    FieldDump {
        mean_zero: f.is_mean_zero(),
        components: f
            .components()
            .iter()
            .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    }
}

fn load_field(grid: PeriodicGrid, d: FieldDump, ncomp: usize, name: &str) -> Result<SpectralField> {
    if d.components.len() != ncomp {
        return Err(Error::Format(format!(
            "field {name} has {} components, expected {ncomp}",
            d.components.len()
        )));
    }
    let comps: Vec<Vec<Complex64>> = d
        .components
        .into_iter()
        .map(|c| c.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        .collect();
    if comps.iter().any(|c| c.len() != grid.len()) {
        return Err(Error::Format(format!("field {name} does not match the grid size")));
    }
    let mut f = SpectralField::from_components(grid, comps)?;
    f.flag_mean_zero(d.mean_zero);
    Ok(f)
}

pub fn to_writer<W: Write>(w: W, states: &[SolverState]) -> Result<()> {
    let grid = match states.first() {
        Some(s) => *s.grid(),
        None => return Err(Error::usage("a checkpoint needs at least one state")),
    };
    if states.iter().any(|s| s.grid() != &grid) {
        return Err(Error::usage("checkpointed states live on different grids"));
    }
    let dump = Dump {
        format: FORMAT.into(),
        version: VERSION,
        grid: GridMeta {
            dim: grid.dim(),
            n: grid.n(),
            periods: grid.periods().to_vec(),
        },
        states: states
            .iter()
            .map(|s| StateDump {
                time: s.time,
                q: dump_field(&s.q),
                u: dump_field(&s.u),
                u_l: dump_field(&s.u_l),
                u_bar: dump_field(&s.u_bar),
            })
            .collect(),
    };
    serde_json::to_writer(w, &dump)?;
    Ok(())
}

pub fn from_reader<R: std::io::Read>(r: R) -> Result<Vec<SolverState>> {
    let dump: Dump = serde_json::from_reader(r)?;
    if dump.format != FORMAT {
        return Err(Error::Format(format!("unknown checkpoint format {:?}", dump.format)));
    }
    if dump.version != VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {}",
            dump.version
        )));
    }
    let grid = PeriodicGrid::with_periods(dump.grid.dim, dump.grid.n, &dump.grid.periods)?;
    let d = grid.dim();
    dump.states
        .into_iter()
        .map(|s| {
            Ok(SolverState {
                time: s.time,
                q: load_field(grid, s.q, 1, "q")?,
                u: load_field(grid, s.u, d, "u")?,
                u_l: load_field(grid, s.u_l, d, "u_l")?,
                u_bar: load_field(grid, s.u_bar, d, "u_bar")?,
            })
        })
        .collect()
}

pub fn write_checkpoint(path: &Path, states: &[SolverState]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    to_writer(&mut w, states)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Vec<SolverState>> {
    from_reader(BufReader::new(File::open(path)?))
}
