//! Output artifacts of a run: the diagnostics CSV, the binary state
//! snapshot, and the manifest.
//!
//! CSV floats use Rust's shortest round-trip formatting, so identical runs
//! produce byte-identical files. The snapshot stores physical-space samples
//! as little-endian doubles behind a fixed header; the manifest is a
//! reloadable configuration echo with the run statistics and content
//! hashes in comment lines.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use qsflow_core::coefficients::MaterialCoefficients;
use qsflow_core::diagnostics::DiagnosticsRecord;
use qsflow_core::dynamics::FlowState;
use qsflow_core::spectral::Grid;

use crate::config::RunConfig;

/// Fixed CSV schema, in order.
pub const CSV_COLUMNS: &str = "t,E,D_loc,A,E_eta,D_glob,entropy_total,\
entropy_term1,entropy_term2,entropy_term3,entropy_term4,entropy_term5,\
trace_drift,symm_drift,div_drift";

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path) -> std::io::Result<CsvWriter> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_COLUMNS}")?;
        Ok(CsvWriter { out })
    }

    pub fn write_record(&mut self, r: &DiagnosticsRecord) -> std::io::Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.energy,
            r.dissipation_local,
            r.functional_a,
            r.modified_energy,
            r.dissipation_global,
            r.entropy_total,
            r.entropy_terms[0],
            r.entropy_terms[1],
            r.entropy_terms[2],
            r.entropy_terms[3],
            r.entropy_terms[4],
            r.trace_drift,
            r.symm_drift,
            r.div_drift
        )
    }

    /// Marks an interrupted series; the rows above remain valid.
    pub fn write_truncation_marker(&mut self, t: f64, reason: &str) -> std::io::Result<()> {
        writeln!(self.out, "# truncated at t = {t}: {reason}")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"QSSNAP01";

fn coeff_array(c: &MaterialCoefficients) -> [f64; 12] {
    [
        c.a,
        c.b,
        c.c,
        c.j,
        c.l,
        c.beta1,
        c.beta4,
        c.beta5,
        c.beta6,
        c.mu1,
        c.mu2,
        c.mu2_tilde,
    ]
}

/// Writes the final state: header (magic, d, n, t, eps, the twelve
/// coefficients) followed by u, Q, R physical samples, row-major
/// (axis 0 slowest), little-endian f64.
pub fn write_snapshot(
    path: &Path,
    state: &FlowState,
    c: &MaterialCoefficients,
) -> std::io::Result<()> {
    let grid = state.grid();
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&state.t.to_le_bytes())?;
    out.write_all(&state.eps.to_le_bytes())?;
    for v in coeff_array(c) {
        out.write_all(&v.to_le_bytes())?;
    }
    let d = grid.dim();
    for i in 0..d {
        for v in state.u.comp(i).to_physical() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    for f in state.q.components().iter().chain(state.r.components()) {
        for v in f.to_physical() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

/// Snapshot contents, physical-space samples per component.
pub struct Snapshot {
    pub t: f64,
    pub eps: f64,
    pub coeffs: MaterialCoefficients,
    pub state: FlowState,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, String> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut pos = 0usize;
    let take = |raw: &[u8], pos: &mut usize, n: usize| -> Result<Vec<u8>, String> {
        if *pos + n > raw.len() {
            return Err("snapshot truncated".into());
        }
        let s = raw[*pos..*pos + n].to_vec();
        *pos += n;
        Ok(s)
    };
    let magic = take(&raw, &mut pos, 8)?;
    if magic != SNAPSHOT_MAGIC {
        return Err("bad snapshot magic".into());
    }
    let rd_u32 = |raw: &[u8], pos: &mut usize| -> Result<u32, String> {
        let b = take(raw, pos, 4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    };
    let rd_f64 = |raw: &[u8], pos: &mut usize| -> Result<f64, String> {
        let b = take(raw, pos, 8)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    };
    let d = rd_u32(&raw, &mut pos)? as usize;
    let n = rd_u32(&raw, &mut pos)? as usize;
    let t = rd_f64(&raw, &mut pos)?;
    let eps = rd_f64(&raw, &mut pos)?;
    let mut cs = [0.0; 12];
    for slot in cs.iter_mut() {
        *slot = rd_f64(&raw, &mut pos)?;
    }
    let coeffs = MaterialCoefficients {
        a: cs[0],
        b: cs[1],
        c: cs[2],
        j: cs[3],
        l: cs[4],
        beta1: cs[5],
        beta4: cs[6],
        beta5: cs[7],
        beta6: cs[8],
        mu1: cs[9],
        mu2: cs[10],
        mu2_tilde: cs[11],
    };
    let grid = Grid::new(d, n).map_err(|e| e.to_string())?;
    let size = grid.size();
    let read_field = |pos: &mut usize| -> Result<Vec<f64>, String> {
        let mut out = Vec::with_capacity(size);
        for _ in 0..size {
            out.push(rd_f64(&raw, pos)?);
        }
        Ok(out)
    };
    let mut state = FlowState::zero(&grid, eps);
    state.t = t;
    for i in 0..d {
        let samples = read_field(&mut pos)?;
        *state.u.comp_mut(i) = qsflow_core::spectral::ScalarField::from_physical(&grid, &samples)
            .map_err(|e| e.to_string())?;
    }
    for ij in 0..d * d {
        let samples = read_field(&mut pos)?;
        state.q.components_mut()[ij] =
            qsflow_core::spectral::ScalarField::from_physical(&grid, &samples)
                .map_err(|e| e.to_string())?;
    }
    for ij in 0..d * d {
        let samples = read_field(&mut pos)?;
        state.r.components_mut()[ij] =
            qsflow_core::spectral::ScalarField::from_physical(&grid, &samples)
                .map_err(|e| e.to_string())?;
    }
    Ok(Snapshot {
        t,
        eps,
        coeffs,
        state,
    })
}

pub fn sha256_hex(path: &Path) -> std::io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher)?;
    Ok(format!("{:x}", hasher.finalize()))
}

/// Run statistics recorded in the manifest's comment lines.
pub struct RunStats {
    pub status: &'static str,
    pub steps: usize,
    pub final_t: f64,
    pub wall_seconds: f64,
}

/// Writes the manifest: the configuration echo (reloadable as-is) plus
/// statistics and content hashes as comments.
pub fn write_manifest(
    path: &Path,
    cfg: &RunConfig,
    stats: &RunStats,
    csv_path: &Path,
    snapshot_path: Option<&Path>,
) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "# qsflow run manifest; reload with --config {}",
        path.display()
    )?;
    writeln!(out, "# status = {}", stats.status)?;
    write!(out, "{}", cfg.echo())?;
    writeln!(out, "# steps = {}", stats.steps)?;
    writeln!(out, "# final_t = {}", stats.final_t)?;
    writeln!(out, "# wall_seconds = {:.3}", stats.wall_seconds)?;
    writeln!(out, "# csv_sha256 = {}", sha256_hex(csv_path)?)?;
    if let Some(snap) = snapshot_path {
        writeln!(out, "# snapshot_sha256 = {}", sha256_hex(snap)?)?;
    }
    out.flush()
}
