//! Configuration ingestion, checkpoint format, and the energy CSV log.
//!
//! Configs are a single JSON document with unknown keys rejected. A
//! checkpoint is a JSON header next to a raw little-endian binary blob file;
//! the pair round-trips bitwise. CSV values carry 17 significant digits so
//! parsing them back recovers the exact binary64 values.

use crate::energy::EnergyReport;
use crate::eos::ThermoParams;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{GridSpec, VectorField};
use crate::kinematics::FlowState;
use crate::solver::{Forcing, SolverConfig};
use crate::weight::WeightProfile;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const ENERGY_CSV_HEADER: &str =
    "t,E_I,E_II,E_III,E_IV,E_total,g0_defect,energy_drift,chi_h_res,min_J,max_eps_v";

// ---------------------------------------------------------------------------
// run configuration

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gamma: f64,
    #[serde(default)]
    pub eps: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub weight: WeightProfile,
    #[serde(default)]
    pub initial: InitialConfig,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub forcing: Option<ForcingConfig>,
    #[serde(default)]
    pub diag_order: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Which suite `relvac verify --config <this>` runs: "quick" or "full".
    #[serde(default)]
    pub verify_suite: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_one")]
    pub n1: usize,
    #[serde(default = "default_one")]
    pub n2: usize,
    pub n3: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Flow map at t = 0; identity when omitted.
    #[serde(default)]
    pub eta0: Option<[String; 3]>,
    /// Velocity at t = 0; zero when omitted.
    #[serde(default)]
    pub eta1: Option<[String; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingConfig {
    Expression { components: [String; 3] },
    MmsSin { amplitude: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_outdir")]
    pub dir: String,
    /// Cadence in time units; `t_end / 10` when omitted.
    #[serde(default)]
    pub cadence_dt: Option<f64>,
    #[serde(default = "default_true")]
    pub checkpoints: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_outdir(), cadence_dt: None, checkpoints: true }
    }
}

fn default_cfl() -> f64 {
    0.4
}
fn default_one() -> usize {
    1
}
fn default_outdir() -> String {
    "out".into()
}
fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_json(&text)
    }

    /// Output directory, honoring the `RELVAC_OUTPUT_DIR` override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var("RELVAC_OUTPUT_DIR") {
            Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => PathBuf::from(&self.output.dir),
        }
    }

    pub fn to_solver_config(&self) -> Result<SolverConfig> {
        let params = ThermoParams::new(self.gamma, self.eps)?;
        let grid = GridSpec::new(self.grid.n1, self.grid.n2, self.grid.n3)?;
        let mut cfg = SolverConfig::new(params, grid, self.t_end)?;
        cfg.weight = self.weight.clone();
        cfg.cfl = self.cfl;
        cfg.diag_order = self.diag_order;
        cfg.cadence_dt = self.output.cadence_dt.unwrap_or(self.t_end / 10.0);
        if let Some(eta0) = &self.initial.eta0 {
            cfg.eta0 = parse_triple(eta0)?;
        }
        if let Some(eta1) = &self.initial.eta1 {
            cfg.eta1 = parse_triple(eta1)?;
        }
        cfg.forcing = match &self.forcing {
            None => Forcing::None,
            Some(ForcingConfig::Expression { components }) => {
                Forcing::Expressions(Box::new(parse_triple(components)?))
            }
            Some(ForcingConfig::MmsSin { amplitude }) => Forcing::MmsSin { amplitude: *amplitude },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_triple(src: &[String; 3]) -> Result<[Expr; 3]> {
    Ok([Expr::parse(&src[0])?, Expr::parse(&src[1])?, Expr::parse(&src[2])?])
}

// ---------------------------------------------------------------------------
// checkpoints

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub time: f64,
    pub grid: [usize; 3],
    pub gamma: f64,
    pub eps: f64,
    pub weight: WeightProfile,
    pub dtype: String,
    pub order: String,
    pub fields: Vec<FieldDesc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDesc {
    pub name: String,
    pub components: usize,
    pub bytes: u64,
}

/// Write `<base>.json` + `<base>.bin`. Vector fields are stored one component
/// blob after another, nodes in row-major order, f64 little-endian.
pub fn write_checkpoint(
    base: &Path,
    state: &FlowState,
    params: &ThermoParams,
    weight: &WeightProfile,
) -> Result<()> {
    let grid = state.grid();
    let mut fields = vec![("eta", &state.eta), ("eta_t", &state.eta_t)];
    if let Some(acc) = &state.eta_tt {
        fields.push(("eta_tt", acc));
    }

    let node_bytes = 8 * grid.len() as u64;
    let header = CheckpointHeader {
        format: "relvac-checkpoint".into(),
        version: 1,
        time: state.time,
        grid: grid.shape,
        gamma: params.gamma,
        eps: params.eps,
        weight: weight.clone(),
        dtype: "f64-le".into(),
        order: "row-major".into(),
        fields: fields
            .iter()
            .map(|(name, _)| FieldDesc {
                name: (*name).into(),
                components: 3,
                bytes: 3 * node_bytes,
            })
            .collect(),
    };

    let json_path = base.with_extension("json");
    let bin_path = base.with_extension("bin");
    let text = serde_json::to_string_pretty(&header)
        .map_err(|e| Error::Config(format!("header serialization: {e}")))?;
    std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;

    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&bin_path).map_err(|e| Error::io(&bin_path, e))?,
    );
    for (_, field) in &fields {
        for c in 0..3 {
            for &v in &field.comp[c] {
                out.write_all(&v.to_le_bytes()).map_err(|e| Error::io(&bin_path, e))?;
            }
        }
    }
    out.flush().map_err(|e| Error::io(&bin_path, e))?;
    Ok(())
}

/// Read a checkpoint back; byte counts must match the header exactly.
pub fn read_checkpoint(json_path: &Path) -> Result<(CheckpointHeader, FlowState)> {
    let text = std::fs::read_to_string(json_path).map_err(|e| Error::io(json_path, e))?;
    let header: CheckpointHeader = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("checkpoint header: {e}")))?;
    if header.format != "relvac-checkpoint" || header.dtype != "f64-le" {
        return Err(Error::Config(format!(
            "unsupported checkpoint format {} / {}",
            header.format, header.dtype
        )));
    }
    let grid = GridSpec::new(header.grid[0], header.grid[1], header.grid[2])?;
    let bin_path = json_path.with_extension("bin");
    let mut reader = std::io::BufReader::new(
        std::fs::File::open(&bin_path).map_err(|e| Error::io(&bin_path, e))?,
    );

    let expected: u64 = header.fields.iter().map(|f| f.bytes).sum();
    let actual = std::fs::metadata(&bin_path).map_err(|e| Error::io(&bin_path, e))?.len();
    if expected != actual {
        return Err(Error::Config(format!(
            "checkpoint blob is {actual} bytes, header promises {expected}"
        )));
    }

    let mut read_field = |desc: &FieldDesc| -> Result<VectorField> {
        if desc.components != 3 || desc.bytes != 24 * grid.len() as u64 {
            return Err(Error::Config(format!(
                "field {} has unexpected size {} for this grid",
                desc.name, desc.bytes
            )));
        }
        let mut field = VectorField::zeros(grid);
        let mut buf = [0u8; 8];
        for c in 0..3 {
            for idx in 0..grid.len() {
                reader.read_exact(&mut buf).map_err(|e| Error::io(&bin_path, e))?;
                field.comp[c][idx] = f64::from_le_bytes(buf);
            }
        }
        Ok(field)
    };

    let mut eta = None;
    let mut eta_t = None;
    let mut eta_tt = None;
    for desc in &header.fields {
        let field = read_field(desc)?;
        match desc.name.as_str() {
            "eta" => eta = Some(field),
            "eta_t" => eta_t = Some(field),
            "eta_tt" => eta_tt = Some(field),
            other => return Err(Error::Config(format!("unknown checkpoint field {other}"))),
        }
    }
    let eta = eta.ok_or_else(|| Error::Config("checkpoint lacks the eta field".into()))?;
    let eta_t = eta_t.ok_or_else(|| Error::Config("checkpoint lacks the eta_t field".into()))?;
    let mut state = FlowState::new(eta, eta_t, header.time);
    state.eta_tt = eta_tt;
    Ok((header, state))
}

// ---------------------------------------------------------------------------
// energy CSV

/// One CSV row per report, 17 significant digits per value.
pub fn write_energy_csv(path: &Path, reports: &[EnergyReport]) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("no reports to write".into()));
    }
    let mut out = String::new();
    out.push_str(ENERGY_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let row = [
            r.time,
            r.e1,
            r.e2,
            r.e3,
            r.e4,
            r.e_total,
            r.g0_defect,
            r.energy_drift,
            r.chi_h_res,
            r.min_j,
            r.max_eps_v,
        ];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parse the CSV back into bare rows (for round-trip verification and the
/// downstream tooling).
pub fn parse_energy_csv(text: &str) -> Result<Vec<[f64; 11]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ENERGY_CSV_HEADER => {}
        other => return Err(Error::Config(format!("unexpected CSV header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            return Err(Error::Config(format!(
                "row {} has {} cells, expected 11",
                lineno + 2,
                cells.len()
            )));
        }
        let mut row = [0.0; 11];
        for (i, c) in cells.iter().enumerate() {
            row[i] = c
                .parse()
                .map_err(|e| Error::Config(format!("row {}: bad value {c}: {e}", lineno + 2)))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let text = r#"{
            "gamma": 2.0,
            "grid": {"n3": 65},
            "t_end": 0.5
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.grid.n1, 1);
        assert_eq!(cfg.cfl, 0.4);
        assert_eq!(cfg.eps, 0.0);
        let solver = cfg.to_solver_config().unwrap();
        assert!(solver.grid.is_planar());
        assert_eq!(solver.cadence_dt, 0.05);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = r#"{
            "gamma": 2.0,
            "grid": {"n3": 65},
            "t_end": 0.5,
            "tend": 1.0
        }"#;
        match RunConfig::from_json(text) {
            Err(Error::Config(msg)) => {
                assert!(msg.contains("line"), "{msg}");
                assert!(msg.contains("tend"), "{msg}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn forcing_variants_parse() {
        let text = r#"{
            "gamma": 2.0, "eps": 0.2,
            "grid": {"n3": 33},
            "t_end": 1.0,
            "forcing": {"kind": "mms_sin", "amplitude": 0.01},
            "initial": {"eta1": ["0", "0", "0.01*x3*(1-x3)"]}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap().to_solver_config().unwrap();
        assert!(matches!(cfg.forcing, Forcing::MmsSin { .. }));

        let text = r#"{
            "gamma": 2.0,
            "grid": {"n3": 33},
            "t_end": 1.0,
            "forcing": {"kind": "expression", "components": ["0", "0", "sin(t)*x3"]}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap().to_solver_config().unwrap();
        assert!(matches!(cfg.forcing, Forcing::Expressions(_)));
    }

    #[test]
    fn checkpoint_round_trip_is_bitwise() {
        let dir = std::env::temp_dir().join(format!("relvac-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let grid = GridSpec::planar(17).unwrap();
        let params = ThermoParams::new(2.0, 0.3).unwrap();
        let eta = VectorField::from_fn(grid, |x| {
            [x[0], x[1], x[2] + 0.123456789012345678 * x[2] * (1.0 - x[2])]
        });
        let eta_t = VectorField::from_fn(grid, |x| [0.0, 0.0, 0.1 + x[2] / 3.0]);
        let mut state = FlowState::new(eta, eta_t, 0.7071067811865476);
        state.eta_tt = Some(VectorField::from_fn(grid, |x| [0.0, 0.0, -x[2]]));

        let base = dir.join("snap");
        write_checkpoint(&base, &state, &params, &WeightProfile::Parabolic).unwrap();
        let (header, loaded) = read_checkpoint(&base.with_extension("json")).unwrap();
        assert_eq!(header.grid, [1, 1, 17]);
        assert_eq!(header.time.to_bits(), state.time.to_bits());
        for c in 0..3 {
            for (a, b) in state.eta.comp[c].iter().zip(&loaded.eta.comp[c]) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
            let acc0 = state.eta_tt.as_ref().unwrap();
            let acc1 = loaded.eta_tt.as_ref().unwrap();
            for (a, b) in acc0.comp[c].iter().zip(&acc1.comp[c]) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        // truncated blob is rejected
        let blob = base.with_extension("bin");
        let bytes = std::fs::read(&blob).unwrap();
        std::fs::write(&blob, &bytes[..bytes.len() - 8]).unwrap();
        assert!(read_checkpoint(&base.with_extension("json")).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let mk = |t: f64| {
            let mut r = EnergyReport {
                time: t,
                order: 0,
                order_threshold: 11.0,
                e1_entries: vec![],
                e2_entries: vec![],
                e3_entries: vec![],
                e4_entries: vec![],
                e1: std::f64::consts::PI * t,
                e2: 1.0 / 3.0,
                e3: 0.1,
                e4: 0.0,
                e_total: 0.0,
                sup_table: vec![],
                g0_defect: 1.234567890123456e-13,
                energy_drift: 7.77e-9,
                chi_h_res: 2e-4,
                min_j: 1.0 - 1e-16,
                max_eps_v: 0.0,
            };
            r.e_total = r.e1 + r.e3 + r.e4;
            r
        };
        let reports = vec![mk(0.0), mk(0.1), mk(0.2)];
        let dir = std::env::temp_dir().join(format!("relvac-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("energy.csv");
        write_energy_csv(&path, &reports).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(ENERGY_CSV_HEADER));
        let rows = parse_energy_csv(&text).unwrap();
        assert_eq!(rows.len(), 3);
        for (row, rep) in rows.iter().zip(&reports) {
            assert_eq!(row[0].to_bits(), rep.time.to_bits());
            assert_eq!(row[1].to_bits(), rep.e1.to_bits());
            assert_eq!(row[6].to_bits(), rep.g0_defect.to_bits());
            assert_eq!(row[9].to_bits(), rep.min_j.to_bits());
        }
        std::fs::remove_dir_all(&dir).ok();
        assert!(write_energy_csv(&path, &[]).is_err());
    }

    #[test]
    fn degenerate_run_writes_header_and_initial_row() {
        // a log with only the t = 0 report still produces a valid file
        let rep = EnergyReport {
            time: 0.0,
            order: 0,
            order_threshold: 11.0,
            e1_entries: vec![],
            e2_entries: vec![],
            e3_entries: vec![],
            e4_entries: vec![],
            e1: 0.0,
            e2: 0.3,
            e3: 0.1,
            e4: 0.0,
            e_total: 0.1,
            sup_table: vec![],
            g0_defect: 0.0,
            energy_drift: 0.0,
            chi_h_res: 0.0,
            min_j: 1.0,
            max_eps_v: 0.0,
        };
        let dir = std::env::temp_dir().join(format!("relvac-csv1-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("one.csv");
        write_energy_csv(&path, &[rep]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let rows = parse_energy_csv(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][0], 0.0);
        assert_eq!(rows[0][1], 0.0); // E_I column zero at rest
        std::fs::remove_dir_all(&dir).ok();
    }
}
