//! Run configuration, command dispatch and table serialization.
//!
//! A configuration is a list of `key = value` lines with `#` comments.
//! Overrides given on the command line take precedence over the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::continuous::LossModel;
use crate::discrete::{tat_larmor_rate, Controls};
use crate::params::{
    derive_coupling_with, larmor_field, scattering_loss, total_crossing_loss, CouplingConvention, PhysicalParams,
};
use crate::sweeps::{
    evaluate, figure3a, figure3b, figure4b, figure4c, optimize_controls, optimize_point, Model, OptimizedPoint,
    PointSpec, Row, Scheme, SearchSettings, Series, SweepTable,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Single,
    Dp,
    Oat,
    Tat,
    Npass,
    Fig3a,
    Fig3b,
    Fig4b,
    Fig4c,
    Calibrate,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single" => Command::Single,
            "dp" => Command::Dp,
            "oat" => Command::Oat,
            "tat" => Command::Tat,
            "npass" => Command::Npass,
            "fig3a" => Command::Fig3a,
            "fig3b" => Command::Fig3b,
            "fig4b" => Command::Fig4b,
            "fig4c" => Command::Fig4c,
            "calibrate" => Command::Calibrate,
            other => {
                return Err(Error::Config(format!(
                    "unknown command `{other}` (expected one of single, dp, oat, tat, npass, fig3a, fig3b, fig4b, fig4c, calibrate)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One accepted configuration key.
pub struct KeyDoc {
    pub key: &'static str,
    pub symbol: &'static str,
    pub help: &'static str,
    pub default: &'static str,
}

pub const KEYS: &[KeyDoc] = &[
    KeyDoc { key: "command", symbol: "", help: "single | dp | oat | tat | npass | fig3a | fig3b | fig4b | fig4c | calibrate", default: "(required)" },
    KeyDoc { key: "alpha0", symbol: "alpha_0", help: "resonant optical depth", default: "50" },
    KeyDoc { key: "eta", symbol: "eta~", help: "spin decay per pulse; fixes the photon number (optimized when absent)", default: "optimized" },
    KeyDoc { key: "zeta", symbol: "zeta", help: "light loss per cell re-entry", default: "0" },
    KeyDoc { key: "phi", symbol: "phi", help: "angle between counter-propagating passes, rad", default: "0" },
    KeyDoc { key: "r0", symbol: "r_0", help: "reflectivity of one cell window", default: "0" },
    KeyDoc { key: "passes", symbol: "N", help: "number of passes for npass and calibrate", default: "3" },
    KeyDoc { key: "scheme", symbol: "", help: "scheme evaluated by single: dp | oat | tat | npass", default: "tat" },
    KeyDoc { key: "alpha", symbol: "alpha", help: "waveplate rotation before pass 2, rad", default: "pi/3" },
    KeyDoc { key: "beta", symbol: "beta", help: "total waveplate rotation before pass 3, rad", default: "2pi/3" },
    KeyDoc { key: "omega", symbol: "Omega T", help: "Larmor rate in rad per pulse", default: "matched rate" },
    KeyDoc { key: "n_atoms", symbol: "N_at", help: "atom number", default: "2e12" },
    KeyDoc { key: "pulse_duration", symbol: "T", help: "pulse duration, s", default: "5e-3" },
    KeyDoc { key: "n_photons", symbol: "N_ph", help: "photons per pulse (calibrate)", default: "none" },
    KeyDoc { key: "g_factor", symbol: "g_F", help: "Lande factor of the ground level (calibrate)", default: "0.5" },
    KeyDoc { key: "model", symbol: "", help: "continuous | discrete", default: "continuous" },
    KeyDoc { key: "segments", symbol: "M", help: "pulse segments for the discrete model, 0 = converge automatically", default: "0" },
    KeyDoc { key: "loss_law", symbol: "", help: "compound | printed (linearized third-pass transmission)", default: "compound" },
    KeyDoc { key: "convention", symbol: "kappa^2", help: "calibrated (eta alpha_0) | microscopic (eta alpha_0 / 4)", default: "calibrated" },
    KeyDoc { key: "format", symbol: "", help: "csv | json", default: "csv" },
    KeyDoc { key: "output", symbol: "", help: "output file, - for stdout", default: "-" },
    KeyDoc { key: "workers", symbol: "", help: "worker threads for sweeps, 0 = all cores", default: "0" },
];

/// Help text listing every key.
pub fn keys_help() -> String {
    let mut out = String::from("Configuration keys (key = value):\n");
    for k in KEYS {
        let sym = if k.symbol.is_empty() { String::new() } else { format!(" [{}]", k.symbol) };
        out.push_str(&format!("  {:<15}{} {} (default: {})\n", k.key, sym, k.help, k.default));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: PhysicalParams,
    /// Fixed decay; optimized when `None`.
    pub eta: Option<f64>,
    pub zeta: f64,
    pub passes: usize,
    pub scheme: Scheme,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub n_photons: Option<f64>,
    pub g_factor: f64,
    pub model: Model,
    pub loss: LossModel,
    pub convention: CouplingConvention,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub workers: usize,
}

/// Parse `key = value` lines.
pub fn parse_lines(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{}`", n + 1, line)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a number")))
                .and_then(|x| {
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(Error::Config(format!("`{key}`: value must be finite")))
                    }
                })
        })
        .transpose()
}

fn parse_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    map.get(key)
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a non-negative integer")))
        })
        .transpose()
}

fn bound(ok: bool, key: &str, value: f64, rule: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("`{key}` = {value} out of range: must satisfy {rule}")))
    }
}

/// Build a validated configuration from file text and `key=value` overrides.
pub fn parse_config(file_text: Option<&str>, overrides: &[String]) -> Result<RunConfig> {
    let mut map = match file_text {
        Some(t) => parse_lines(t)?,
        None => BTreeMap::new(),
    };
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{o}` is not KEY=VALUE")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    for k in map.keys() {
        if !KEYS.iter().any(|d| d.key == k) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
    }

    let command: Command = map
        .get("command")
        .ok_or_else(|| Error::Config("missing required key `command`".into()))?
        .parse()?;

    let mut params = PhysicalParams::default();
    if let Some(v) = parse_f64(&map, "alpha0")? {
        bound(v > 0.0, "alpha0", v, "alpha0 > 0")?;
        params.optical_depth = v;
    }
    let eta = parse_f64(&map, "eta")?;
    if let Some(v) = eta {
        bound((0.0..1.0).contains(&v), "eta", v, "0 <= eta < 1")?;
        params.eta_tilde = v;
    }
    let zeta = parse_f64(&map, "zeta")?.unwrap_or(0.0);
    bound((0.0..1.0).contains(&zeta), "zeta", zeta, "0 <= zeta < 1")?;
    if let Some(v) = parse_f64(&map, "phi")? {
        bound((0.0..std::f64::consts::FRAC_PI_2).contains(&v), "phi", v, "0 <= phi < pi/2")?;
        params.beam_angle = v;
    }
    if let Some(v) = parse_f64(&map, "r0")? {
        bound((0.0..0.5).contains(&v), "r0", v, "0 <= r0 < 0.5")?;
        params.wall_reflectivity = v;
    }
    if let Some(v) = parse_f64(&map, "n_atoms")? {
        bound(v > 0.0, "n_atoms", v, "n_atoms > 0")?;
        params.n_atoms = v;
    }
    if let Some(v) = parse_f64(&map, "pulse_duration")? {
        bound(v > 0.0, "pulse_duration", v, "pulse_duration > 0")?;
        params.pulse_duration = v;
    }
    let passes = parse_usize(&map, "passes")?.unwrap_or(3);
    bound(passes >= 2, "passes", passes as f64, "passes >= 2")?;
    let n_photons = parse_f64(&map, "n_photons")?;
    if let Some(v) = n_photons {
        bound(v > 0.0, "n_photons", v, "n_photons > 0")?;
    }
    let g_factor = parse_f64(&map, "g_factor")?.unwrap_or(0.5);
    bound(g_factor != 0.0, "g_factor", g_factor, "g_factor != 0")?;
    let omega = parse_f64(&map, "omega")?;
    if let Some(v) = omega {
        bound(v >= 0.0, "omega", v, "omega >= 0")?;
    }

    let scheme = match map.get("scheme").map(String::as_str).unwrap_or("tat") {
        "dp" => Scheme::Dp,
        "oat" => Scheme::Oat,
        "tat" => Scheme::Tat,
        "npass" => {
            bound(passes >= 3, "passes", passes as f64, "passes >= 3 for npass")?;
            Scheme::Ring(passes)
        }
        other => return Err(Error::Config(format!("`scheme`: unknown scheme `{other}`"))),
    };
    let segments = parse_usize(&map, "segments")?.unwrap_or(0);
    let model = match map.get("model").map(String::as_str).unwrap_or("continuous") {
        "continuous" => Model::Continuous,
        "discrete" => Model::Discrete(if segments == 0 { None } else { Some(segments) }),
        other => return Err(Error::Config(format!("`model`: expected continuous or discrete, got `{other}`"))),
    };
    let loss = match map.get("loss_law").map(String::as_str).unwrap_or("compound") {
        "compound" => LossModel::Compound,
        "printed" => {
            bound(zeta <= 0.5, "zeta", zeta, "zeta <= 0.5 with loss_law = printed")?;
            LossModel::Printed
        }
        other => return Err(Error::Config(format!("`loss_law`: expected compound or printed, got `{other}`"))),
    };
    let convention = match map.get("convention").map(String::as_str).unwrap_or("calibrated") {
        "calibrated" => CouplingConvention::Calibrated,
        "microscopic" => CouplingConvention::Microscopic,
        other => {
            return Err(Error::Config(format!(
                "`convention`: expected calibrated or microscopic, got `{other}`"
            )))
        }
    };
    let format = match map.get("format").map(String::as_str).unwrap_or("csv") {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(Error::Config(format!("`format`: expected csv or json, got `{other}`"))),
    };
    let output = map
        .get("output")
        .filter(|p| p.as_str() != "-" && !p.is_empty())
        .map(PathBuf::from);
    let workers = parse_usize(&map, "workers")?.unwrap_or(0);

    match command {
        Command::Single | Command::Calibrate if eta.is_none() => {
            return Err(Error::Config(format!("command `{command}` requires key `eta`")))
        }
        Command::Npass if !map.contains_key("passes") => {
            return Err(Error::Config("command `npass` requires key `passes`".into()))
        }
        Command::Npass => bound(passes >= 3, "passes", passes as f64, "passes >= 3 for npass")?,
        _ => {}
    }
    params.validate().map_err(|e| Error::Config(e.to_string()))?;

    Ok(RunConfig {
        command,
        params,
        eta,
        zeta,
        passes,
        scheme,
        alpha: parse_f64(&map, "alpha")?,
        beta: parse_f64(&map, "beta")?,
        omega,
        n_photons,
        g_factor,
        model,
        loss,
        convention,
        format,
        output,
        workers,
    })
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        write!(f, "{}", s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

/// Values printed by `calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub n_passes: usize,
    pub kappa: f64,
    pub kappa2: f64,
    pub chi: f64,
    pub epsilon: Option<f64>,
    pub zeta: f64,
    pub omega_tat: f64,
    pub field_tesla: f64,
    pub larmor_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(SweepTable),
    Calibration(Calibration),
}

impl RunConfig {
    fn spec(&self, scheme: Scheme) -> PointSpec {
        PointSpec {
            alpha0: self.params.optical_depth,
            zeta: self.zeta,
            phi: self.params.beam_angle,
            scheme,
            model: self.model,
            loss: self.loss,
            convention: self.convention,
        }
    }

    fn controls(&self, spec: &PointSpec, eta: f64) -> Result<Controls> {
        let d = spec.default_controls(spec.kappa2(eta)?);
        Ok(Controls {
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            omega: self.omega.unwrap_or(d.omega),
        })
    }
}

fn point_table(label: &str, spec: &PointSpec, p: &OptimizedPoint) -> SweepTable {
    let mut controls = BTreeMap::new();
    controls.insert("alpha".to_string(), p.controls.alpha);
    controls.insert("beta".to_string(), p.controls.beta);
    controls.insert("omega".to_string(), p.controls.omega);
    controls.insert("kappa2".to_string(), p.kappa2);
    controls.insert("theta".to_string(), p.result.theta_opt);
    let mut fixed = BTreeMap::new();
    fixed.insert("alpha0".to_string(), spec.alpha0);
    fixed.insert("zeta".to_string(), spec.zeta);
    fixed.insert("phi".to_string(), spec.phi);
    fixed.insert("n_passes".to_string(), spec.scheme.n_passes() as f64);
    SweepTable {
        name: label.to_string(),
        independent: "eta".to_string(),
        grid: vec![p.eta_tilde],
        series: vec![Series {
            label: label.to_string(),
            fixed,
            rows: vec![Row {
                x: p.eta_tilde,
                controls,
                xi2: p.result.xi2,
                db: p.result.xi2_db,
            }],
        }],
    }
}

fn calibrate(cfg: &RunConfig) -> Result<Calibration> {
    let n = cfg.passes;
    let c = derive_coupling_with(&cfg.params, n, cfg.convention)?;
    let epsilon = cfg
        .n_photons
        .map(|ph| scattering_loss(&cfg.params, ph, n))
        .transpose()?;
    let zeta = total_crossing_loss(epsilon.unwrap_or(0.0), cfg.params.wall_reflectivity)?;
    let omega_tat = tat_larmor_rate(n.max(3), c.kappa2);
    let field = larmor_field(omega_tat, cfg.params.pulse_duration, cfg.g_factor)?;
    Ok(Calibration {
        n_passes: n,
        kappa: c.kappa(),
        kappa2: c.kappa2,
        chi: c.chi2.sqrt(),
        epsilon,
        zeta,
        omega_tat,
        field_tesla: field.field_tesla,
        larmor_hz: field.larmor_hz,
    })
}

fn run_inner(cfg: &RunConfig) -> Result<Output> {
    let s = SearchSettings::default();
    let optimize = |scheme: Scheme, label: &str| -> Result<Output> {
        let spec = cfg.spec(scheme);
        let p = match cfg.eta {
            Some(eta) => optimize_controls(&spec, eta, &s)?,
            None => optimize_point(&spec, &s)?,
        };
        Ok(Output::Table(point_table(label, &spec, &p)))
    };
    match cfg.command {
        Command::Single => {
            let spec = cfg.spec(cfg.scheme);
            let eta = cfg.params.eta_tilde;
            let controls = cfg.controls(&spec, eta)?;
            let result = evaluate(&spec, eta, controls)?;
            let p = OptimizedPoint {
                eta_tilde: eta,
                kappa2: spec.kappa2(eta)?,
                controls,
                result,
            };
            Ok(Output::Table(point_table("single", &spec, &p)))
        }
        Command::Dp => optimize(Scheme::Dp, "dp"),
        Command::Oat => optimize(Scheme::Oat, "oat"),
        Command::Tat => optimize(Scheme::Tat, "tat"),
        Command::Npass => optimize(Scheme::Ring(cfg.passes), "npass"),
        Command::Fig3a => figure3a(cfg.model, &s).map(Output::Table),
        Command::Fig3b => figure3b(cfg.model, &s).map(Output::Table),
        Command::Fig4b => figure4b(cfg.model, &s).map(Output::Table),
        Command::Fig4c => figure4c(cfg.model, &s).map(Output::Table),
        Command::Calibrate => calibrate(cfg).map(Output::Calibration),
    }
}

/// Execute a configuration, on `workers` threads when given.
pub fn run(cfg: &RunConfig) -> Result<Output> {
    if cfg.workers == 0 {
        return run_inner(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("`workers`: {e}")))?;
    pool.install(|| run_inner(cfg))
}

/// 12 significant digits; fixed notation for `1e-5 <= |x| < 1e12`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Column names of the CSV form of a table.
pub fn csv_header(table: &SweepTable) -> Vec<String> {
    let mut cols = vec!["x".to_string()];
    for s in &table.series {
        cols.push(format!("{}_xi2", s.label));
        cols.push(format!("{}_db", s.label));
        if let Some(r) = s.rows.first() {
            cols.extend(r.controls.keys().map(|k| format!("{}_{}", s.label, k)));
        }
    }
    cols
}

pub fn serialize(table: &SweepTable, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => serde_json::to_vec_pretty(table).map_err(|e| Error::Io(e.to_string())),
        Format::Csv => {
            let mut out = csv_header(table).join(",");
            out.push('\n');
            for (i, x) in table.grid.iter().enumerate() {
                let mut cells = vec![format_number(*x)];
                for s in &table.series {
                    let r = s
                        .rows
                        .get(i)
                        .ok_or_else(|| Error::InvalidOperation(format!("series `{}` is missing row {i}", s.label)))?;
                    cells.push(format_number(r.xi2));
                    cells.push(format_number(r.db));
                    cells.extend(r.controls.values().map(|v| format_number(*v)));
                }
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
    }
}

pub fn serialize_calibration(c: &Calibration, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => serde_json::to_vec_pretty(c).map_err(|e| Error::Io(e.to_string())),
        Format::Csv => {
            let mut rows = vec![
                ("n_passes", c.n_passes as f64),
                ("kappa", c.kappa),
                ("kappa2", c.kappa2),
                ("chi", c.chi),
            ];
            if let Some(e) = c.epsilon {
                rows.push(("epsilon", e));
            }
            rows.extend([
                ("zeta", c.zeta),
                ("omega_tat", c.omega_tat),
                ("field_tesla", c.field_tesla),
                ("larmor_hz", c.larmor_hz),
            ]);
            let mut out = String::from("quantity,value\n");
            for (k, v) in rows {
                out.push_str(&format!("{k},{}\n", format_number(v)));
            }
            Ok(out.into_bytes())
        }
    }
}

pub fn render(output: &Output, format: Format) -> Result<Vec<u8>> {
    match output {
        Output::Table(t) => serialize(t, format),
        Output::Calibration(c) => serialize_calibration(c, format),
    }
}

/// Run and write the result to the configured destination.
pub fn execute(cfg: &RunConfig) -> Result<Vec<u8>> {
    let bytes = render(&run(cfg)?, cfg.format)?;
    if let Some(path) = &cfg.output {
        std::fs::write(path, &bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(a: &[&str]) -> Vec<String> {
        a.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn file_and_overrides() {
        let text = "# operating point\ncommand = tat\nalpha0 = 50 # optical depth\nzeta=0.02\n\nphi = 0.05\n";
        let cfg = parse_config(Some(text), &args(&["eta=0.26", "zeta=0.06"])).unwrap();
        assert_eq!(cfg.command, Command::Tat);
        assert_eq!(cfg.params.optical_depth, 50.0);
        assert_eq!(cfg.zeta, 0.06);
        assert_eq!(cfg.eta, Some(0.26));
        assert_eq!(cfg.params.beam_angle, 0.05);
    }

    #[test]
    fn defaults_for_figures() {
        let cfg = parse_config(None, &args(&["command=fig3a"])).unwrap();
        assert_eq!(cfg.command, Command::Fig3a);
        assert_eq!(cfg.model, Model::Continuous);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.output, None);
    }

    #[test]
    fn rejections_name_key_and_bound() {
        let e = parse_config(None, &args(&["command=tat", "zeta=1.5"])).unwrap_err();
        assert!(e.to_string().contains("zeta") && e.to_string().contains("zeta < 1"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = parse_config(None, &args(&["command=tat", "speed=3"])).unwrap_err();
        assert!(e.to_string().contains("unknown key `speed`"));
        assert!(parse_config(None, &args(&["alpha0=3"])).is_err());
        assert!(parse_config(None, &args(&["command=single"])).unwrap_err().to_string().contains("eta"));
        assert!(parse_config(None, &args(&["command=npass"])).is_err());
        assert!(parse_config(None, &args(&["command=npass", "passes=2"])).is_err());
        assert!(parse_config(None, &args(&["command=tat", "phi=abc"])).is_err());
        assert!(parse_config(Some("command tat"), &[]).is_err());
        assert!(parse_config(None, &args(&["command=fig9"])).is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.02345), "0.0234500000000");
        assert_eq!(format_number(7.4), "7.40000000000");
        assert_eq!(format_number(-1.5), "-1.50000000000");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0e-7), "1.00000000000e-7");
        assert_eq!(format_number(9.9999999999999), "10.0000000000");
        assert_eq!(format_number(123456.0), "123456.000000");
        assert_eq!(format_number(2.5e13), "2.50000000000e13");
    }

    fn one_row() -> SweepTable {
        let mut controls = BTreeMap::new();
        controls.insert("alpha".to_string(), 1.0);
        SweepTable {
            name: "t".into(),
            independent: "eta".into(),
            grid: vec![0.26],
            series: vec![Series {
                label: "tat".into(),
                fixed: BTreeMap::new(),
                rows: vec![Row {
                    x: 0.26,
                    controls,
                    xi2: 0.182,
                    db: 7.4,
                }],
            }],
        }
    }

    #[test]
    fn one_row_csv() {
        let csv = String::from_utf8(serialize(&one_row(), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "x,tat_xi2,tat_db,tat_alpha");
        assert_eq!(lines[1], "0.260000000000,0.182000000000,7.40000000000,1.00000000000");
    }

    #[test]
    fn json_round_trip() {
        let t = one_row();
        let bytes = serialize(&t, Format::Json).unwrap();
        let back: SweepTable = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn calibration_values() {
        let cfg = parse_config(
            None,
            &args(&["command=calibrate", "eta=0.26", "r0=0.01", "n_photons=1e14", "n_atoms=2e12"]),
        )
        .unwrap();
        let Output::Calibration(c) = run(&cfg).unwrap() else { panic!("expected calibration") };
        assert!((c.kappa - 2.082).abs() < 1e-3);
        let eps = 2e12 * 0.26 / 3.0 / 1e14;
        assert_eq!(c.epsilon, Some(eps));
        assert!((c.zeta - (eps + 0.02)).abs() < 1e-15);
        assert!((c.omega_tat - 3f64.sqrt() / 4.0 * c.kappa2).abs() < 1e-12);
        assert!((c.larmor_hz - c.omega_tat / 5e-3 / (2.0 * std::f64::consts::PI)).abs() < 1e-9);
    }

    #[test]
    fn single_point_uses_given_controls() {
        let cfg = parse_config(
            None,
            &args(&["command=single", "eta=0.2", "alpha=1.0", "beta=2.1", "omega=1.5", "zeta=0.02"]),
        )
        .unwrap();
        let Output::Table(t) = run(&cfg).unwrap() else { panic!("expected table") };
        let row = &t.series[0].rows[0];
        assert_eq!(row.controls["alpha"], 1.0);
        assert_eq!(row.controls["omega"], 1.5);
        let direct = evaluate(
            &cfg.spec(Scheme::Tat),
            0.2,
            Controls {
                alpha: 1.0,
                beta: 2.1,
                omega: 1.5,
            },
        )
        .unwrap();
        assert_eq!(row.xi2, direct.xi2);
    }
}
