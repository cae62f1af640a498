//! JSON run configuration.
//!
//! Every key is optional and falls back to the flash-flood monitoring
//! setup, except the initial charge, which must be given exactly once as
//! either `initial.soe` or `initial.z`. Unknown keys are errors. Relative
//! paths are resolved against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use ctxnode_core::energy::{self, BatteryModel, EnergyProfile, HarvestModel, OcvCurve, SocState};
use ctxnode_core::mpc::{MpcConfig, NodeModel, SolverOptions, Weights};
use ctxnode_core::scenario::Scenario;
use ctxnode_core::sim::{Dataset, SimOptions};
use ctxnode_core::voi::VoiParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocv::load_ocv_table;
use crate::timeseries::{self, Aggregation, ColumnSpec, WindowGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Decision window length, hours.
    pub window_hours: f64,
    pub voi: VoiSection,
    pub battery: BatterySection,
    pub profile: ProfileSection,
    pub harvest: HarvestSection,
    pub mpc: MpcSection,
    pub initial: InitialSection,
    pub dataset: DatasetSection,
    pub sim: SimSection,
    pub output: OutputSection,
    /// File the config was read from, for error messages.
    #[serde(skip)]
    pub source: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoiSection {
    pub lambda_c: f64,
    pub x_c: f64,
    pub alpha_r: f64,
    pub alpha_d: f64,
    pub d_o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySection {
    pub capacity_ah: f64,
    pub z_min: f64,
    pub v_nom: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ocv_table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub i_sleep: f64,
    pub i_sense: f64,
    pub i_transmit: f64,
    pub d_sense: f64,
    pub d_transmit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestSection {
    pub efficiency_eta: f64,
    pub panel_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSection {
    pub horizon: usize,
    pub discount: f64,
    pub w_i: f64,
    pub w_e: f64,
    pub f_s_max: f64,
    pub f_t_max: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    #[default]
    Synthetic,
    Files,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    /// Multiplies every irradiance value, for energy-constrained runs.
    pub irradiance_scale: f64,
    pub seed: u64,
    pub process_noise: f64,
    pub days: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<SourceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irradiance: Option<SourceSection>,
    /// ISO-8601 start of the first window; defaults to the first process
    /// reading.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    /// Window count; defaults to every window both files cover.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    #[default]
    Csv,
    NasaPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub path: PathBuf,
    pub format: SourceFormat,
    pub timestamp_column: String,
    pub value_column: String,
    pub parameter: String,
    pub utc_offset_hours: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub restart_hysteresis: f64,
    pub belief_lookback: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window_hours: 1.0,
            voi: VoiSection::default(),
            battery: BatterySection::default(),
            profile: ProfileSection::default(),
            harvest: HarvestSection::default(),
            mpc: MpcSection::default(),
            initial: InitialSection::default(),
            dataset: DatasetSection::default(),
            sim: SimSection::default(),
            output: OutputSection::default(),
            source: None,
        }
    }
}

impl Default for VoiSection {
    fn default() -> Self {
        let p = VoiParams::flood_monitoring();
        Self {
            lambda_c: p.lambda_c,
            x_c: p.x_c,
            alpha_r: p.alpha_r,
            alpha_d: p.alpha_d,
            d_o: p.d_o,
        }
    }
}

impl Default for BatterySection {
    fn default() -> Self {
        let b = BatteryModel::molicel_p26a();
        Self {
            capacity_ah: b.capacity_ah(),
            z_min: b.z_min(),
            v_nom: b.v_nom(),
            ocv_table: None,
        }
    }
}

impl Default for ProfileSection {
    fn default() -> Self {
        let p = EnergyProfile::esp32_air_quality();
        Self {
            i_sleep: p.i_sleep,
            i_sense: p.i_sense,
            i_transmit: p.i_transmit,
            d_sense: p.d_sense,
            d_transmit: p.d_transmit,
        }
    }
}

impl Default for HarvestSection {
    fn default() -> Self {
        let h = HarvestModel::small_panel();
        Self {
            efficiency_eta: h.efficiency_eta,
            panel_area: h.panel_area,
        }
    }
}

impl Default for MpcSection {
    fn default() -> Self {
        let c = MpcConfig::flood_monitoring();
        Self {
            horizon: c.horizon,
            discount: c.discount,
            w_i: c.weights.w_i,
            w_e: c.weights.w_e,
            f_s_max: c.f_s_max,
            f_t_max: c.f_t_max,
            max_iterations: c.solver.max_iterations,
            tolerance: c.solver.tolerance,
        }
    }
}

impl Default for DatasetSection {
    fn default() -> Self {
        let s = Scenario::canonical();
        Self {
            kind: DatasetKind::Synthetic,
            irradiance_scale: s.irradiance_scale,
            seed: s.seed,
            process_noise: s.process_noise,
            days: s.days,
            process: None,
            irradiance: None,
            start: None,
            windows: None,
        }
    }
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            path: PathBuf::new(),
            format: SourceFormat::Csv,
            timestamp_column: "timestamp".into(),
            value_column: "value".into(),
            parameter: "ALLSKY_SFC_SW_DWN".into(),
            utc_offset_hours: 0,
        }
    }
}

impl Default for SimSection {
    fn default() -> Self {
        let o = SimOptions::default();
        Self {
            restart_hysteresis: o.restart_hysteresis,
            belief_lookback: o.belief_lookback,
        }
    }
}

impl SourceSection {
    pub fn column_spec(&self) -> ColumnSpec {
        match self.format {
            SourceFormat::Csv => ColumnSpec::Csv {
                timestamp: self.timestamp_column.clone(),
                value: self.value_column.clone(),
            },
            SourceFormat::NasaPower => ColumnSpec::NasaPower {
                parameter: self.parameter.clone(),
                utc_offset_hours: self.utc_offset_hours,
            },
        }
    }
}

/// A validated configuration with its data loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub model: NodeModel,
    pub mpc: MpcConfig,
    pub dataset: Dataset,
    pub z_initial: f64,
    pub sim: SimOptions,
}

impl RunConfig {
    /// Parses `path`, resolves relative paths and checks that referenced
    /// files exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config {
                path: path.into(),
                message,
            },
            other => other,
        })?;
        config.source = Some(path.into());
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        config.check_files()?;
        Ok(config)
    }

    /// Parses JSON text without touching the filesystem.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.battery.ocv_table.as_mut() {
            fix(p);
        }
        for s in [self.dataset.process.as_mut(), self.dataset.irradiance.as_mut()].into_iter().flatten() {
            fix(&mut s.path);
        }
        if let Some(p) = self.output.trace.as_mut() {
            fix(p);
        }
    }

    fn check_files(&self) -> Result<()> {
        let inputs = [
            ("battery.ocv_table", self.battery.ocv_table.as_ref()),
            ("dataset.process.path", self.dataset.process.as_ref().map(|s| &s.path)),
            ("dataset.irradiance.path", self.dataset.irradiance.as_ref().map(|s| &s.path)),
        ];
        for (key, path) in inputs {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(self.invalid(format!("{key}: file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    fn invalid(&self, message: String) -> Error {
        Error::Config {
            path: self.source.clone().unwrap_or_else(|| PathBuf::from("<config>")),
            message,
        }
    }

    /// Maps a model error to a config error naming `section.field`.
    fn in_section(&self, section: &'static str) -> impl Fn(ctxnode_core::Error) -> Error + '_ {
        move |e| {
            let message = match e {
                ctxnode_core::Error::NonFinite { .. } | ctxnode_core::Error::OutOfRange { .. } => {
                    format!("{section}.{e}")
                }
                other => format!("{section}: {other}"),
            };
            self.invalid(message)
        }
    }

    /// Replaces the initial charge with an initial SoE.
    pub fn set_initial_soe(&mut self, soe: f64) {
        self.initial = InitialSection { soe: Some(soe), z: None };
    }

    pub fn voi_params(&self) -> Result<VoiParams> {
        let v = &self.voi;
        VoiParams::new(v.lambda_c, v.x_c, v.alpha_r, v.alpha_d, v.d_o, self.window_hours).map_err(self.in_section("voi"))
    }

    pub fn battery_model(&self) -> Result<BatteryModel> {
        let curve = match &self.battery.ocv_table {
            Some(p) => load_ocv_table(p)?,
            None => OcvCurve::default_li_ion(),
        };
        let b = &self.battery;
        BatteryModel::new(b.capacity_ah, b.z_min, b.v_nom, curve).map_err(self.in_section("battery"))
    }

    pub fn energy_profile(&self) -> Result<EnergyProfile> {
        let p = &self.profile;
        EnergyProfile::new(p.i_sleep, p.i_sense, p.i_transmit, p.d_sense, p.d_transmit).map_err(self.in_section("profile"))
    }

    pub fn harvest_model(&self) -> Result<HarvestModel> {
        HarvestModel::new(self.harvest.efficiency_eta, self.harvest.panel_area).map_err(self.in_section("harvest"))
    }

    pub fn node_model(&self) -> Result<NodeModel> {
        Ok(NodeModel {
            voi: self.voi_params()?,
            battery: self.battery_model()?,
            profile: self.energy_profile()?,
            harvest: self.harvest_model()?,
        })
    }

    pub fn mpc_config(&self) -> Result<MpcConfig> {
        let m = &self.mpc;
        let c = MpcConfig {
            horizon: m.horizon,
            discount: m.discount,
            weights: Weights { w_i: m.w_i, w_e: m.w_e },
            f_s_max: m.f_s_max,
            f_t_max: m.f_t_max,
            delta: self.window_hours,
            solver: SolverOptions {
                max_iterations: m.max_iterations,
                tolerance: m.tolerance,
            },
        };
        c.validate().map_err(self.in_section("mpc"))?;
        Ok(c)
    }

    pub fn sim_options(&self) -> Result<SimOptions> {
        let o = SimOptions {
            restart_hysteresis: self.sim.restart_hysteresis,
            belief_lookback: self.sim.belief_lookback,
        };
        o.validate().map_err(self.in_section("sim"))?;
        Ok(o)
    }

    /// Initial SoC from whichever of `initial.soe` and `initial.z` is set.
    pub fn initial_soc(&self, battery: &BatteryModel) -> Result<f64> {
        match (self.initial.soe, self.initial.z) {
            (Some(soe), None) => {
                if !(0.0..=1.0).contains(&soe) {
                    return Err(self.invalid(format!("initial.soe = {soe} is out of range: expected in [0, 1]")));
                }
                energy::soc_for_soe(soe, battery)
                    .map(SocState::value)
                    .map_err(self.in_section("initial"))
            }
            (None, Some(z)) => SocState::new(z).map(SocState::value).map_err(self.in_section("initial")),
            (Some(_), Some(_)) => Err(self.invalid("initial: set exactly one of soe and z, not both".into())),
            (None, None) => Err(self.invalid("initial: set exactly one of soe and z".into())),
        }
    }

    /// The synthetic scenario this config describes.
    pub fn scenario(&self) -> Result<Scenario> {
        let d = &self.dataset;
        if d.kind != DatasetKind::Synthetic {
            return Err(self.invalid("dataset.kind must be synthetic to generate a scenario".into()));
        }
        for (key, set) in [
            ("dataset.process", d.process.is_some()),
            ("dataset.irradiance", d.irradiance.is_some()),
            ("dataset.start", d.start.is_some()),
            ("dataset.windows", d.windows.is_some()),
        ] {
            if set {
                return Err(self.invalid(format!("{key} is only valid with dataset.kind = files")));
            }
        }
        if d.days == 0 {
            return Err(self.invalid("dataset.days = 0 is out of range: expected >= 1".into()));
        }
        Ok(Scenario {
            days: d.days,
            window_hours: self.window_hours,
            irradiance_scale: d.irradiance_scale,
            process_noise: d.process_noise,
            seed: d.seed,
            ..Scenario::canonical()
        })
    }

    pub fn dataset(&self) -> Result<Dataset> {
        let d = &self.dataset;
        if !(d.irradiance_scale.is_finite() && d.irradiance_scale >= 0.0) {
            return Err(self.invalid(format!(
                "dataset.irradiance_scale = {} is out of range: expected >= 0",
                d.irradiance_scale
            )));
        }
        match d.kind {
            DatasetKind::Synthetic => self.scenario()?.generate().map_err(self.in_section("dataset")),
            DatasetKind::Files => self.file_dataset(),
        }
    }

    fn window_seconds(&self) -> Result<i64> {
        let s = self.window_hours * 3600.0;
        if !(s.is_finite() && s >= 1.0 && s.fract() == 0.0) {
            return Err(self.invalid(format!(
                "window_hours = {} is out of range: expected a positive whole number of seconds",
                self.window_hours
            )));
        }
        Ok(s as i64)
    }

    fn file_dataset(&self) -> Result<Dataset> {
        let d = &self.dataset;
        let (Some(ps), Some(is)) = (&d.process, &d.irradiance) else {
            return Err(self.invalid("dataset.kind = files needs both dataset.process and dataset.irradiance".into()));
        };
        let w = self.window_seconds()?;
        let process = timeseries::read_series(&ps.path, &ps.column_spec())?;
        let irradiance = timeseries::read_series(&is.path, &is.column_spec())?;
        let start = match &d.start {
            Some(s) => timeseries::parse_timestamp(s)
                .ok_or_else(|| self.invalid(format!("dataset.start: invalid timestamp {s:?}")))?,
            None => process.first().expect("nonempty series"),
        };
        let windows = match d.windows {
            Some(n) => n,
            None => {
                let last = process.last().unwrap().min(irradiance.last().unwrap());
                if last < start {
                    return Err(self.invalid("dataset: the files do not overlap after dataset.start".into()));
                }
                ((last - start) / w + 1) as usize
            }
        };
        let grid = WindowGrid {
            start,
            window_seconds: w,
            windows,
        };
        let x = timeseries::resample(&process, &grid, Aggregation::Max)?;
        let g = timeseries::resample(&irradiance, &grid, Aggregation::Mean)?;
        let g = g.into_iter().map(|v| v * d.irradiance_scale).collect();
        Dataset::new(start, self.window_hours, x, g).map_err(self.in_section("dataset"))
    }

    /// Validates every section and loads the data.
    pub fn prepare(&self) -> Result<Prepared> {
        let model = self.node_model()?;
        let mpc = self.mpc_config()?;
        let sim = self.sim_options()?;
        let z_initial = self.initial_soc(&model.battery)?;
        let dataset = self.dataset()?;
        Ok(Prepared {
            model,
            mpc,
            dataset,
            z_initial,
            sim,
        })
    }

    /// Copy with the numeric key `key` (dotted, e.g. `mpc.w_e`) set to
    /// `value`. Setting one of `initial.soe` / `initial.z` clears the other.
    pub fn with_param(&self, key: &str, value: f64) -> Result<Self> {
        let usage = |msg: String| Error::Usage(format!("{msg}; numeric keys: {}", numeric_keys().join(", ")));
        if !numeric_keys().contains(&key) {
            return Err(usage(format!("unknown numeric config key {key:?}")));
        }
        let mut json = serde_json::to_value(self).expect("config serializes");
        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (Some(s), f),
            None => (None, key),
        };
        let number = if value.fract() == 0.0 && value >= 0.0 && value < 2f64.powi(53) {
            serde_json::Value::from(value as u64)
        } else {
            serde_json::Number::from_f64(value)
                .map(serde_json::Value::Number)
                .ok_or_else(|| usage(format!("{key}: value {value} is not finite")))?
        };
        let target = match section {
            Some(s) => json.get_mut(s).and_then(|v| v.as_object_mut()).expect("known section"),
            None => json.as_object_mut().expect("config is an object"),
        };
        if section == Some("initial") {
            target.clear();
        }
        target.insert(field.into(), number);
        let mut out: Self = serde_json::from_value(json).map_err(|e| usage(format!("{key} = {value}: {e}")))?;
        out.source = self.source.clone();
        Ok(out)
    }
}

/// Documented keys: name, default, meaning.
pub fn config_keys() -> Vec<(&'static str, String, &'static str)> {
    let d = RunConfig::default();
    let n = |x: f64| x.to_string();
    vec![
        ("window_hours", n(d.window_hours), "decision window length, hours"),
        ("voi.lambda_c", n(d.voi.lambda_c), "threat decay rate below the critical level"),
        ("voi.x_c", n(d.voi.x_c), "critical process level"),
        ("voi.alpha_r", n(d.voi.alpha_r), "process-fidelity rate"),
        ("voi.alpha_d", n(d.voi.alpha_d), "update-delay decay rate"),
        ("voi.d_o", n(d.voi.d_o), "maximum cost of update delay"),
        ("battery.capacity_ah", n(d.battery.capacity_ah), "cell capacity, Ah"),
        ("battery.z_min", n(d.battery.z_min), "SoC floor below which the node shuts down"),
        ("battery.v_nom", n(d.battery.v_nom), "nominal voltage converting harvested power to current, V"),
        ("battery.ocv_table", "built-in 21-knot Li-ion curve".into(), "CSV with header soc,voltage"),
        ("profile.i_sleep", n(d.profile.i_sleep), "sleep current, A"),
        ("profile.i_sense", n(d.profile.i_sense), "sensing current, A"),
        ("profile.i_transmit", n(d.profile.i_transmit), "transmit current, A"),
        ("profile.d_sense", n(d.profile.d_sense), "seconds per sample"),
        ("profile.d_transmit", n(d.profile.d_transmit), "seconds per transmission"),
        ("harvest.efficiency_eta", n(d.harvest.efficiency_eta), "panel-to-battery efficiency"),
        ("harvest.panel_area", n(d.harvest.panel_area), "panel area, m^2"),
        ("mpc.horizon", d.mpc.horizon.to_string(), "prediction horizon; plans cover horizon + 1 windows"),
        ("mpc.discount", n(d.mpc.discount), "discount rate per window"),
        ("mpc.w_i", n(d.mpc.w_i), "weight of normalized VoI"),
        ("mpc.w_e", n(d.mpc.w_e), "weight of SoE"),
        ("mpc.f_s_max", n(d.mpc.f_s_max), "sampling cap per hour"),
        ("mpc.f_t_max", n(d.mpc.f_t_max), "transmission cap per hour"),
        ("mpc.max_iterations", d.mpc.max_iterations.to_string(), "solver iteration limit"),
        ("mpc.tolerance", n(d.mpc.tolerance), "solver stationarity tolerance"),
        ("initial.soe", "none".into(), "initial State of Energy in [0, 1]; exclusive with initial.z"),
        ("initial.z", "none".into(), "initial SoC in [0, 1]; exclusive with initial.soe"),
        ("dataset.kind", "synthetic".into(), "synthetic or files"),
        ("dataset.irradiance_scale", n(d.dataset.irradiance_scale), "multiplier on every irradiance value"),
        ("dataset.seed", d.dataset.seed.to_string(), "synthetic: noise seed"),
        ("dataset.process_noise", n(d.dataset.process_noise), "synthetic: half-width of uniform level noise"),
        ("dataset.days", d.dataset.days.to_string(), "synthetic: scenario length, days"),
        ("dataset.start", "first process reading".into(), "files: ISO-8601 start of window 0"),
        ("dataset.windows", "all covered windows".into(), "files: window count"),
        ("dataset.process", "none".into(), "files: process-level source (see source keys)"),
        ("dataset.irradiance", "none".into(), "files: irradiance source in W/m^2 (see source keys)"),
        ("<source>.path", "required".into(), "input file"),
        ("<source>.format", "csv".into(), "csv or nasa_power (hourly export)"),
        ("<source>.timestamp_column", "timestamp".into(), "csv: ISO-8601 timestamp column"),
        ("<source>.value_column", "value".into(), "csv: value column"),
        ("<source>.parameter", "ALLSKY_SFC_SW_DWN".into(), "nasa_power: value column"),
        ("<source>.utc_offset_hours", "0".into(), "nasa_power: file time minus UTC, hours"),
        ("sim.restart_hysteresis", n(d.sim.restart_hysteresis), "SoC margin above the floor before a depleted node restarts"),
        ("sim.belief_lookback", d.sim.belief_lookback.to_string(), "windows whose maximum level forms the process belief"),
        ("output.trace", "none".into(), "trace CSV path; --out overrides"),
    ]
}

/// Keys `with_param` accepts.
pub fn numeric_keys() -> Vec<&'static str> {
    config_keys()
        .into_iter()
        .map(|(k, _, _)| k)
        .filter(|k| {
            !k.starts_with('<')
                && !matches!(
                    *k,
                    "battery.ocv_table" | "dataset.kind" | "dataset.start" | "dataset.process" | "dataset.irradiance" | "output.trace"
                )
        })
        .collect()
}

/// Help text listing every key with its default.
pub fn config_help() -> String {
    let keys = config_keys();
    let width = keys.iter().map(|k| k.0.len()).max().unwrap_or(0);
    let mut out = String::from(
        "CONFIG KEYS (JSON; every key optional except one of initial.soe / initial.z; unknown keys are errors;\n\
         <source> is dataset.process or dataset.irradiance; relative paths resolve against the config file)\n",
    );
    for (key, default, meaning) in keys {
        out.push_str(&format!("  {key:width$}  {meaning} [default: {default}]\n"));
    }
    out
}
