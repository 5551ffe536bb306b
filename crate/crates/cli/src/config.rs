use std::fs;
use std::path::{Path, PathBuf};

use lrf_core::eval::{SweepKind, DEFAULT_RADII};
use lrf_core::io::SyntheticSpec;
use lrf_core::lrf::{Dataset, Method};
use lrf_core::nuisance::NuisanceKind;
use serde::Deserialize;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "LRFBENCH_OUT";
pub const DEFAULT_OUT: &str = "lrfbench-out";
pub const DEFAULT_OVERLAP_MIN: f64 = 0.10;
pub const DEFAULT_THRESHOLD_DEG: f64 = 5.0;
pub const DEFAULT_KEYPOINTS: usize = 1000;
pub const DEFAULT_TIMING_KEYPOINTS: usize = 100;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MethodList {
    Preset(String),
    Names(Vec<String>),
}

impl MethodList {
    pub fn resolve(&self) -> Result<Vec<Method>, CliError> {
        let methods = match self {
            MethodList::Preset(s) => Method::parse_list(s)?,
            MethodList::Names(v) => v.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
        };
        if methods.is_empty() {
            return Err(CliError::Config("method list is empty".into()));
        }
        Ok(methods)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SyntheticInput {
    Path(PathBuf),
    Inline(Box<SyntheticSpec>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessEntry {
    pub kind: NuisanceKind,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    pub keypoints: Option<usize>,
    pub min_evaluations: Option<usize>,
}

/// The configuration file. Every field is optional; command-line flags win.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub manifest: Option<PathBuf>,
    pub synthetic: Option<SyntheticInput>,
    /// Number of synthetic pairs; pair `i` uses the spec seed plus `i`.
    pub pairs: Option<usize>,
    pub methods: Option<MethodList>,
    pub dataset: Option<Dataset>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub overlap_min: Option<f64>,
    pub threshold_deg: Option<f64>,
    pub keypoints: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub sweeps: Option<Vec<SweepKind>>,
    pub robustness: Vec<RobustnessEntry>,
    pub timing: TimingSection,
}

impl FileConfig {
    /// Reads a config file, resolving its relative input paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let Some(m) = cfg.manifest.as_mut() {
            fix(m);
        }
        if let Some(SyntheticInput::Path(p)) = cfg.synthetic.as_mut() {
            fix(p);
        }
        if let Some(o) = cfg.out.as_mut() {
            fix(o);
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Manifest(PathBuf),
    Synthetic { spec: SyntheticSpec, pairs: usize },
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Input,
    pub methods: Vec<Method>,
    /// Parameter presets; a manifest's own dataset applies when unset.
    pub dataset: Option<Dataset>,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub overlap_min: f64,
    pub threshold_deg: f64,
    pub keypoints: usize,
    pub radii: Vec<f64>,
    pub sweeps: Vec<SweepKind>,
    pub robustness: Vec<(NuisanceKind, Vec<f64>)>,
    pub timing_keypoints: usize,
    pub min_evaluations: usize,
}

/// Values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub manifest: Option<PathBuf>,
    pub synthetic: Option<PathBuf>,
    pub pairs: Option<usize>,
    pub methods: Option<String>,
    pub dataset: Option<Dataset>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub overlap_min: Option<f64>,
    pub threshold_deg: Option<f64>,
    pub keypoints: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub sweeps: Option<Vec<SweepKind>>,
    pub robustness: Option<Vec<NuisanceKind>>,
    pub timing_keypoints: Option<usize>,
    pub min_evaluations: Option<usize>,
}

pub fn read_synthetic_spec(path: &Path) -> Result<SyntheticSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

impl RunConfig {
    pub fn resolve(file: FileConfig, cli: Overrides, env_out: Option<PathBuf>) -> Result<Self, CliError> {
        let input = match (cli.manifest, cli.synthetic) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either --manifest or --synthetic, not both".into())),
            (Some(m), None) => Input::Manifest(m),
            (None, Some(s)) => Input::Synthetic {
                spec: read_synthetic_spec(&s)?,
                pairs: 0,
            },
            (None, None) => match (file.manifest, file.synthetic) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Config("config sets both `manifest` and `synthetic`".into()))
                }
                (Some(m), None) => Input::Manifest(m),
                (None, Some(SyntheticInput::Path(p))) => Input::Synthetic {
                    spec: read_synthetic_spec(&p)?,
                    pairs: 0,
                },
                (None, Some(SyntheticInput::Inline(s))) => Input::Synthetic { spec: *s, pairs: 0 },
                (None, None) => Input::Synthetic {
                    spec: SyntheticSpec::default(),
                    pairs: 0,
                },
            },
        };
        let input = match input {
            Input::Synthetic { spec, .. } => {
                let pairs = cli.pairs.or(file.pairs).unwrap_or(1);
                if pairs == 0 {
                    return Err(CliError::Config("`pairs` must be at least 1".into()));
                }
                Input::Synthetic { spec, pairs }
            }
            m => m,
        };
        let methods = match cli.methods {
            Some(s) => MethodList::Preset(s).resolve()?,
            None => file.methods.unwrap_or(MethodList::Preset("paper14".into())).resolve()?,
        };
        let robustness = match cli.robustness {
            Some(kinds) => kinds.into_iter().map(|k| (k, k.default_schedule())).collect(),
            None => file
                .robustness
                .into_iter()
                .map(|e| (e.kind, e.levels.unwrap_or_else(|| e.kind.default_schedule())))
                .collect(),
        };
        let cfg = Self {
            input,
            methods,
            dataset: cli.dataset.or(file.dataset),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            out: cli.out.or(file.out).or(env_out).unwrap_or_else(|| DEFAULT_OUT.into()),
            workers: cli.workers.or(file.workers),
            overlap_min: cli.overlap_min.or(file.overlap_min).unwrap_or(DEFAULT_OVERLAP_MIN),
            threshold_deg: cli.threshold_deg.or(file.threshold_deg).unwrap_or(DEFAULT_THRESHOLD_DEG),
            keypoints: cli.keypoints.or(file.keypoints).unwrap_or(DEFAULT_KEYPOINTS),
            radii: cli.radii.or(file.radii).unwrap_or_else(|| DEFAULT_RADII.to_vec()),
            sweeps: cli.sweeps.or(file.sweeps).unwrap_or_else(|| SweepKind::ALL.to_vec()),
            robustness,
            timing_keypoints: cli.timing_keypoints.or(file.timing.keypoints).unwrap_or(DEFAULT_TIMING_KEYPOINTS),
            min_evaluations: cli.min_evaluations.or(file.timing.min_evaluations).unwrap_or(100),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.workers == Some(0) {
            return bad("`workers` must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.overlap_min) {
            return bad(format!("overlap-min {} is outside [0, 1]", self.overlap_min));
        }
        if !(self.threshold_deg > 0.0 && self.threshold_deg <= 180.0) {
            return bad(format!("threshold-deg {} is outside (0, 180]", self.threshold_deg));
        }
        if self.keypoints == 0 || self.timing_keypoints == 0 || self.min_evaluations == 0 {
            return bad("keypoint and evaluation counts must be positive".into());
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad(format!("radii {:?} must be positive", self.radii));
        }
        for (kind, levels) in &self.robustness {
            if levels.is_empty() {
                return bad(format!("{kind}: empty schedule"));
            }
        }
        if let Input::Synthetic { spec, .. } = &self.input {
            spec.validate()?;
        }
        Ok(())
    }
}
