//! The four subcommands. Each returns the files it wrote and the per-item
//! failures it skipped; fatal problems come back as errors.

use std::fs;
use std::path::{Path, PathBuf};

use lrf_core::eval::{
    evaluate_correspondences, prepare_pairs, robustness_schedule, sample_keypoints, surface_resolution,
    sweep_disambiguation, sweep_radius, sweep_weights, sweep_z_dependency, timing_run, write_long_csv,
    write_reports_csv, LongRow, MatrixRow, PreparedPair, RepeatabilityReport, ReportMatrix, RobustnessCurve,
    RobustnessOptions, ScenePair, SweepKind, TimingOptions, TimingRow,
};
use lrf_core::io::{
    generate_synthetic, load_manifest, save_ply, save_pose, DatasetManifest, Geometry, PairEntry, PlyEncoding,
    PoseSource, SyntheticSpec,
};
use lrf_core::lrf::{AxisMethodSpec, Dataset, Method};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{read_synthetic_spec, Input, RunConfig};
use crate::{CliError, Outcome};

pub const TIMING_HEADER: [&str; 4] = ["method", "radius_mr", "median_ns_per_axis", "workload"];

/// Runs `f` on a pool of `cfg.workers` threads, or on the global pool.
pub fn with_workers<F>(cfg: &RunConfig, f: F) -> Result<Outcome, CliError>
where
    F: FnOnce() -> Result<Outcome, CliError> + Send,
{
    match cfg.workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?
            .install(f),
    }
}

struct Pairs {
    pairs: Vec<ScenePair<f64>>,
    dataset: Dataset,
    errors: Vec<String>,
}

fn load_pairs(cfg: &RunConfig) -> Result<Pairs, CliError> {
    match &cfg.input {
        Input::Manifest(path) => {
            let load = load_manifest::<f64>(path, Some(cfg.overlap_min))?;
            for f in &load.filtered {
                log::info!("{f}: overlap below {}", cfg.overlap_min);
            }
            if load.pairs.is_empty() {
                return Err(CliError::Config(format!(
                    "{}: no pair has overlap >= {}",
                    path.display(),
                    cfg.overlap_min
                )));
            }
            Ok(Pairs {
                dataset: cfg.dataset.or(load.dataset).unwrap_or_default(),
                errors: load.errors.iter().map(|(l, e)| format!("{l}: {e}")).collect(),
                pairs: load.pairs,
            })
        }
        Input::Synthetic { spec, pairs } => {
            let pairs = (0..*pairs as u64)
                .into_par_iter()
                .map(|i| {
                    generate_synthetic::<f64>(&SyntheticSpec {
                        seed: spec.seed.wrapping_add(i),
                        ..spec.clone()
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Pairs {
                pairs,
                dataset: cfg.dataset.unwrap_or_default(),
                errors: Vec::new(),
            })
        }
    }
}

fn specs(methods: &[Method], dataset: Dataset) -> Vec<AxisMethodSpec> {
    methods.iter().map(|m| m.preset(dataset)).collect()
}

struct Output<'a> {
    dir: &'a Path,
    outcome: Outcome,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, data_errors: Vec<String>) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        Ok(Self {
            dir,
            outcome: Outcome {
                data_errors,
                written: Vec::new(),
            },
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::write(&path, e))?;
        self.outcome.written.push(path);
        Ok(())
    }

    fn json<S: Serialize + ?Sized>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn csv(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        fill(&mut buf).map_err(|e| CliError::write(self.dir.join(name), std::io::Error::other(e)))?;
        self.write(name, &buf)
    }

    /// Writes `errors.log` when anything failed, and clears a stale one otherwise.
    fn finish(mut self) -> Result<Outcome, CliError> {
        let log = self.dir.join("errors.log");
        if self.outcome.data_errors.is_empty() {
            if log.exists() {
                fs::remove_file(&log).map_err(|e| CliError::write(&log, e))?;
            }
        } else {
            let mut text = self.outcome.data_errors.join("\n");
            text.push('\n');
            self.write("errors.log", text.as_bytes())?;
        }
        Ok(self.outcome)
    }
}

fn clean_reports(
    prepared: &[PreparedPair<'_, f64>],
    specs: &[AxisMethodSpec],
    threshold_deg: f64,
    errors: &mut Vec<String>,
) -> Vec<RepeatabilityReport> {
    let mut reports = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut per = Vec::with_capacity(prepared.len());
        for p in prepared {
            match evaluate_correspondences(p.pair, spec, &p.correspondences, threshold_deg, "clean", false) {
                Ok(r) => per.push(r),
                Err(e) => errors.push(format!("{} on {}: {e}", spec.name(), p.pair.source)),
            }
        }
        if !per.is_empty() {
            reports.push(RepeatabilityReport::aggregate(&spec.name(), "clean", &per));
        }
    }
    reports
}

/// Repeatability table: the clean condition, then every robustness level.
pub fn bench(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Pairs {
        pairs,
        dataset,
        mut errors,
    } = load_pairs(cfg)?;
    let specs = specs(&cfg.methods, dataset);
    let prepared = prepare_pairs(&pairs, cfg.keypoints, cfg.seed)?;
    let mut reports = clean_reports(&prepared, &specs, cfg.threshold_deg, &mut errors);

    let options = RobustnessOptions {
        keypoints: cfg.keypoints,
        threshold_deg: cfg.threshold_deg,
        seed: cfg.seed,
        ..RobustnessOptions::default()
    };
    let mut curves: Vec<RobustnessCurve> = Vec::new();
    for (kind, levels) in &cfg.robustness {
        let kind_curves = match robustness_schedule(&pairs, &specs, *kind, levels, &options) {
            Ok(c) => c,
            Err(e) => {
                errors.push(format!("{kind}: {e}"));
                continue;
            }
        };
        for level in 0..kind_curves.first().map_or(0, |c| c.points.len()) {
            for curve in &kind_curves {
                let point = &curve.points[level];
                if let Some(r) = &point.report {
                    let mut r = r.clone();
                    if kind.is_binning() {
                        r.condition = format!("{kind}:{}", point.label);
                    }
                    reports.push(r);
                }
            }
        }
        curves.extend(kind_curves);
    }

    let mut out = Output::new(&cfg.out, errors)?;
    out.csv("repeatability.csv", |b| write_reports_csv(b, &reports))?;
    out.json("repeatability.json", &reports)?;
    if !cfg.robustness.is_empty() {
        let long: Vec<LongRow> = curves.iter().flat_map(RobustnessCurve::long_rows).collect();
        out.csv("robustness.csv", |b| write_long_csv(b, &long))?;
        out.json("robustness.json", &curves)?;
    }
    out.finish()
}

fn z_columns() -> Vec<String> {
    Method::Z_AXES
        .iter()
        .map(|m| m.short_z_name().unwrap_or(m.name()).to_string())
        .collect()
}

/// One matrix per sweep kind, plus the tidy per-pair observations behind them.
pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Pairs {
        pairs,
        dataset,
        mut errors,
    } = load_pairs(cfg)?;
    let prepared = prepare_pairs(&pairs, cfg.keypoints, cfg.seed)?;
    let thr = cfg.threshold_deg;
    let mut matrices = Vec::with_capacity(cfg.sweeps.len());
    for &kind in &cfg.sweeps {
        let (columns, methods): (Vec<String>, Vec<Method>) = match kind {
            SweepKind::Radius => (ReportMatrix::radius_columns(&cfg.radii), cfg.methods.clone()),
            SweepKind::Weights => (ReportMatrix::weight_columns(), cfg.methods.clone()),
            SweepKind::Disambiguation => (
                ReportMatrix::disambiguation_columns(),
                cfg.methods.iter().copied().filter(|m| m.is_ca()).collect(),
            ),
            SweepKind::ZDependency => (
                z_columns(),
                Method::Z_DEPENDENT.into_iter().filter(|m| cfg.methods.contains(m)).collect(),
            ),
        };
        let z_specs = specs(&Method::Z_AXES, dataset);
        let mut matrix = ReportMatrix::new(kind, columns);
        for spec in specs(&methods, dataset) {
            let row = match kind {
                SweepKind::Radius => sweep_radius(&prepared, &spec, &cfg.radii, thr),
                SweepKind::Weights => sweep_weights(&prepared, &spec, thr),
                SweepKind::Disambiguation => sweep_disambiguation(&prepared, &spec, thr),
                SweepKind::ZDependency => sweep_z_dependency(&prepared, &spec, &z_specs, thr),
            };
            matrix.rows.push(row.unwrap_or_else(|e| {
                errors.push(format!("{kind} sweep of {}: {e}", spec.name()));
                MatrixRow {
                    method: spec.name(),
                    cells: Vec::new(),
                    per_pair: Vec::new(),
                }
            }));
        }
        matrices.push(matrix);
    }

    let mut out = Output::new(&cfg.out, errors)?;
    for m in &matrices {
        out.write(&format!("sweep_{}.csv", m.kind.name()), m.to_csv().as_bytes())?;
    }
    let long: Vec<LongRow> = matrices.iter().flat_map(ReportMatrix::long_rows).collect();
    out.csv("sweep_long.csv", |b| write_long_csv(b, &long))?;
    out.json("sweep.json", &matrices)?;
    out.finish()
}

/// Median ns per axis for every method and radius, on one thread.
pub fn timing(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (surface, mr, dataset, mut errors) = match &cfg.input {
        Input::Synthetic { spec, .. } => {
            let pair = generate_synthetic::<f64>(spec)?;
            (pair.model, pair.mr, cfg.dataset.unwrap_or_default(), Vec::new())
        }
        Input::Manifest(_) => {
            let Pairs {
                mut pairs,
                dataset,
                errors,
            } = load_pairs(cfg)?;
            let pair = pairs.swap_remove(0);
            let mr = surface_resolution(&pair.model).map_err(|e| CliError::Eval(e.into()))?;
            (pair.model, mr, dataset, errors)
        }
    };
    let keys = sample_keypoints(surface.len(), cfg.timing_keypoints, cfg.seed)?;
    let keypoints: Vec<_> = keys.iter().map(|&i| surface.points()[i]).collect();
    let options = TimingOptions {
        min_evaluations: cfg.min_evaluations,
    };
    let mut rows: Vec<TimingRow> = Vec::new();
    for spec in specs(&cfg.methods, dataset) {
        match timing_run(std::slice::from_ref(&spec), &surface, &keypoints, &cfg.radii, mr, &options) {
            Ok(r) => rows.extend(r),
            Err(e) => errors.push(format!("timing of {}: {e}", spec.name())),
        }
    }
    let mut out = Output::new(&cfg.out, errors)?;
    out.csv("timing.csv", |b| write_timing_csv(b, &rows))?;
    out.json("timing.json", &rows)?;
    out.finish()
}

pub fn write_timing_csv<W: std::io::Write>(w: W, rows: &[TimingRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    w.write_record(TIMING_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            format!("{}", r.radius_mr),
            format!("{:.1}", r.median_ns_per_axis),
            r.workload.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>_model.ply`, `<name>_scene.ply`, `<name>_gt.txt` and a
/// one-pair manifest `<name>.toml`, and prints its stanza.
pub fn synth(spec_path: &Path, out: &Path, seed: Option<u64>, name: &str) -> Result<Outcome, CliError> {
    let mut spec = read_synthetic_spec(spec_path)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::Config(format!("invalid pair name `{name}`")));
    }
    let pair = generate_synthetic::<f64>(&spec)?;
    let mut o = Output::new(out, Vec::new())?;
    let files = [
        format!("{name}_model.ply"),
        format!("{name}_scene.ply"),
        format!("{name}_gt.txt"),
    ];
    for (file, surface) in files.iter().zip([&pair.model, &pair.scene]) {
        let mesh = surface.mesh().expect("synthetic surfaces are meshes").clone();
        let path = out.join(file);
        save_ply(&path, &Geometry::Mesh(mesh), PlyEncoding::BinaryLittleEndian)?;
        o.outcome.written.push(path);
    }
    let gt_path = out.join(&files[2]);
    save_pose(&gt_path, &pair.gt)?;
    o.outcome.written.push(gt_path);

    let entry = PairEntry::new(&files[0], &files[1], PoseSource::File(PathBuf::from(&files[2])));
    let manifest = DatasetManifest {
        name: name.to_string(),
        dataset: None,
        unit_scale: 1.0,
        pose_unit_scale: 1.0,
        transpose_poses: false,
        format: None,
        pairs: vec![entry.clone()],
        base_dir: PathBuf::new(),
    };
    o.write(&format!("{name}.toml"), manifest.to_toml().as_bytes())?;
    print!("{}", entry.to_toml_stanza());
    o.finish()
}
