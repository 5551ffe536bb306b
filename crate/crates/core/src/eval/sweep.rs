use serde::{Deserialize, Serialize};

use crate::eval::{evaluate_correspondences, EvalError, PreparedPair, RepeatabilityReport};
use crate::lrf::{AxisMethodSpec, Disambiguation, WeightScheme};
use crate::Real;

/// Default support radii of the radius sweep, in mr.
pub const DEFAULT_RADII: [f64; 6] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Radius,
    Weights,
    Disambiguation,
    ZDependency,
}

impl SweepKind {
    pub const ALL: [SweepKind; 4] = [SweepKind::Radius, SweepKind::Weights, SweepKind::Disambiguation, SweepKind::ZDependency];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Radius => "radius",
            SweepKind::Weights => "weights",
            SweepKind::Disambiguation => "disambiguation",
            SweepKind::ZDependency => "z_dependency",
        }
    }

    /// Header of the first column of the matrix file.
    pub fn row_header(self) -> &'static str {
        match self {
            SweepKind::ZDependency => "x_method",
            _ => "method",
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().replace('-', "_");
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == t)
            .ok_or_else(|| EvalError::Schedule(format!("unknown sweep kind `{}`", s.trim())))
    }
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One method's row: a column label and the pair-aggregated report per cell,
/// plus the per-pair reports behind each cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub method: String,
    pub cells: Vec<(String, RepeatabilityReport)>,
    pub per_pair: Vec<(String, Vec<RepeatabilityReport>)>,
}

impl MatrixRow {
    pub fn cell(&self, column: &str) -> Option<&RepeatabilityReport> {
        self.cells.iter().find(|(c, _)| c == column).map(|(_, r)| r)
    }
}

/// Rows of one sweep over fixed columns; cells a method does not admit stay empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMatrix {
    pub kind: SweepKind,
    pub columns: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

impl ReportMatrix {
    pub fn new(kind: SweepKind, columns: Vec<String>) -> Self {
        Self {
            kind,
            columns,
            rows: Vec::new(),
        }
    }

    /// Columns of the weight table: every weight scheme in canonical order.
    pub fn weight_columns() -> Vec<String> {
        WeightScheme::ALL.iter().map(|w| w.label().to_string()).collect()
    }

    pub fn radius_columns(radii: &[f64]) -> Vec<String> {
        radii.iter().map(|r| format!("{r}")).collect()
    }

    pub fn disambiguation_columns() -> Vec<String> {
        vec!["p".into(), "n".into()]
    }

    /// Mean repeatability per cell, `None` where the method has no such column.
    pub fn values(&self) -> Vec<(String, Vec<Option<f64>>)> {
        self.rows
            .iter()
            .map(|r| {
                let v = self
                    .columns
                    .iter()
                    .map(|c| r.cell(c).map(|rep| rep.repeatability_pct))
                    .collect();
                (r.method.clone(), v)
            })
            .collect()
    }

    /// CSV text: the header row, then one row per method with blank inadmissible cells.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec![self.kind.row_header().to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (method, vals) in self.values() {
            let mut rec = vec![method];
            rec.extend(vals.into_iter().map(|v| v.map(format_pct).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
    }
}

pub(crate) fn format_pct(v: f64) -> String {
    format!("{v:.4}")
}

fn run_cell<T: Real>(
    pairs: &[PreparedPair<'_, T>],
    spec: &AxisMethodSpec,
    column: &str,
    threshold_deg: f64,
) -> Result<(RepeatabilityReport, Vec<RepeatabilityReport>), EvalError> {
    let per_pair = pairs
        .iter()
        .map(|p| {
            let mut r = evaluate_correspondences(p.pair, spec, &p.correspondences, threshold_deg, column, false)?;
            r.condition = format!("{}={column}", p.pair.source);
            Ok(r)
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let agg = RepeatabilityReport::aggregate(&spec.name(), column, &per_pair);
    Ok((agg, per_pair))
}

fn run_row<T: Real>(
    pairs: &[PreparedPair<'_, T>],
    method: String,
    cells: Vec<(String, AxisMethodSpec)>,
    threshold_deg: f64,
) -> Result<MatrixRow, EvalError> {
    let mut row = MatrixRow {
        method,
        cells: Vec::new(),
        per_pair: Vec::new(),
    };
    for (label, spec) in cells {
        let (agg, per) = run_cell(pairs, &spec, &label, threshold_deg)?;
        row.cells.push((label.clone(), agg));
        row.per_pair.push((label, per));
    }
    Ok(row)
}

/// Repeatability of `spec` at each radius (in mr).
pub fn sweep_radius<T: Real>(
    pairs: &[PreparedPair<'_, T>],
    spec: &AxisMethodSpec,
    radii: &[f64],
    threshold_deg: f64,
) -> Result<MatrixRow, EvalError> {
    if radii.is_empty() {
        return Err(EvalError::Schedule("radius sweep needs at least one radius".into()));
    }
    let cells = ReportMatrix::radius_columns(radii)
        .into_iter()
        .zip(radii)
        .map(|(l, &r)| Ok((l, spec.clone().with_radius(r)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    run_row(pairs, spec.name(), cells, threshold_deg)
}

/// Repeatability of `spec` under each weight scheme its direction admits.
pub fn sweep_weights<T: Real>(pairs: &[PreparedPair<'_, T>], spec: &AxisMethodSpec, threshold_deg: f64) -> Result<MatrixRow, EvalError> {
    let cells = spec
        .direction
        .admissible_weights()
        .iter()
        .map(|&w| Ok((w.label().to_string(), spec.clone().with_weight(w)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    run_row(pairs, spec.name(), cells, threshold_deg)
}

/// Points-mean versus normal-mean sign disambiguation.
pub fn sweep_disambiguation<T: Real>(
    pairs: &[PreparedPair<'_, T>],
    spec: &AxisMethodSpec,
    threshold_deg: f64,
) -> Result<MatrixRow, EvalError> {
    if spec.direction.is_ga() {
        return Err(EvalError::NotDisambiguable(spec.name()));
    }
    let cells = [Disambiguation::PointsMean, Disambiguation::NormalMean]
        .into_iter()
        .map(|d| Ok((d.label().to_string(), spec.clone().with_disambiguation(d)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    run_row(pairs, spec.name(), cells, threshold_deg)
}

/// A z-dependent x-axis fed by each of `z_specs`; columns are labeled by the
/// short z-method name (`P-k`, `sP-b`, ...).
pub fn sweep_z_dependency<T: Real>(
    pairs: &[PreparedPair<'_, T>],
    x_spec: &AxisMethodSpec,
    z_specs: &[AxisMethodSpec],
    threshold_deg: f64,
) -> Result<MatrixRow, EvalError> {
    if !x_spec.direction.needs_z() {
        return Err(EvalError::NotZDependent(x_spec.name()));
    }
    let cells = z_specs
        .iter()
        .map(|z| {
            let label = z.method().short_z_name().unwrap_or(z.direction.label()).to_string();
            Ok((label, x_spec.clone().with_z_dependency(z.clone())?))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    run_row(pairs, x_spec.name(), cells, threshold_deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{prepare_pairs, ScenePair};
    use crate::geom::{apply_transform, RigidTransform};
    use crate::lrf::{Dataset, Method, Surface};
    use crate::shapes::{bumpy_field, BumpPattern};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pairs() -> Vec<ScenePair<f64>> {
        (0..2)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pattern = BumpPattern::random(&mut rng, 3.0, 0.15);
                let m = bumpy_field::<f64, _>(&mut rng, 30, 1.0, 0.2, &pattern);
                let gt = RigidTransform::random(&mut rng, 10.0);
                let s = apply_transform(&m, &gt);
                ScenePair::new(format!("p{seed}"), Surface::from_mesh(m), Surface::from_mesh(s), gt).unwrap()
            })
            .collect()
    }

    #[test]
    fn weight_columns_follow_admissible_sets() {
        let ps = pairs();
        let prep = prepare_pairs(&ps, 30, 1).unwrap();
        let spec = Method::CaPBZ.preset(Dataset::B3R).with_radius(5.0).unwrap();
        let row = sweep_weights(&prep, &spec, 5.0).unwrap();
        assert_eq!(row.cells.iter().map(|c| c.0.as_str()).collect::<Vec<_>>(), ["w0", "wr"]);
        let spec = Method::CaMKZ.preset(Dataset::B3R).with_radius(5.0).unwrap();
        let row = sweep_weights(&prep, &spec, 5.0).unwrap();
        assert_eq!(row.cells.iter().map(|c| c.0.as_str()).collect::<Vec<_>>(), ["w0", "wr", "wa", "wr*wa"]);
        for (_, r) in &row.cells {
            assert!(r.repeatability_excluding_degenerate() >= 99.0);
        }
        let mut m = ReportMatrix::new(SweepKind::Weights, ReportMatrix::weight_columns());
        m.rows.push(row);
        let csv = m.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "method,w0,wr,wa,wh,wr*wa,wr*wh");
        let line = csv.lines().nth(1).unwrap();
        assert!(line.starts_with("CA-M-k(z),"));
        assert_eq!(line.split(',').filter(|c| c.is_empty()).count(), 2);
    }

    #[test]
    fn w0_cell_equals_direct_unweighted_run() {
        let ps = pairs();
        let prep = prepare_pairs(&ps, 25, 2).unwrap();
        let spec = Method::CaPKZ.preset(Dataset::B3R).with_radius(5.0).unwrap();
        let row = sweep_weights(&prep, &spec, 5.0).unwrap();
        let w0 = spec.clone().with_weight(WeightScheme::W0).unwrap();
        let direct = evaluate_correspondences(prep[0].pair, &w0, &prep[0].correspondences, 5.0, "x", false).unwrap();
        let swept = &row.per_pair[0].1[0];
        assert_eq!((swept.repeatable, swept.degenerate, swept.mean_angle_deg), (direct.repeatable, direct.degenerate, direct.mean_angle_deg));
    }

    #[test]
    fn single_radius_equals_direct_aggregate() {
        let ps = pairs();
        let prep = prepare_pairs(&ps, 20, 3).unwrap();
        let spec = Method::GaMHX.preset(Dataset::B3R);
        let row = sweep_radius(&prep, &spec, &[6.0], 5.0).unwrap();
        let direct: Vec<_> = prep
            .iter()
            .map(|p| evaluate_correspondences(p.pair, &spec.clone().with_radius(6.0).unwrap(), &p.correspondences, 5.0, "6", false).unwrap())
            .collect();
        let agg = RepeatabilityReport::aggregate(&spec.name(), "6", &direct);
        assert_eq!(row.cells[0].1.repeatability_pct, agg.repeatability_pct);
        assert!(sweep_radius(&prep, &spec, &[], 5.0).is_err());
    }

    #[test]
    fn disambiguation_and_z_dependency_guards() {
        let ps = pairs();
        let prep = prepare_pairs(&ps, 10, 4).unwrap();
        assert_eq!(
            sweep_disambiguation(&prep, &Method::GaMHX.preset(Dataset::B3R), 5.0),
            Err(EvalError::NotDisambiguable("GA-mH(x)".into()))
        );
        assert_eq!(
            sweep_z_dependency(&prep, &Method::CaPKX.preset(Dataset::B3R), &[], 5.0),
            Err(EvalError::NotZDependent("CA-P-k(x)".into()))
        );
        let row = sweep_disambiguation(&prep, &Method::CaPBZ.preset(Dataset::B3R).with_radius(5.0).unwrap(), 5.0).unwrap();
        for (_, r) in &row.cells {
            assert!(r.repeatability_excluding_degenerate() >= 99.0);
        }
        let zs: Vec<_> = Method::Z_AXES.iter().map(|m| m.preset(Dataset::B3R).with_radius(5.0).unwrap()).collect();
        let row = sweep_z_dependency(&prep, &Method::GaMAX.preset(Dataset::B3R).with_radius(5.0).unwrap(), &zs, 5.0).unwrap();
        assert_eq!(
            row.cells.iter().map(|c| c.0.as_str()).collect::<Vec<_>>(),
            ["P-k", "P-b", "sP-k", "sP-b", "M-k", "M-b"]
        );
    }
}
