use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `r = R/3` for the small-region methods.
pub const SMALL_RADIUS_FRACTION: f64 = 1.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SpecError {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("unknown weight scheme `{0}`")]
    UnknownWeight(String),
    #[error("unknown disambiguation rule `{0}`")]
    UnknownDisambiguation(String),
    #[error("weight {weight} is not available for {direction}")]
    InadmissibleWeight { direction: Direction, weight: WeightScheme },
    #[error("{direction} {reason}")]
    Disambiguation { direction: Direction, reason: &'static str },
    #[error("{0} only builds z-axes")]
    ZOnly(Direction),
    #[error("{0} only builds x-axes")]
    XOnly(Direction),
    #[error("{direction} {reason}")]
    ZDependency { direction: Direction, reason: &'static str },
    #[error("support radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("{0} is not a CA-based method and has no disambiguation choice")]
    NotDisambiguable(String),
    #[error("{0} does not depend on a z-axis")]
    NotZDependent(String),
}

/// How the raw axis direction is constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "CA-P-k")]
    CaPK,
    #[serde(rename = "CA-P-b")]
    CaPB,
    #[serde(rename = "CA-sP-k")]
    CaSPK,
    #[serde(rename = "CA-sP-b")]
    CaSPB,
    #[serde(rename = "CA-M-k")]
    CaMK,
    #[serde(rename = "CA-M-b")]
    CaMB,
    #[serde(rename = "CA-pP-k")]
    CaPPK,
    #[serde(rename = "GA-mpP")]
    GaMpP,
    #[serde(rename = "GA-mA")]
    GaMA,
    #[serde(rename = "GA-mH")]
    GaMH,
}

impl Direction {
    pub const ALL: [Direction; 10] = [
        Direction::CaPK,
        Direction::CaPB,
        Direction::CaSPK,
        Direction::CaSPB,
        Direction::CaMK,
        Direction::CaMB,
        Direction::CaPPK,
        Direction::GaMpP,
        Direction::GaMA,
        Direction::GaMH,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Direction::CaPK => "CA-P-k",
            Direction::CaPB => "CA-P-b",
            Direction::CaSPK => "CA-sP-k",
            Direction::CaSPB => "CA-sP-b",
            Direction::CaMK => "CA-M-k",
            Direction::CaMB => "CA-M-b",
            Direction::CaPPK => "CA-pP-k",
            Direction::GaMpP => "GA-mpP",
            Direction::GaMA => "GA-mA",
            Direction::GaMH => "GA-mH",
        }
    }

    pub fn is_ga(self) -> bool {
        matches!(self, Direction::GaMpP | Direction::GaMA | Direction::GaMH)
    }

    pub fn is_mesh(self) -> bool {
        matches!(self, Direction::CaMK | Direction::CaMB)
    }

    /// Uses the small radius `R/3`.
    pub fn is_small(self) -> bool {
        matches!(self, Direction::CaSPK | Direction::CaSPB)
    }

    /// Covariance is centered on the neighborhood barycenter rather than the keypoint.
    pub fn is_barycentric(self) -> bool {
        matches!(self, Direction::CaPB | Direction::CaSPB | Direction::CaMB)
    }

    /// Needs a z-axis before the x-axis can be built.
    pub fn needs_z(self) -> bool {
        matches!(
            self,
            Direction::CaPPK | Direction::GaMpP | Direction::GaMA | Direction::GaMH
        )
    }

    pub fn admissible_weights(self) -> &'static [WeightScheme] {
        use WeightScheme::*;
        match self {
            Direction::CaPK | Direction::CaPB | Direction::CaSPK | Direction::CaSPB => &[W0, Wr],
            Direction::CaMK | Direction::CaMB => &[W0, Wr, Wa, WrWa],
            Direction::CaPPK | Direction::GaMpP => &[W0, Wr, Wh, WrWh],
            Direction::GaMA | Direction::GaMH => &[W0],
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxisKind {
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "x")]
    X,
}

impl AxisKind {
    pub fn label(self) -> &'static str {
        match self {
            AxisKind::Z => "z",
            AxisKind::X => "x",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeightScheme {
    #[serde(rename = "w0")]
    W0,
    #[serde(rename = "wr")]
    Wr,
    #[serde(rename = "wa")]
    Wa,
    #[serde(rename = "wh")]
    Wh,
    #[serde(rename = "wr*wa")]
    WrWa,
    #[serde(rename = "wr*wh")]
    WrWh,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 6] = [
        WeightScheme::W0,
        WeightScheme::Wr,
        WeightScheme::Wa,
        WeightScheme::Wh,
        WeightScheme::WrWa,
        WeightScheme::WrWh,
    ];

    pub fn label(self) -> &'static str {
        match self {
            WeightScheme::W0 => "w0",
            WeightScheme::Wr => "wr",
            WeightScheme::Wa => "wa",
            WeightScheme::Wh => "wh",
            WeightScheme::WrWa => "wr*wa",
            WeightScheme::WrWh => "wr*wh",
        }
    }

    pub fn radial(self) -> bool {
        matches!(self, WeightScheme::Wr | WeightScheme::WrWa | WeightScheme::WrWh)
    }

    pub fn area(self) -> bool {
        matches!(self, WeightScheme::Wa | WeightScheme::WrWa)
    }

    pub fn height(self) -> bool {
        matches!(self, WeightScheme::Wh | WeightScheme::WrWh)
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for WeightScheme {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if matches!(c, '·' | '.' | '×') { '*' } else { c })
            .filter(|c| *c != '_' && *c != ' ')
            .collect();
        match norm.as_str() {
            "w0" => Ok(WeightScheme::W0),
            "wr" => Ok(WeightScheme::Wr),
            "wa" => Ok(WeightScheme::Wa),
            "wh" => Ok(WeightScheme::Wh),
            "wr*wa" | "wrwa" => Ok(WeightScheme::WrWa),
            "wr*wh" | "wrwh" => Ok(WeightScheme::WrWh),
            _ => Err(SpecError::UnknownWeight(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Disambiguation {
    #[serde(rename = "points-mean")]
    PointsMean,
    #[serde(rename = "normal-mean")]
    NormalMean,
    #[serde(rename = "none")]
    None,
}

impl Disambiguation {
    /// Short column label: `p`, `n` or `none`.
    pub fn label(self) -> &'static str {
        match self {
            Disambiguation::PointsMean => "p",
            Disambiguation::NormalMean => "n",
            Disambiguation::None => "none",
        }
    }
}

impl FromStr for Disambiguation {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p" | "points-mean" | "points_mean" => Ok(Disambiguation::PointsMean),
            "n" | "normal-mean" | "normal_mean" => Ok(Disambiguation::NormalMean),
            "none" => Ok(Disambiguation::None),
            _ => Err(SpecError::UnknownDisambiguation(s.to_string())),
        }
    }
}

/// A fully specified axis recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisMethodSpec {
    pub direction: Direction,
    pub axis_kind: AxisKind,
    pub weight: WeightScheme,
    pub disambiguation: Disambiguation,
    /// Support radius `R` in multiples of the mesh resolution.
    pub support_radius_mr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_dependency: Option<Box<AxisMethodSpec>>,
}

impl AxisMethodSpec {
    pub fn new(
        direction: Direction,
        axis_kind: AxisKind,
        weight: WeightScheme,
        disambiguation: Disambiguation,
        support_radius_mr: f64,
        z_dependency: Option<AxisMethodSpec>,
    ) -> Result<Self, SpecError> {
        let spec = Self {
            direction,
            axis_kind,
            weight,
            disambiguation,
            support_radius_mr,
            z_dependency: z_dependency.map(Box::new),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let d = self.direction;
        if !(self.support_radius_mr > 0.0 && self.support_radius_mr.is_finite()) {
            return Err(SpecError::InvalidRadius(self.support_radius_mr));
        }
        if !d.admissible_weights().contains(&self.weight) {
            return Err(SpecError::InadmissibleWeight {
                direction: d,
                weight: self.weight,
            });
        }
        match (d.is_ga(), self.disambiguation) {
            (true, Disambiguation::None) | (false, Disambiguation::PointsMean | Disambiguation::NormalMean) => {}
            (true, _) => {
                return Err(SpecError::Disambiguation {
                    direction: d,
                    reason: "is GA-based and takes no disambiguation",
                })
            }
            (false, Disambiguation::None) => {
                return Err(SpecError::Disambiguation {
                    direction: d,
                    reason: "is CA-based and needs a disambiguation rule",
                })
            }
        }
        if d.is_small() && self.axis_kind != AxisKind::Z {
            return Err(SpecError::ZOnly(d));
        }
        if (d.needs_z() || d.is_ga()) && self.axis_kind != AxisKind::X {
            return Err(SpecError::XOnly(d));
        }
        match (&self.z_dependency, d.needs_z()) {
            (Some(z), true) => {
                if z.axis_kind != AxisKind::Z {
                    return Err(SpecError::ZDependency {
                        direction: d,
                        reason: "depends on a spec that does not build a z-axis",
                    });
                }
                z.validate()?;
            }
            (None, false) => {}
            (None, true) => {
                return Err(SpecError::ZDependency {
                    direction: d,
                    reason: "needs a z-axis dependency",
                })
            }
            (Some(_), false) => {
                return Err(SpecError::ZDependency {
                    direction: d,
                    reason: "does not take a z-axis dependency",
                })
            }
        }
        Ok(())
    }

    /// Canonical name such as `CA-M-b(z)`.
    pub fn name(&self) -> String {
        format!("{}({})", self.direction.label(), self.axis_kind.label())
    }

    /// The registry entry with this direction and axis kind.
    pub fn method(&self) -> Method {
        Method::from_parts(self.direction, self.axis_kind).expect("validated spec names a registry method")
    }

    pub fn with_weight(mut self, weight: WeightScheme) -> Result<Self, SpecError> {
        self.weight = weight;
        self.validate()?;
        Ok(self)
    }

    pub fn with_radius(mut self, support_radius_mr: f64) -> Result<Self, SpecError> {
        self.support_radius_mr = support_radius_mr;
        self.validate()?;
        Ok(self)
    }

    pub fn with_disambiguation(mut self, rule: Disambiguation) -> Result<Self, SpecError> {
        if self.direction.is_ga() {
            return Err(SpecError::NotDisambiguable(self.name()));
        }
        self.disambiguation = rule;
        self.validate()?;
        Ok(self)
    }

    pub fn with_z_dependency(mut self, z: AxisMethodSpec) -> Result<Self, SpecError> {
        if !self.direction.needs_z() {
            return Err(SpecError::NotZDependent(self.name()));
        }
        self.z_dependency = Some(Box::new(z));
        self.validate()?;
        Ok(self)
    }
}

/// The fourteen registered axis methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    CaPKZ,
    CaPBZ,
    CaSPKZ,
    CaSPBZ,
    CaMKZ,
    CaMBZ,
    CaPKX,
    CaPBX,
    CaPPKX,
    CaMKX,
    CaMBX,
    GaMpPX,
    GaMAX,
    GaMHX,
}

impl Method {
    pub const ALL: [Method; 14] = [
        Method::CaPKZ,
        Method::CaPBZ,
        Method::CaSPKZ,
        Method::CaSPBZ,
        Method::CaMKZ,
        Method::CaMBZ,
        Method::CaPKX,
        Method::CaPBX,
        Method::CaPPKX,
        Method::CaMKX,
        Method::CaMBX,
        Method::GaMpPX,
        Method::GaMAX,
        Method::GaMHX,
    ];

    /// The six z-axis methods, in registry order.
    pub const Z_AXES: [Method; 6] = [
        Method::CaPKZ,
        Method::CaPBZ,
        Method::CaSPKZ,
        Method::CaSPBZ,
        Method::CaMKZ,
        Method::CaMBZ,
    ];

    /// x-axis methods that consume a z-axis.
    pub const Z_DEPENDENT: [Method; 4] = [Method::CaPPKX, Method::GaMpPX, Method::GaMAX, Method::GaMHX];

    pub fn parts(self) -> (Direction, AxisKind) {
        use AxisKind::{X, Z};
        match self {
            Method::CaPKZ => (Direction::CaPK, Z),
            Method::CaPBZ => (Direction::CaPB, Z),
            Method::CaSPKZ => (Direction::CaSPK, Z),
            Method::CaSPBZ => (Direction::CaSPB, Z),
            Method::CaMKZ => (Direction::CaMK, Z),
            Method::CaMBZ => (Direction::CaMB, Z),
            Method::CaPKX => (Direction::CaPK, X),
            Method::CaPBX => (Direction::CaPB, X),
            Method::CaPPKX => (Direction::CaPPK, X),
            Method::CaMKX => (Direction::CaMK, X),
            Method::CaMBX => (Direction::CaMB, X),
            Method::GaMpPX => (Direction::GaMpP, X),
            Method::GaMAX => (Direction::GaMA, X),
            Method::GaMHX => (Direction::GaMH, X),
        }
    }

    pub fn from_parts(direction: Direction, kind: AxisKind) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.parts() == (direction, kind))
    }

    pub fn direction(self) -> Direction {
        self.parts().0
    }

    pub fn axis_kind(self) -> AxisKind {
        self.parts().1
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::CaPKZ => "CA-P-k(z)",
            Method::CaPBZ => "CA-P-b(z)",
            Method::CaSPKZ => "CA-sP-k(z)",
            Method::CaSPBZ => "CA-sP-b(z)",
            Method::CaMKZ => "CA-M-k(z)",
            Method::CaMBZ => "CA-M-b(z)",
            Method::CaPKX => "CA-P-k(x)",
            Method::CaPBX => "CA-P-b(x)",
            Method::CaPPKX => "CA-pP-k(x)",
            Method::CaMKX => "CA-M-k(x)",
            Method::CaMBX => "CA-M-b(x)",
            Method::GaMpPX => "GA-mpP(x)",
            Method::GaMAX => "GA-mA(x)",
            Method::GaMHX => "GA-mH(x)",
        }
    }

    /// z-axis name without the `CA-` prefix and `(z)` suffix, e.g. `sP-b`.
    pub fn short_z_name(self) -> Option<&'static str> {
        (self.axis_kind() == AxisKind::Z).then(|| {
            let n = self.name();
            &n[3..n.len() - 3]
        })
    }

    pub fn is_ca(self) -> bool {
        !self.direction().is_ga()
    }

    /// The method configured with the per-dataset radius, weight, normal-mean
    /// disambiguation and z-axis dependency.
    pub fn preset(self, dataset: Dataset) -> AxisMethodSpec {
        let (direction, axis_kind) = self.parts();
        let disambiguation = if direction.is_ga() {
            Disambiguation::None
        } else {
            Disambiguation::NormalMean
        };
        let z_dependency = direction
            .needs_z()
            .then(|| Box::new(dataset.z_method_for_x().preset(dataset)));
        let spec = AxisMethodSpec {
            direction,
            axis_kind,
            weight: self.preset_weight(),
            disambiguation,
            support_radius_mr: dataset.radius_mr(self),
            z_dependency,
        };
        debug_assert_eq!(spec.validate(), Ok(()));
        spec
    }

    /// Best-performing weight per method.
    pub fn preset_weight(self) -> WeightScheme {
        use WeightScheme::*;
        match self {
            Method::CaPKZ => Wr,
            Method::CaPBZ => W0,
            Method::CaSPKZ => Wr,
            Method::CaSPBZ => W0,
            Method::CaMKZ => WrWa,
            Method::CaMBZ => Wa,
            Method::CaPKX => W0,
            Method::CaPBX => W0,
            Method::CaPPKX => WrWh,
            Method::CaMKX => WrWa,
            Method::CaMBX => Wa,
            Method::GaMpPX => WrWh,
            Method::GaMAX | Method::GaMHX => W0,
        }
    }

    /// Resolves a comma-separated list of names, or the preset list `paper14`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>, SpecError> {
        if s.trim().eq_ignore_ascii_case("paper14") || s.trim().eq_ignore_ascii_case("all") {
            return Ok(Method::ALL.to_vec());
        }
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| SpecError::UnknownMethod(t.to_string()))
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-dataset parameter presets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dataset {
    #[default]
    B3R,
    U3M,
    U3OR,
    QuLD,
    K3R,
    S3R,
}

impl Dataset {
    pub const ALL: [Dataset; 6] = [
        Dataset::B3R,
        Dataset::U3M,
        Dataset::U3OR,
        Dataset::QuLD,
        Dataset::K3R,
        Dataset::S3R,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::B3R => "B3R",
            Dataset::U3M => "U3M",
            Dataset::U3OR => "U3OR",
            Dataset::QuLD => "QuLD",
            Dataset::K3R => "K3R",
            Dataset::S3R => "S3R",
        }
    }

    /// Support radius in mr.
    pub fn radius_mr(self, method: Method) -> f64 {
        // Columns: B3R, U3M, U3OR, QuLD, K3R, S3R.
        let row: [f64; 6] = match method {
            Method::CaPKZ => [20.0, 10.0, 10.0, 20.0, 20.0, 20.0],
            Method::CaPBZ => [20.0, 10.0, 10.0, 15.0, 20.0, 15.0],
            Method::CaSPKZ => [20.0, 15.0, 10.0, 20.0, 20.0, 20.0],
            Method::CaSPBZ => [20.0, 15.0, 15.0, 20.0, 20.0, 20.0],
            Method::CaMKZ => [20.0, 10.0, 5.0, 15.0, 20.0, 20.0],
            Method::CaMBZ => [20.0, 5.0, 5.0, 15.0, 20.0, 15.0],
            Method::CaPPKX | Method::GaMpPX => [20.0, 15.0, 15.0, 20.0, 20.0, 20.0],
            Method::CaPKX | Method::CaPBX | Method::CaMKX | Method::CaMBX | Method::GaMAX | Method::GaMHX => {
                [20.0; 6]
            }
        };
        row[self as usize]
    }

    /// The z-axis method feeding z-dependent x-axes.
    pub fn z_method_for_x(self) -> Method {
        match self {
            Dataset::B3R | Dataset::S3R => Method::CaPBZ,
            _ => Method::CaMBZ,
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dataset::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SpecError::UnknownDataset(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            let spec = m.preset(Dataset::B3R);
            assert_eq!(spec.name(), m.name());
            assert_eq!(spec.method(), m);
        }
        assert!(matches!("CA-X-y(z)".parse::<Method>(), Err(SpecError::UnknownMethod(_))));
    }

    #[test]
    fn all_presets_validate() {
        for d in Dataset::ALL {
            for m in Method::ALL {
                assert_eq!(m.preset(d).validate(), Ok(()), "{m} on {d}");
            }
        }
    }

    #[test]
    fn table_invariants_enforced() {
        let base = Method::CaPBZ.preset(Dataset::B3R);
        assert!(matches!(
            base.clone().with_weight(WeightScheme::Wa),
            Err(SpecError::InadmissibleWeight { .. })
        ));
        assert!(base.clone().with_weight(WeightScheme::Wh).is_err());
        let mut sp = Method::CaSPKZ.preset(Dataset::B3R);
        sp.axis_kind = AxisKind::X;
        assert_eq!(sp.validate(), Err(SpecError::ZOnly(Direction::CaSPK)));
        let mut ga = Method::GaMHX.preset(Dataset::B3R);
        ga.disambiguation = Disambiguation::NormalMean;
        assert!(ga.validate().is_err());
        let mut ga = Method::GaMHX.preset(Dataset::B3R);
        ga.z_dependency = None;
        assert!(ga.validate().is_err());
        assert!(matches!(
            base.with_z_dependency(Method::CaMBZ.preset(Dataset::B3R)),
            Err(SpecError::NotZDependent(_))
        ));
        assert!(matches!(
            Method::GaMHX.preset(Dataset::B3R).with_disambiguation(Disambiguation::PointsMean),
            Err(SpecError::NotDisambiguable(_))
        ));
    }

    #[test]
    fn weight_labels_parse() {
        for w in WeightScheme::ALL {
            assert_eq!(w.label().parse::<WeightScheme>().unwrap(), w);
        }
        assert_eq!("wr·wa".parse::<WeightScheme>().unwrap(), WeightScheme::WrWa);
    }

    #[test]
    fn preset_z_dependency_by_dataset() {
        let z = |d| Method::GaMHX.preset(d).z_dependency.unwrap().method();
        assert_eq!(z(Dataset::B3R), Method::CaPBZ);
        assert_eq!(z(Dataset::S3R), Method::CaPBZ);
        assert_eq!(z(Dataset::U3M), Method::CaMBZ);
        assert_eq!(Dataset::U3OR.radius_mr(Method::CaMBZ), 5.0);
    }

    #[test]
    fn short_z_names() {
        let names: Vec<_> = Method::Z_AXES.iter().map(|m| m.short_z_name().unwrap()).collect();
        assert_eq!(names, ["P-k", "P-b", "sP-k", "sP-b", "M-k", "M-b"]);
    }
}
