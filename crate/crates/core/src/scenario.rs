//! Event matrix for the protected line: external through-faults with CT
//! saturation, type-1 (low impedance) internal faults and type-2 (HIF)
//! internal faults, each crossed with grid-connected/islanded operating cases.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EXTERNAL_RESISTANCES_OHM: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
pub const INTERNAL_RESISTANCES_OHM: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 20.0];
pub const EXTERNAL_ANGLE_COUNT: usize = 10;
pub const INTERNAL_ANGLE_COUNT: usize = 7;
pub const HIF_FAULT_TIME_COUNT: usize = 20;

/// Id offsets keep the three populations disjoint when concatenated.
pub const EXTERNAL_ID_BASE: u64 = 0;
pub const TYPE1_ID_BASE: u64 = 1000;
pub const HIF_ID_BASE: u64 = 1875;

/// Per-phase load scaling for the unbalanced case.
pub const UNBALANCED_LOAD_SCALE: [f64; 3] = [1.0, 0.8, 1.2];

/// Low-voltage cases draw from 0.90, 0.91, ..., 0.99 pu.
const LOW_VOLTAGE_GRID_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Internal,
    External,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Internal => "internal",
            ClassLabel::External => "external",
        }
    }

    /// Positive class is the internal fault (trip).
    pub fn is_positive(self) -> bool {
        self == ClassLabel::Internal
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "internal" => Ok(ClassLabel::Internal),
            "external" => Ok(ClassLabel::External),
            _ => Err(Error::InvalidInput(format!("unknown class label `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    Type1Internal,
    Type2Hif,
    ExternalCtSat,
}

impl EventType {
    pub fn as_str(self) -> &'static str {
        match self {
            EventType::Type1Internal => "type1_internal",
            EventType::Type2Hif => "type2_hif",
            EventType::ExternalCtSat => "external_ct_sat",
        }
    }

    pub fn class_label(self) -> ClassLabel {
        match self {
            EventType::ExternalCtSat => ClassLabel::External,
            _ => ClassLabel::Internal,
        }
    }
}

impl FromStr for EventType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "type1_internal" => Ok(EventType::Type1Internal),
            "type2_hif" => Ok(EventType::Type2Hif),
            "external_ct_sat" => Ok(EventType::ExternalCtSat),
            _ => Err(Error::InvalidInput(format!("unknown event type `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultType {
    #[serde(rename = "LG")]
    Lg,
    #[serde(rename = "LLG")]
    Llg,
    #[serde(rename = "LL")]
    Ll,
    #[serde(rename = "LLLG")]
    Lllg,
    #[serde(rename = "LLL")]
    Lll,
    #[serde(rename = "HIF_LG")]
    HifLg,
}

impl FaultType {
    /// Low-impedance shunt faults, in table order.
    pub const SHUNT: [FaultType; 5] = [
        FaultType::Lg,
        FaultType::Llg,
        FaultType::Ll,
        FaultType::Lllg,
        FaultType::Lll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FaultType::Lg => "LG",
            FaultType::Llg => "LLG",
            FaultType::Ll => "LL",
            FaultType::Lllg => "LLLG",
            FaultType::Lll => "LLL",
            FaultType::HifLg => "HIF_LG",
        }
    }

    /// Number of phases involved.
    pub fn phase_count(self) -> usize {
        match self {
            FaultType::Lg | FaultType::HifLg => 1,
            FaultType::Llg | FaultType::Ll => 2,
            FaultType::Lllg | FaultType::Lll => 3,
        }
    }

    pub fn is_grounded(self) -> bool {
        !matches!(self, FaultType::Ll | FaultType::Lll)
    }
}

impl FromStr for FaultType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LG" => Ok(FaultType::Lg),
            "LLG" => Ok(FaultType::Llg),
            "LL" => Ok(FaultType::Ll),
            "LLLG" => Ok(FaultType::Lllg),
            "LLL" => Ok(FaultType::Lll),
            "HIF_LG" => Ok(FaultType::HifLg),
            _ => Err(Error::InvalidInput(format!("unknown fault type `{s}`"))),
        }
    }
}

/// Set of faulted phases, bit 0 = a, bit 1 = b, bit 2 = c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PhaseSet(u8);

impl PhaseSet {
    pub const A: PhaseSet = PhaseSet(0b001);
    pub const B: PhaseSet = PhaseSet(0b010);
    pub const C: PhaseSet = PhaseSet(0b100);
    pub const ABC: PhaseSet = PhaseSet(0b111);

    pub fn single(phase: usize) -> Self {
        assert!(phase < 3, "phase index out of range");
        PhaseSet(1 << phase)
    }

    pub fn contains(self, phase: usize) -> bool {
        phase < 3 && self.0 & (1 << phase) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..3).filter(move |&p| self.contains(p))
    }

    /// Phases `first`, `first+1`, ... (cyclic) for a fault involving `count` phases.
    pub fn rotated(first: usize, count: usize) -> Self {
        let bits = (0..count).fold(0u8, |acc, k| acc | 1 << ((first + k) % 3));
        PhaseSet(bits)
    }
}

impl fmt::Display for PhaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            f.write_str(["a", "b", "c"][p])?;
        }
        Ok(())
    }
}

impl From<PhaseSet> for String {
    fn from(p: PhaseSet) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PhaseSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for PhaseSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u8;
        for ch in s.chars() {
            let b = match ch {
                'a' => 1,
                'b' => 2,
                'c' => 4,
                _ => return Err(Error::InvalidInput(format!("bad phase set `{s}`"))),
            };
            bits |= b;
        }
        Ok(PhaseSet(bits))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    GridConnected,
    Islanded,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::GridConnected => "grid_connected",
            Mode::Islanded => "islanded",
        }
    }

    /// Loading cases simulated in this mode.
    pub fn loadings(self) -> &'static [Loading] {
        match self {
            Mode::GridConnected => &[Loading::Balanced, Loading::Unbalanced],
            Mode::Islanded => &[Loading::Balanced, Loading::Unbalanced, Loading::LowVoltage],
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid_connected" => Ok(Mode::GridConnected),
            "islanded" => Ok(Mode::Islanded),
            _ => Err(Error::InvalidInput(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loading {
    Balanced,
    Unbalanced,
    LowVoltage,
}

impl Loading {
    pub fn as_str(self) -> &'static str {
        match self {
            Loading::Balanced => "balanced",
            Loading::Unbalanced => "unbalanced",
            Loading::LowVoltage => "low_voltage",
        }
    }

    /// Per-phase load current scaling.
    pub fn phase_scale(self) -> [f64; 3] {
        match self {
            Loading::Unbalanced => UNBALANCED_LOAD_SCALE,
            _ => [1.0; 3],
        }
    }
}

impl FromStr for Loading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Loading::Balanced),
            "unbalanced" => Ok(Loading::Unbalanced),
            "low_voltage" => Ok(Loading::LowVoltage),
            _ => Err(Error::InvalidInput(format!("unknown loading `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingCondition {
    pub mode: Mode,
    pub loading: Loading,
    pub voltage_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: u64,
    pub class_label: ClassLabel,
    pub event_type: EventType,
    pub fault_type: FaultType,
    /// Ignored for HIF events; the arc model supplies its own resistance.
    pub fault_resistance_ohm: f64,
    pub inception_angle_deg: f64,
    pub faulted_phases: PhaseSet,
    pub condition: OperatingCondition,
    pub rng_seed: u64,
}

/// SplitMix64 finalizer over `(id, global_seed)`.
pub fn derive_seed(id: u64, global_seed: u64) -> u64 {
    let mut z = global_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(id.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Evenly spaced point-on-wave angles over one cycle: 0, 360/n, ...
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 360.0 * k as f64 / n as f64).collect()
}

fn condition_for(mode: Mode, loading: Loading, rng: &mut ChaCha8Rng) -> OperatingCondition {
    let voltage_pu = match loading {
        Loading::LowVoltage => {
            let step = rng.gen_range(0..LOW_VOLTAGE_GRID_STEPS);
            0.90 + 0.01 * step as f64
        }
        _ => 1.0,
    };
    OperatingCondition {
        mode,
        loading,
        voltage_pu,
    }
}

struct Draft {
    event_type: EventType,
    fault_type: FaultType,
    fault_resistance_ohm: f64,
    inception_angle_deg: f64,
    /// `None` lets the seed pick which phase(s) the fault starts on.
    phases: Option<PhaseSet>,
    mode: Mode,
    loading: Loading,
}

fn finish(drafts: Vec<Draft>, id_base: u64, global_seed: u64) -> Vec<ScenarioSpec> {
    drafts
        .into_iter()
        .enumerate()
        .map(|(k, d)| {
            let id = id_base + k as u64;
            let rng_seed = derive_seed(id, global_seed);
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let condition = condition_for(d.mode, d.loading, &mut rng);
            let faulted_phases = d.phases.unwrap_or_else(|| {
                let first = rng.gen_range(0..3);
                PhaseSet::rotated(first, d.fault_type.phase_count())
            });
            ScenarioSpec {
                id,
                class_label: d.event_type.class_label(),
                event_type: d.event_type,
                fault_type: d.fault_type,
                fault_resistance_ohm: d.fault_resistance_ohm,
                inception_angle_deg: d.inception_angle_deg,
                faulted_phases,
                condition,
                rng_seed,
            }
        })
        .collect()
}

fn shunt_grid(event_type: EventType, resistances: &[f64], angle_count: usize) -> Vec<Draft> {
    let angles = angle_grid(angle_count);
    let mut out = Vec::new();
    for mode in [Mode::GridConnected, Mode::Islanded] {
        for &loading in mode.loadings() {
            for fault_type in FaultType::SHUNT {
                for &r in resistances {
                    for &angle in &angles {
                        out.push(Draft {
                            event_type,
                            fault_type,
                            fault_resistance_ohm: r,
                            inception_angle_deg: angle,
                            phases: None,
                            mode,
                            loading,
                        });
                    }
                }
            }
        }
    }
    out
}

/// External through-faults: 5 types x 4 resistances x 10 angles x (2 + 3) cases.
pub fn enumerate_external(global_seed: u64) -> Vec<ScenarioSpec> {
    let drafts = shunt_grid(
        EventType::ExternalCtSat,
        &EXTERNAL_RESISTANCES_OHM,
        EXTERNAL_ANGLE_COUNT,
    );
    finish(drafts, EXTERNAL_ID_BASE, global_seed)
}

/// Low-impedance internal faults: 5 types x 5 resistances x 7 angles x (2 + 3) cases.
pub fn enumerate_internal_type1(global_seed: u64) -> Vec<ScenarioSpec> {
    let drafts = shunt_grid(
        EventType::Type1Internal,
        &INTERNAL_RESISTANCES_OHM,
        INTERNAL_ANGLE_COUNT,
    );
    finish(drafts, TYPE1_ID_BASE, global_seed)
}

/// High-impedance LG faults: 3 phases x 20 fault instants x (2 + 3) cases.
///
/// The fault instants are spread evenly over one fundamental cycle and are
/// stored as the point-on-wave angle at inception (k * 18 degrees).
pub fn enumerate_hif(global_seed: u64) -> Vec<ScenarioSpec> {
    let instants = angle_grid(HIF_FAULT_TIME_COUNT);
    let mut drafts = Vec::new();
    for mode in [Mode::GridConnected, Mode::Islanded] {
        for &loading in mode.loadings() {
            for phase in 0..3 {
                for &angle in &instants {
                    drafts.push(Draft {
                        event_type: EventType::Type2Hif,
                        fault_type: FaultType::HifLg,
                        fault_resistance_ohm: 0.0,
                        inception_angle_deg: angle,
                        phases: Some(PhaseSet::single(phase)),
                        mode,
                        loading,
                    });
                }
            }
        }
    }
    finish(drafts, HIF_ID_BASE, global_seed)
}

/// Full population ordered external, type-1, HIF (ids ascending).
pub fn enumerate_all(global_seed: u64) -> Vec<ScenarioSpec> {
    let mut all = enumerate_external(global_seed);
    all.extend(enumerate_internal_type1(global_seed));
    all.extend(enumerate_hif(global_seed));
    all
}

/// Class-stratified subsample of `limit` specs (largest-remainder allocation
/// over event types, evenly strided inside each type). Order follows ids.
pub fn stratified_subset(specs: &[ScenarioSpec], limit: usize) -> Vec<ScenarioSpec> {
    if limit >= specs.len() {
        return specs.to_vec();
    }
    let groups: Vec<(EventType, Vec<&ScenarioSpec>)> = [
        EventType::ExternalCtSat,
        EventType::Type1Internal,
        EventType::Type2Hif,
    ]
    .into_iter()
    .map(|t| (t, specs.iter().filter(|s| s.event_type == t).collect()))
    .collect();

    let total = specs.len();
    let mut quotas: Vec<(usize, f64)> = groups
        .iter()
        .map(|(_, g)| {
            let exact = limit as f64 * g.len() as f64 / total as f64;
            (exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut remaining = limit - quotas.iter().map(|q| q.0).sum::<usize>();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].1.total_cmp(&quotas[a].1).then(a.cmp(&b)));
    for i in order {
        if remaining == 0 {
            break;
        }
        quotas[i].0 += 1;
        remaining -= 1;
    }

    let mut picked: Vec<ScenarioSpec> = Vec::with_capacity(limit);
    for ((_, g), (quota, _)) in groups.iter().zip(&quotas) {
        for k in 0..*quota {
            let idx = k * g.len() / quota;
            picked.push(g[idx].clone());
        }
    }
    picked.sort_by_key(|s| s.id);
    picked
}

/// One manifest CSV row; flattened so the file has a column per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: u64,
    pub class_label: ClassLabel,
    pub event_type: EventType,
    pub fault_type: FaultType,
    pub fault_resistance_ohm: f64,
    pub inception_angle_deg: f64,
    pub faulted_phases: PhaseSet,
    pub mode: Mode,
    pub loading: Loading,
    pub voltage_pu: f64,
    pub rng_seed: u64,
}

impl From<&ScenarioSpec> for ManifestRow {
    fn from(s: &ScenarioSpec) -> Self {
        ManifestRow {
            id: s.id,
            class_label: s.class_label,
            event_type: s.event_type,
            fault_type: s.fault_type,
            fault_resistance_ohm: s.fault_resistance_ohm,
            inception_angle_deg: s.inception_angle_deg,
            faulted_phases: s.faulted_phases,
            mode: s.condition.mode,
            loading: s.condition.loading,
            voltage_pu: s.condition.voltage_pu,
            rng_seed: s.rng_seed,
        }
    }
}

impl From<ManifestRow> for ScenarioSpec {
    fn from(r: ManifestRow) -> Self {
        ScenarioSpec {
            id: r.id,
            class_label: r.class_label,
            event_type: r.event_type,
            fault_type: r.fault_type,
            fault_resistance_ohm: r.fault_resistance_ohm,
            inception_angle_deg: r.inception_angle_deg,
            faulted_phases: r.faulted_phases,
            condition: OperatingCondition {
                mode: r.mode,
                loading: r.loading,
                voltage_pu: r.voltage_pu,
            },
            rng_seed: r.rng_seed,
        }
    }
}

pub fn write_manifest<W: std::io::Write>(specs: &[ScenarioSpec], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in specs {
        w.serialize(ManifestRow::from(s))
            .map_err(|e| Error::InvalidData(format!("manifest row {}: {e}", s.id)))?;
    }
    w.flush()
        .map_err(|e| Error::InvalidData(format!("manifest flush: {e}")))?;
    Ok(())
}

pub fn read_manifest<R: std::io::Read>(input: R) -> Result<Vec<ScenarioSpec>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<ManifestRow>()
        .map(|row| {
            row.map(ScenarioSpec::from)
                .map_err(|e| Error::InvalidData(format!("manifest: {e}")))
        })
        .collect()
}
