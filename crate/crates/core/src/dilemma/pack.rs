//! Dilemma pack documents and their validation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::world::{CellKind, CityMap, TriggerZone};

pub const DEFAULT_BASELINE: i64 = 50;
pub const MAX_EFFECT: i64 = 10;
pub const MAX_ATTRIBUTES: usize = 16;
pub const MIN_CHOICES: usize = 2;
pub const MAX_CHOICES: usize = 6;
/// Trigger radius limit, in cells.
pub const MAX_TRIGGER_CELLS: f64 = 10.0;

/// Question code such as `Q1`. Orders by numeric value, then by text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DilemmaId(String);

impl DilemmaId {
    pub fn parse(s: &str) -> Option<Self> {
        let digits = s.strip_prefix('Q')?;
        (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
            .then(|| Self(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn digits(&self) -> &str {
        let d = self.0[1..].trim_start_matches('0');
        d
    }
}

impl Ord for DilemmaId {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.digits(), other.digits());
        a.len()
            .cmp(&b.len())
            .then_with(|| a.cmp(b))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for DilemmaId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<String> for DilemmaId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s).ok_or_else(|| format!("bad question id {s:?}"))
    }
}

impl From<DilemmaId> for String {
    fn from(id: DilemmaId) -> Self {
        id.0
    }
}

impl fmt::Display for DilemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Single upper-case letter naming a choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ChoiceKey(char);

impl ChoiceKey {
    pub fn new(c: char) -> Option<Self> {
        c.is_ascii_uppercase().then_some(Self(c))
    }

    pub fn nth(n: usize) -> Option<Self> {
        u8::try_from(n)
            .ok()
            .filter(|n| *n < 26)
            .map(|n| Self((b'A' + n) as char))
    }

    pub fn as_char(self) -> char {
        self.0
    }
}

impl TryFrom<String> for ChoiceKey {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Self::new(c).ok_or_else(|| format!("bad choice key {s:?}")),
            _ => Err(format!("bad choice key {s:?}")),
        }
    }
}

impl From<ChoiceKey> for String {
    fn from(k: ChoiceKey) -> Self {
        k.0.to_string()
    }
}

impl fmt::Display for ChoiceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceFrequency {
    Unique,
    Repeated,
}

/// Middleware categorization labels. Stored and exported, never interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityMeta {
    pub module_label: String,
    pub behavior_label: String,
    pub instance_frequency: InstanceFrequency,
    pub prefab_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceDocument {
    pub key: String,
    pub text: String,
    #[serde(default)]
    pub effects: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilemmaDocument {
    pub id: String,
    pub description: String,
    pub prompt: String,
    pub trigger: TriggerZone,
    pub entity_meta: EntityMeta,
    pub choices: Vec<ChoiceDocument>,
    /// Free-form authoring note, e.g. marking invented placeholder content.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackDocument {
    pub pack_id: String,
    pub attributes: Vec<String>,
    #[serde(default = "default_baseline")]
    pub baseline: i64,
    pub dilemmas: Vec<DilemmaDocument>,
}

fn default_baseline() -> i64 {
    DEFAULT_BASELINE
}

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub key: ChoiceKey,
    pub text: String,
    pub effects: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilemmaSpec {
    pub id: DilemmaId,
    pub description: String,
    pub prompt: String,
    pub choices: Vec<Choice>,
    pub trigger: TriggerZone,
    pub entity_meta: EntityMeta,
    pub provenance: Option<String>,
}

impl DilemmaSpec {
    pub fn choice(&self, key: ChoiceKey) -> Option<&Choice> {
        self.choices.iter().find(|c| c.key == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilemmaPack {
    pack_id: String,
    attributes: Vec<String>,
    baseline: i64,
    dilemmas: Vec<DilemmaSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PackIssue {
    #[error("NoDilemmas: pack declares no dilemmas")]
    NoDilemmas,
    #[error("BadIdFormat: dilemma #{index} has id {id:?}, expected Q<digits>")]
    BadIdFormat { index: usize, id: String },
    #[error("DuplicateId: {0} appears more than once")]
    DuplicateId(String),
    #[error("BadChoiceKeys: {id} has keys [{}], expected A.. in order with 2 to 6 choices", .keys.join(","))]
    BadChoiceKeys { id: String, keys: Vec<String> },
    #[error("UnknownAttribute: {id} choice {key} references {attribute:?}")]
    UnknownAttribute {
        id: String,
        key: String,
        attribute: String,
    },
    #[error("EffectOutOfRange: {id} choice {key} sets {attribute} to {delta}, allowed -10..=10")]
    EffectOutOfRange {
        id: String,
        key: String,
        attribute: String,
        delta: i64,
    },
    #[error("TriggerOffStreet: {id} trigger center ({x}, {z}) is not on a street cell")]
    TriggerOffStreet { id: String, x: String, z: String },
    #[error("BadTriggerRadius: {id} radius {radius} must be in (0, {max}]")]
    BadTriggerRadius {
        id: String,
        radius: String,
        max: String,
    },
    #[error("EmptyLabel: {id} entity_meta.{field} is empty")]
    EmptyLabel { id: String, field: &'static str },
    #[error("AttributeCount: pack declares {0} attributes, allowed 1 to 16")]
    AttributeCount(usize),
    #[error("DuplicateAttribute: {0:?} declared more than once")]
    DuplicateAttribute(String),
}

#[derive(Debug, thiserror::Error)]
pub enum PackError {
    #[error("malformed pack document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("pack failed validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<PackIssue>),
}

impl PackError {
    pub fn issues(&self) -> &[PackIssue] {
        match self {
            Self::Validation(issues) => issues,
            Self::Parse { .. } => &[],
        }
    }
}

/// Parses and validates a pack against its companion map. `map` may be
/// `None` when the map itself failed to parse; trigger placement checks are
/// then skipped.
pub fn load_pack(document: &str, map: Option<&CityMap>) -> Result<DilemmaPack, PackError> {
    let doc: PackDocument = serde_json::from_str(document).map_err(|e| PackError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    DilemmaPack::from_document(doc, map)
}

impl DilemmaPack {
    pub fn from_document(doc: PackDocument, map: Option<&CityMap>) -> Result<Self, PackError> {
        let mut issues = Vec::new();

        if doc.attributes.is_empty() || doc.attributes.len() > MAX_ATTRIBUTES {
            issues.push(PackIssue::AttributeCount(doc.attributes.len()));
        }
        let mut seen_attr = BTreeSet::new();
        for a in &doc.attributes {
            if !seen_attr.insert(a.as_str()) {
                issues.push(PackIssue::DuplicateAttribute(a.clone()));
            }
        }
        if doc.dilemmas.is_empty() {
            issues.push(PackIssue::NoDilemmas);
        }

        let mut seen_ids = BTreeSet::new();
        let mut specs = Vec::with_capacity(doc.dilemmas.len());
        for (index, d) in doc.dilemmas.into_iter().enumerate() {
            let id = DilemmaId::parse(&d.id);
            if id.is_none() {
                issues.push(PackIssue::BadIdFormat {
                    index,
                    id: d.id.clone(),
                });
            }
            if !seen_ids.insert(d.id.clone()) {
                issues.push(PackIssue::DuplicateId(d.id.clone()));
            }

            let keys_ok = (MIN_CHOICES..=MAX_CHOICES).contains(&d.choices.len())
                && d.choices.iter().enumerate().all(|(n, c)| {
                    ChoiceKey::nth(n).is_some_and(|k| String::from(k) == c.key)
                });
            if !keys_ok {
                issues.push(PackIssue::BadChoiceKeys {
                    id: d.id.clone(),
                    keys: d.choices.iter().map(|c| c.key.clone()).collect(),
                });
            }
            for c in &d.choices {
                for (attribute, delta) in &c.effects {
                    if !seen_attr.contains(attribute.as_str()) {
                        issues.push(PackIssue::UnknownAttribute {
                            id: d.id.clone(),
                            key: c.key.clone(),
                            attribute: attribute.clone(),
                        });
                    }
                    if delta.abs() > MAX_EFFECT {
                        issues.push(PackIssue::EffectOutOfRange {
                            id: d.id.clone(),
                            key: c.key.clone(),
                            attribute: attribute.clone(),
                            delta: *delta,
                        });
                    }
                }
            }

            for (field, label) in [
                ("module_label", &d.entity_meta.module_label),
                ("behavior_label", &d.entity_meta.behavior_label),
                ("prefab_label", &d.entity_meta.prefab_label),
            ] {
                if label.trim().is_empty() {
                    issues.push(PackIssue::EmptyLabel {
                        id: d.id.clone(),
                        field,
                    });
                }
            }

            if let Some(map) = map {
                let t = d.trigger;
                let on_street = t.x.is_finite()
                    && t.z.is_finite()
                    && map.is_walkable(t.center())
                    && map.kind(map.cell_at(t.center())) == Some(CellKind::Street);
                if !on_street {
                    issues.push(PackIssue::TriggerOffStreet {
                        id: d.id.clone(),
                        x: t.x.to_string(),
                        z: t.z.to_string(),
                    });
                }
                let max = MAX_TRIGGER_CELLS * map.cell_size();
                if !(t.radius > 0.0 && t.radius <= max) {
                    issues.push(PackIssue::BadTriggerRadius {
                        id: d.id.clone(),
                        radius: t.radius.to_string(),
                        max: max.to_string(),
                    });
                }
            } else if !(d.trigger.radius > 0.0 && d.trigger.radius.is_finite()) {
                issues.push(PackIssue::BadTriggerRadius {
                    id: d.id.clone(),
                    radius: d.trigger.radius.to_string(),
                    max: "10 cells".into(),
                });
            }

            if let (Some(id), true) = (id, keys_ok) {
                specs.push(DilemmaSpec {
                    id,
                    description: d.description,
                    prompt: d.prompt,
                    choices: d
                        .choices
                        .into_iter()
                        .enumerate()
                        .map(|(n, c)| Choice {
                            key: ChoiceKey::nth(n).expect("checked above"),
                            text: c.text,
                            effects: c.effects,
                        })
                        .collect(),
                    trigger: d.trigger,
                    entity_meta: d.entity_meta,
                    provenance: d.provenance,
                });
            }
        }

        if !issues.is_empty() {
            return Err(PackError::Validation(issues));
        }
        specs.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self {
            pack_id: doc.pack_id,
            attributes: doc.attributes,
            baseline: doc.baseline,
            dilemmas: specs,
        })
    }

    pub fn pack_id(&self) -> &str {
        &self.pack_id
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn baseline(&self) -> i64 {
        self.baseline
    }

    /// Dilemmas in ascending id order.
    pub fn dilemmas(&self) -> &[DilemmaSpec] {
        &self.dilemmas
    }

    pub fn len(&self) -> usize {
        self.dilemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dilemmas.is_empty()
    }

    pub fn get(&self, id: &DilemmaId) -> Option<&DilemmaSpec> {
        self.dilemmas.iter().find(|d| &d.id == id)
    }

    pub fn get_str(&self, id: &str) -> Option<&DilemmaSpec> {
        self.dilemmas.iter().find(|d| d.id.as_str() == id)
    }
}
