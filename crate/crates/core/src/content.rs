//! Map and dilemma pack loaded as a pair, plus the bundled sample scenario.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::dilemma::{load_pack, DilemmaPack, PackError};
use crate::session::Rules;
use crate::world::{load_map, CityMap, MapError};

/// Source of the bundled 16×16 sample city.
pub const SAMPLE_MAP: &str = include_str!("../content/plateia.map");
/// Source of the bundled four-dilemma sample pack.
pub const SAMPLE_PACK: &str = include_str!("../content/epolis-sample.pack");

/// A validated map and a pack validated against it, with their source text.
#[derive(Debug, Clone)]
pub struct Content {
    pub map: CityMap,
    pub pack: DilemmaPack,
    pub map_source: String,
    pub pack_source: String,
}

/// Everything wrong with a map/pack pair. Both are always checked.
#[derive(Debug, thiserror::Error)]
pub struct ContentError {
    pub map: Option<MapError>,
    pub pack: Option<PackError>,
    /// Files that could not be read at all.
    pub unreadable: Vec<(PathBuf, std::io::Error)>,
}

impl ContentError {
    /// One line per problem, prefixed with the file it concerns.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .unreadable
            .iter()
            .map(|(p, e)| format!("{}: {e}", p.display()))
            .collect();
        match &self.map {
            Some(MapError::Validation(issues)) => {
                out.extend(issues.iter().map(|i| format!("map: {i}")));
            }
            Some(e) => out.push(format!("map: {e}")),
            None => {}
        }
        match &self.pack {
            Some(PackError::Validation(issues)) => {
                out.extend(issues.iter().map(|i| format!("pack: {i}")));
            }
            Some(e) => out.push(format!("pack: {e}")),
            None => {}
        }
        out
    }
}

impl fmt::Display for ContentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.diagnostics().join("; "))
    }
}

impl Content {
    /// Validates both documents. A broken map still lets the pack be checked
    /// on its own, so every diagnostic surfaces at once.
    pub fn from_sources(map_source: &str, pack_source: &str) -> Result<Self, ContentError> {
        let map = load_map(map_source);
        let pack = load_pack(pack_source, map.as_ref().ok());
        match (map, pack) {
            (Ok(map), Ok(pack)) => Ok(Self {
                map,
                pack,
                map_source: map_source.to_owned(),
                pack_source: pack_source.to_owned(),
            }),
            (map, pack) => Err(ContentError {
                map: map.err(),
                pack: pack.err(),
                unreadable: Vec::new(),
            }),
        }
    }

    pub fn load(map_path: &Path, pack_path: &Path) -> Result<Self, ContentError> {
        let mut unreadable = Vec::new();
        let mut read = |p: &Path| {
            std::fs::read_to_string(p)
                .map_err(|e| unreadable.push((p.to_owned(), e)))
                .ok()
        };
        let (map, pack) = (read(map_path), read(pack_path));
        match (map, pack) {
            (Some(m), Some(p)) => Self::from_sources(&m, &p),
            (m, p) => {
                // Still validate whichever file was readable.
                let mut err = ContentError {
                    map: m.and_then(|m| load_map(&m).err()),
                    pack: p.and_then(|p| load_pack(&p, None).err()),
                    unreadable,
                };
                err.unreadable.sort_by(|a, b| a.0.cmp(&b.0));
                Err(err)
            }
        }
    }

    pub fn sample() -> Self {
        Self::from_sources(SAMPLE_MAP, SAMPLE_PACK).expect("bundled content is valid")
    }

    pub fn rules(&self) -> Rules<'_> {
        Rules {
            pack: &self.pack,
            map: &self.map,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilemma::{ChoiceKey, DilemmaId};
    use crate::world::{Cell, CellKind};

    #[test]
    fn sample_content_validates() {
        let c = Content::sample();
        assert_eq!(c.map.width(), 16);
        assert_eq!(c.map.height(), 16);
        assert_eq!(c.pack.attributes(), ["safety", "trust", "economy", "environment"]);
        assert_eq!(c.pack.len(), 4);
        assert_eq!(c.map.kind(Cell::new(15, 15)), Some(CellKind::Booth));
    }

    #[test]
    fn first_dilemma_is_the_incident() {
        let c = Content::sample();
        let q1 = c.pack.get(&DilemmaId::parse("Q1").unwrap()).unwrap();
        assert_eq!(q1.prompt, "How would you react?");
        let texts: Vec<(char, &str)> = q1
            .choices
            .iter()
            .map(|ch| (ch.key.as_char(), ch.text.as_str()))
            .collect();
        assert_eq!(
            texts,
            [
                ('A', "Confront the police officers and stand up for the man"),
                ('B', "Not confront the police officers, but video-record their actions"),
                ('C', "Congratulate the police"),
                ('D', "Leave; there is nothing to do here"),
            ]
        );
        assert!(q1.choice(ChoiceKey::new('D').unwrap()).is_some());
    }

    #[test]
    fn invented_content_is_labelled() {
        let c = Content::sample();
        for d in c.pack.dilemmas() {
            let note = d.provenance.as_deref().unwrap_or_default();
            assert!(note.contains("placeholder"), "{} lacks a placeholder note", d.id);
        }
    }

    #[test]
    fn both_files_are_diagnosed() {
        let bad_map = serde_json::json!({"name": "x", "cell_size": 1.0,
                                         "rows": ["S###", "####", "####", "###B"]})
        .to_string();
        let bad_pack = r#"{"pack_id":"p","attributes":["a"],"dilemmas":[]}"#;
        let err = Content::from_sources(&bad_map, bad_pack).unwrap_err();
        let d = err.diagnostics();
        assert!(d.iter().any(|l| l.contains("BoothUnreachable")), "{d:?}");
        assert!(d.iter().any(|l| l.starts_with("pack:")), "{d:?}");
    }
}
