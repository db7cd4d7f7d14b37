//! JSON document formats and the named-document workspace.
//!
//! Every document has a canonical form: index lists sorted, set families
//! sorted lexicographically and deduplicated. Serializing a canonical
//! document and parsing it back yields the same canonical document.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cover::{make_cover, Cover};
use crate::dynamics::{check_r_map, RMap};
use crate::error::{Error, Result};
use crate::mincover::LogBase;
use crate::pointset::PointSet;
use crate::sft::{build_sft, build_sft_forbidden, SftSystem};
use crate::topology::{FiniteSpace, Limits};

/// Parses a JSON document, reporting failures with line and column.
pub fn parse_doc<T: DeserializeOwned>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        what: what.to_string(),
        line: e.line(),
        column: e.column(),
        message: match e.line() {
            // untagged documents fail without a position
            0 => "does not match any document form".to_string(),
            _ => strip_position(&e.to_string()),
        },
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn sorted_set(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn sorted_family(f: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut f: Vec<Vec<usize>> = f.iter().map(|s| sorted_set(s)).collect();
    f.sort();
    f.dedup();
    f
}

fn to_pointset(v: &[usize], n: usize) -> Result<PointSet> {
    if let Some(&index) = v.iter().find(|&&i| i >= n) {
        return Err(Error::BadIndex { index, points: n });
    }
    Ok(PointSet::from_indices(v.iter().copied()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpensDoc {
    /// Point labels; a bare count `n` labels the points `0..n`.
    #[serde(deserialize_with = "labels_or_count")]
    pub points: Vec<String>,
    pub opens: Vec<Vec<usize>>,
}

fn labels_or_count<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Points {
        Count(usize),
        Labels(Vec<String>),
    }
    Ok(match Points::deserialize(d)? {
        Points::Count(n) => (0..n).map(|i| i.to_string()).collect(),
        Points::Labels(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinNbhdsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    pub min_nbhds: Vec<Vec<usize>>,
}

/// `{"fixture": "discrete" | "sierpinski" | "khalimsky", "n": ..}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureDoc {
    pub fixture: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceDoc {
    Opens(OpensDoc),
    MinNbhds(MinNbhdsDoc),
    Fixture(FixtureDoc),
}

impl SpaceDoc {
    /// The canonical explicit form of a space.
    pub fn from_space(space: &FiniteSpace) -> SpaceDoc {
        SpaceDoc::Opens(OpensDoc {
            points: space.names().to_vec(),
            opens: space.opens().iter().map(|o| o.to_vec()).collect(),
        })
    }

    pub fn to_space(&self, limits: Limits) -> Result<Arc<FiniteSpace>> {
        match self {
            SpaceDoc::Opens(OpensDoc { points, opens }) => {
                let n = points.len();
                let sets = opens
                    .iter()
                    .map(|o| to_pointset(o, n))
                    .collect::<Result<Vec<_>>>()?;
                FiniteSpace::with_limits(n, sets, limits)?.named(points.clone())
            }
            SpaceDoc::MinNbhds(MinNbhdsDoc { points, min_nbhds }) => {
                let n = min_nbhds.len();
                let sets = min_nbhds
                    .iter()
                    .map(|o| to_pointset(o, n))
                    .collect::<Result<Vec<_>>>()?;
                let space = FiniteSpace::from_min_nbhds_with_limits(sets, limits)?;
                match points {
                    Some(p) => space.named(p.clone()),
                    None => Ok(space),
                }
            }
            SpaceDoc::Fixture(FixtureDoc { fixture, n }) => {
                let need_n = || {
                    n.ok_or_else(|| Error::NotATopology(format!("fixture {fixture} needs \"n\"")))
                };
                let space = match fixture.as_str() {
                    "discrete" => {
                        let n = need_n()?;
                        if n == 0 || n > limits.max_points {
                            return Err(Error::TooLarge(format!(
                                "discrete({n}) outside 1..={}",
                                limits.max_points
                            )));
                        }
                        FiniteSpace::discrete(n)
                    }
                    "sierpinski" => FiniteSpace::sierpinski(),
                    "khalimsky" => FiniteSpace::khalimsky(need_n()?)?,
                    other => {
                        return Err(Error::NotATopology(format!("unknown fixture {other:?}")))
                    }
                };
                Ok(space)
            }
        }
    }

    /// Canonical form of the space this document describes.
    pub fn canonical(&self, limits: Limits) -> Result<SpaceDoc> {
        Ok(SpaceDoc::from_space(&*self.to_space(limits)?))
    }
}

/// A space given by workspace name, or inline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Name(String),
    Inline(Box<SpaceDoc>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceRef>,
    pub map: Vec<usize>,
}

impl MapDoc {
    pub fn from_map(f: &RMap, space: Option<SpaceRef>) -> MapDoc {
        MapDoc {
            space,
            map: f.table().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceRef>,
    pub sets: Vec<Vec<usize>>,
}

impl CoverDoc {
    pub fn from_cover(u: &Cover, space: Option<SpaceRef>) -> CoverDoc {
        CoverDoc {
            space,
            sets: u.raw().iter().map(|s| s.to_vec()).collect(),
        }
    }

    pub fn canonical(&self) -> CoverDoc {
        CoverDoc {
            space: self.space.clone(),
            sets: sorted_family(&self.sets),
        }
    }

    pub fn to_cover(&self, space: &Arc<FiniteSpace>) -> Result<Cover> {
        let sets = self
            .sets
            .iter()
            .map(|s| to_pointset(s, space.len()))
            .collect::<Result<Vec<_>>>()?;
        make_cover(space, sets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SftDoc {
    Matrix(MatrixSftDoc),
    Forbidden(ForbiddenSftDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSftDoc {
    pub alphabet: usize,
    pub matrix: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForbiddenSftDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<usize>,
    pub forbidden: Vec<String>,
}

impl SftDoc {
    pub fn to_sft(&self) -> Result<SftSystem> {
        match self {
            SftDoc::Matrix(d) => build_sft(d.alphabet, d.matrix.clone()),
            SftDoc::Forbidden(d) => build_sft_forbidden(d.alphabet, &d.forbidden),
        }
    }

    pub fn canonical(&self) -> SftDoc {
        match self {
            SftDoc::Matrix(_) => self.clone(),
            SftDoc::Forbidden(d) => {
                let mut forbidden = d.forbidden.clone();
                forbidden.sort();
                forbidden.dedup();
                SftDoc::Forbidden(ForbiddenSftDoc {
                    alphabet: d.alphabet,
                    forbidden,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkspaceConfig {
    pub base: LogBase,
    pub limits: Limits,
    pub seed: u64,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        WorkspaceConfig {
            base: LogBase::Natural,
            limits: Limits::from_env(),
            seed: 0,
        }
    }
}

/// Validated documents keyed by unique names.
#[derive(Debug, Default)]
pub struct Workspace {
    pub config: WorkspaceConfig,
    spaces: BTreeMap<String, Arc<FiniteSpace>>,
    maps: BTreeMap<String, RMap>,
    covers: BTreeMap<String, Cover>,
    sfts: BTreeMap<String, SftSystem>,
}

impl Workspace {
    pub fn new(config: WorkspaceConfig) -> Self {
        Workspace {
            config,
            ..Default::default()
        }
    }

    fn claim(&self, name: &str) -> Result<()> {
        let taken = self.spaces.contains_key(name)
            || self.maps.contains_key(name)
            || self.covers.contains_key(name)
            || self.sfts.contains_key(name);
        if taken {
            Err(Error::DuplicateName(name.to_string()))
        } else {
            Ok(())
        }
    }

    pub fn add_space(&mut self, name: &str, doc: &SpaceDoc) -> Result<Arc<FiniteSpace>> {
        self.claim(name)?;
        let space = doc.to_space(self.config.limits)?;
        self.spaces.insert(name.to_string(), Arc::clone(&space));
        Ok(space)
    }

    pub fn space(&self, name: &str) -> Result<&Arc<FiniteSpace>> {
        self.spaces
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Resolves a document's space reference; `fallback` names the space
    /// used when the document carries none.
    pub fn resolve(&self, r: Option<&SpaceRef>, fallback: Option<&str>) -> Result<Arc<FiniteSpace>> {
        match r {
            Some(SpaceRef::Name(n)) => self.space(n).cloned(),
            Some(SpaceRef::Inline(doc)) => doc.to_space(self.config.limits),
            None => match fallback {
                Some(n) => self.space(n).cloned(),
                None => Err(Error::UnknownName("<no space given>".into())),
            },
        }
    }

    /// Adds a map; it must be an R-map of its space.
    pub fn add_map(&mut self, name: &str, doc: &MapDoc, fallback: Option<&str>) -> Result<RMap> {
        self.claim(name)?;
        let space = self.resolve(doc.space.as_ref(), fallback)?;
        let f = check_r_map(&space, doc.map.clone())?;
        self.maps.insert(name.to_string(), f.clone());
        Ok(f)
    }

    /// Adds a map without rejecting non-R-maps; status is recorded.
    pub fn add_map_assessed(
        &mut self,
        name: &str,
        doc: &MapDoc,
        fallback: Option<&str>,
    ) -> Result<RMap> {
        self.claim(name)?;
        let space = self.resolve(doc.space.as_ref(), fallback)?;
        let f = RMap::assess(&space, doc.map.clone())?;
        self.maps.insert(name.to_string(), f.clone());
        Ok(f)
    }

    pub fn map(&self, name: &str) -> Result<&RMap> {
        self.maps
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn add_cover(&mut self, name: &str, doc: &CoverDoc, fallback: Option<&str>) -> Result<Cover> {
        self.claim(name)?;
        let space = self.resolve(doc.space.as_ref(), fallback)?;
        let u = doc.to_cover(&space)?;
        self.covers.insert(name.to_string(), u.clone());
        Ok(u)
    }

    pub fn cover(&self, name: &str) -> Result<&Cover> {
        self.covers
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn add_sft(&mut self, name: &str, doc: &SftDoc) -> Result<SftSystem> {
        self.claim(name)?;
        let s = doc.to_sft()?;
        self.sfts.insert(name.to_string(), s.clone());
        Ok(s)
    }

    pub fn sft(&self, name: &str) -> Result<&SftSystem> {
        self.sfts
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }
}

/// Parses a set literal `{0,1,2}`, `[0,1]` or `0,1`.
pub fn parse_set_literal(text: &str, n: usize) -> Result<PointSet> {
    let inner = text
        .trim()
        .trim_start_matches(['{', '['])
        .trim_end_matches(['}', ']']);
    let mut idx = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i = part.parse::<usize>().map_err(|e| Error::Parse {
            what: "set literal".into(),
            line: 1,
            column: 1 + text.find(part).unwrap_or(0),
            message: format!("{part:?}: {e}"),
        })?;
        idx.push(i);
    }
    to_pointset(&idx, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_doc_forms() {
        let a: SpaceDoc =
            parse_doc("space", r#"{"points":["a","b"],"opens":[[],[1],[0,1]]}"#).unwrap();
        let b: SpaceDoc = parse_doc("space", r#"{"min_nbhds":[[0,1],[1]]}"#).unwrap();
        let counted: SpaceDoc = parse_doc("space", r#"{"points":2,"opens":[[],[1],[0,1]]}"#).unwrap();
        assert_eq!(*counted.to_space(Limits::default()).unwrap(), *b.to_space(Limits::default()).unwrap());
        let c: SpaceDoc = parse_doc("space", r#"{"fixture":"sierpinski"}"#).unwrap();
        let l = Limits::default();
        let (sa, sb, sc) = (a.to_space(l).unwrap(), b.to_space(l).unwrap(), c.to_space(l).unwrap());
        assert_eq!(*sa, *sb);
        assert_eq!(*sb, *sc);
        assert_eq!(sa.names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn canonical_serialization_sorts() {
        let doc: SpaceDoc =
            parse_doc("space", r#"{"points":["0","1"],"opens":[[1,0],[],[1]]}"#).unwrap();
        let canon = doc.canonical(Limits::default()).unwrap();
        let text = serde_json::to_string(&canon).unwrap();
        assert_eq!(text, r#"{"points":["0","1"],"opens":[[],[0,1],[1]]}"#);
        let k = FiniteSpace::khalimsky(5).unwrap();
        assert_eq!(serde_json::to_string(&*k).unwrap(), serde_json::to_string(&SpaceDoc::from_space(&k)).unwrap());
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_doc::<SpaceDoc>("space", "{\n  \"opens\": [[0,]\n}").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let bad: SpaceDoc = parse_doc("space", r#"{"points":["0"],"opens":[[],[3]]}"#).unwrap();
        assert!(matches!(bad.to_space(Limits::default()), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn workspace_resolution() {
        let mut ws = Workspace::new(WorkspaceConfig::default());
        ws.add_space("k5", &SpaceDoc::Fixture(FixtureDoc { fixture: "khalimsky".into(), n: Some(5) }))
            .unwrap();
        let m: MapDoc = parse_doc("map", r#"{"space":"k5","map":[2,2,2,2,2]}"#).unwrap();
        let f = ws.add_map("c", &m, None).unwrap();
        assert!(f.is_r_map());
        let dup = ws.add_space("c", &SpaceDoc::Fixture(FixtureDoc { fixture: "sierpinski".into(), n: None }));
        assert_eq!(dup.unwrap_err(), Error::DuplicateName("c".into()));
        let cov: CoverDoc = parse_doc("cover", r#"{"sets":[[0,1,2,3,4]]}"#).unwrap();
        assert_eq!(ws.add_cover("u", &cov, Some("k5")).unwrap().len(), 1);
        let inline: MapDoc =
            parse_doc("map", r#"{"space":{"fixture":"discrete","n":2},"map":[1,0]}"#).unwrap();
        assert!(ws.add_map("swap", &inline, None).unwrap().is_bijective());
        assert!(ws.add_map("x", &m, None).is_ok());
        assert!(matches!(ws.map("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn sft_docs() {
        let g: SftDoc = parse_doc("sft", r#"{"forbidden":["11"]}"#).unwrap();
        assert_eq!(g.to_sft().unwrap().matrix, vec![vec![1, 1], vec![1, 0]]);
        let f: SftDoc = parse_doc("sft", r#"{"alphabet":2,"matrix":[[1,1],[1,1]]}"#).unwrap();
        assert_eq!(f.to_sft().unwrap().alphabet(), 2);
        let again: SftDoc = parse_doc("sft", &to_json(&g.canonical())).unwrap();
        assert_eq!(again, g.canonical());
    }

    #[test]
    fn set_literals() {
        assert_eq!(parse_set_literal("{0,2}", 3).unwrap(), PointSet::from_indices([0, 2]));
        assert_eq!(parse_set_literal("[]", 3).unwrap(), PointSet::EMPTY);
        assert!(parse_set_literal("{x}", 3).is_err());
        assert!(parse_set_literal("{5}", 3).is_err());
    }
}
