//! JSON and CSV file formats.
//!
//! Games: `{"weights": [...], "quota": q}` (a weighted voting game) or
//! `{"weights": [...], "threshold": t, "encoding": "pm1"}` (an LTF on ±1
//! inputs). Index vectors: `{"kind": "shapley", "n": 6, "values": [...]}`,
//! with `"degree0"` for kinds that have one and `"p"` for biased kinds; a
//! partial vector adds `"indices"` (positions, 0 = degree-0 coefficient).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::indices::{IndexKind, IndexVector, PartialIndexVector};
use crate::ltf::{GameSpec, WeightedLtf};

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn field<T: for<'de> Deserialize<'de>>(v: &Value, key: &'static str) -> Result<T> {
    let raw = v
        .get(key)
        .ok_or_else(|| Error::Format(format!("missing key `{key}`")))?;
    T::deserialize(raw).map_err(|e| Error::Format(format!("key `{key}`: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedGame {
    pub ltf: WeightedLtf<f64>,
    /// Present when the file gave a quota.
    pub game: Option<GameSpec<f64>>,
}

pub fn parse_game(text: &str) -> Result<LoadedGame> {
    let v = parse_json(text)?;
    let weights: Vec<f64> = field(&v, "weights")?;
    match (v.get("quota"), v.get("threshold")) {
        (Some(_), Some(_)) => Err(Error::Format("give either `quota` or `threshold`, not both".into())),
        (Some(_), None) => {
            let game = GameSpec::new(weights, field(&v, "quota")?)?;
            Ok(LoadedGame {
                ltf: game.to_ltf(),
                game: Some(game),
            })
        }
        (None, Some(_)) => {
            if let Some(enc) = v.get("encoding") {
                if enc.as_str() != Some("pm1") {
                    return Err(Error::Format(format!("unsupported encoding {enc}; expected \"pm1\"")));
                }
            }
            Ok(LoadedGame {
                ltf: WeightedLtf::new(weights, field(&v, "threshold")?)?,
                game: None,
            })
        }
        (None, None) => Err(Error::Format("missing key `quota` or `threshold`".into())),
    }
}

pub fn game_to_json(g: &GameSpec<f64>) -> String {
    serde_json::json!({"weights": g.raw_weights(), "quota": g.quota()}).to_string()
}

pub fn ltf_to_json(f: &WeightedLtf<f64>) -> String {
    serde_json::json!({"weights": f.weights(), "threshold": f.threshold(), "encoding": "pm1"}).to_string()
}

#[derive(Serialize, Deserialize)]
struct FullFile {
    kind: IndexKind,
    n: usize,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct PartialFile {
    kind: IndexKind,
    n: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IndexFile {
    Full(IndexVector<f64>),
    Partial(PartialIndexVector<f64>),
}

impl IndexFile {
    /// A full vector becomes a partial one on every available position.
    pub fn into_partial(self) -> Result<PartialIndexVector<f64>> {
        match self {
            IndexFile::Partial(p) => Ok(p),
            IndexFile::Full(f) => {
                let lo = if f.degree0.is_some() { 0 } else { 1 };
                let all: Vec<usize> = (lo..=f.n()).collect();
                f.restrict(&all)
            }
        }
    }
}

pub fn parse_indices(text: &str) -> Result<IndexFile> {
    let v = parse_json(text)?;
    let bad = |e: serde_json::Error| Error::Format(e.to_string());
    if v.get("indices").is_some() {
        let f: PartialFile = serde_json::from_value(v).map_err(bad)?;
        if f.indices.len() != f.values.len() {
            return Err(Error::DimensionMismatch {
                expected: f.indices.len(),
                got: f.values.len(),
            });
        }
        let entries = f.indices.into_iter().zip(f.values).collect();
        Ok(IndexFile::Partial(PartialIndexVector::new(f.kind, f.n, entries)?))
    } else {
        let f: FullFile = serde_json::from_value(v).map_err(bad)?;
        if f.values.len() != f.n {
            return Err(Error::DimensionMismatch {
                expected: f.n,
                got: f.values.len(),
            });
        }
        if f.degree0.is_some() && !f.kind.has_degree0() {
            return Err(invalid("degree0", "Shapley indices have no degree-0 entry"));
        }
        Ok(IndexFile::Full(IndexVector {
            kind: f.kind,
            values: f.values,
            degree0: f.degree0,
            p: f.p,
        }))
    }
}

pub fn indices_to_json(v: &IndexVector<f64>) -> String {
    serde_json::to_string(&FullFile {
        kind: v.kind,
        n: v.n(),
        values: v.values.clone(),
        degree0: v.degree0,
        p: v.p,
    })
    .expect("serializable")
}

pub fn partial_to_json(v: &PartialIndexVector<f64>) -> String {
    serde_json::to_string(&PartialFile {
        kind: v.kind(),
        n: v.n(),
        indices: v.positions(),
        values: v.entries().iter().map(|e| e.1).collect(),
    })
    .expect("serializable")
}

/// `index,value` rows; position 0 first when present.
pub fn indices_to_csv(v: &IndexVector<f64>) -> String {
    let mut out = String::from("index,value\n");
    if let Some(d) = v.degree0 {
        out.push_str(&format!("0,{d}\n"));
    }
    for (i, x) in v.values.iter().enumerate() {
        out.push_str(&format!("{},{x}\n", i + 1));
    }
    out
}

pub fn partial_to_csv(v: &PartialIndexVector<f64>) -> String {
    let mut out = String::from("index,value\n");
    for (p, x) in v.entries() {
        out.push_str(&format!("{p},{x}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn games_both_forms() {
        let g = parse_game(r#"{"weights":[4,4,4,2,2,1],"quota":12}"#).unwrap();
        assert!(g.game.is_some());
        assert_eq!(g.ltf.n(), 6);
        let back = parse_game(&game_to_json(g.game.as_ref().unwrap())).unwrap();
        assert_eq!(back, g);
        let f = parse_game(r#"{"weights":[1,-1],"threshold":0.5,"encoding":"pm1"}"#).unwrap();
        assert!(f.game.is_none());
        assert_eq!(parse_game(&ltf_to_json(&f.ltf)).unwrap(), f);
        assert!(parse_game(r#"{"weights":[1],"threshold":0,"encoding":"01"}"#).is_err());
        assert!(parse_game(r#"{"weights":[1]}"#).is_err());
    }

    #[test]
    fn malformed_reports_position() {
        let e = parse_game("{\n  \"weights\": [1, 2,\n}").unwrap_err();
        let Error::Parse { line, column, .. } = e else { panic!("{e:?}") };
        assert_eq!(line, 3);
        assert!(column >= 1);
    }

    #[test]
    fn index_round_trips() {
        let mut v = IndexVector::new(IndexKind::Chow, vec![0.5, 0.5, 0.5]);
        v.degree0 = Some(0.0);
        let IndexFile::Full(back) = parse_indices(&indices_to_json(&v)).unwrap() else { panic!() };
        assert_eq!(back, v);
        let p = v.restrict(&[0, 2]).unwrap();
        let IndexFile::Partial(q) = parse_indices(&partial_to_json(&p)).unwrap() else { panic!() };
        assert_eq!(q, p);
        assert_eq!(IndexFile::Full(v.clone()).into_partial().unwrap().len(), 4);
        assert_eq!(indices_to_csv(&v).lines().count(), 5);
        assert_eq!(partial_to_csv(&p), "index,value\n0,0\n2,0.5\n");
        assert!(parse_indices(r#"{"kind":"shapley","n":2,"values":[1]}"#).is_err());
    }
}
