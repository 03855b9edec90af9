use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Inner product of the two vectors after scaling each to unit length.
pub fn match_score(image: &[f64], caption: &[f64]) -> Result<f64, MetricsError> {
    if image.len() != caption.len() {
        return Err(MetricsError::DimensionMismatch(image.len(), caption.len()));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (nu, nv) = (norm(image), norm(caption));
    if nu == 0.0 || nv == 0.0 {
        return Err(MetricsError::DegenerateEmbedding);
    }
    let dot: f64 = image.iter().zip(caption).map(|(a, b)| (a / nu) * (b / nv)).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Index of the highest score, ties to the smallest index, plus a tie flag.
pub fn predict_from_scores(scores: &[f64]) -> Result<(usize, bool), MetricsError> {
    if scores.len() < 2 {
        return Err(MetricsError::TooFewScores(scores.len()));
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(bad));
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    let tie = scores.iter().enumerate().any(|(i, &s)| i != best && s == scores[best]);
    Ok((best, tie))
}

/// Per-instance alignment scores from a vision-language model, one per
/// candidate caption; higher means a better match.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    scores: BTreeMap<String, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreLine {
    id: String,
    scores: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingLine {
    id: String,
    image_embedding: Vec<f64>,
    caption_embeddings: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, scores: Vec<f64>) -> Option<Vec<f64>> {
        self.scores.insert(id.into(), scores)
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.scores.get(id).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.scores.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Reads `{"id", "scores"}` lines. Blank lines are skipped.
    pub fn parse_scores<R: BufRead>(reader: R) -> Result<Self, MetricsError> {
        let mut out = Self::new();
        for_each_line(reader, |line, text| {
            let rec: ScoreLine = parse_json(line, text)?;
            out.insert_unique(line, rec.id, rec.scores)
        })?;
        Ok(out)
    }

    /// Reads `{"id", "image_embedding", "caption_embeddings"}` lines and
    /// converts each caption embedding to a [`match_score`].
    pub fn parse_embeddings<R: BufRead>(reader: R) -> Result<Self, MetricsError> {
        let mut out = Self::new();
        for_each_line(reader, |line, text| {
            let rec: EmbeddingLine = parse_json(line, text)?;
            let scores = rec
                .caption_embeddings
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    match_score(&rec.image_embedding, c).map_err(|e| MetricsError::Parse {
                        line,
                        message: format!("caption {i}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.insert_unique(line, rec.id, scores)
        })?;
        Ok(out)
    }

    pub fn load_scores(path: &Path) -> Result<Self, MetricsError> {
        Self::parse_scores(open(path)?)
    }

    pub fn load_embeddings(path: &Path) -> Result<Self, MetricsError> {
        Self::parse_embeddings(open(path)?)
    }

    /// Writes the matrix as scores JSONL in id order.
    pub fn write_scores<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, scores) in &self.scores {
            let line = ScoreLine {
                id: id.clone(),
                scores: scores.clone(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    fn insert_unique(&mut self, line: usize, id: String, scores: Vec<f64>) -> Result<(), MetricsError> {
        if self.scores.contains_key(&id) {
            return Err(MetricsError::Parse {
                line,
                message: format!("duplicate id {id:?}"),
            });
        }
        self.scores.insert(id, scores);
        Ok(())
    }
}

impl FromIterator<(String, Vec<f64>)> for ScoreMatrix {
    fn from_iter<I: IntoIterator<Item = (String, Vec<f64>)>>(iter: I) -> Self {
        Self {
            scores: iter.into_iter().collect(),
        }
    }
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, MetricsError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| MetricsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
}

fn for_each_line<R: BufRead>(
    reader: R,
    mut f: impl FnMut(usize, &str) -> Result<(), MetricsError>,
) -> Result<(), MetricsError> {
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| MetricsError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        f(line_no, &text)?;
    }
    Ok(())
}

fn parse_json<T: serde::de::DeserializeOwned>(line: usize, text: &str) -> Result<T, MetricsError> {
    serde_json::from_str(text).map_err(|e| MetricsError::Parse {
        line,
        message: e.to_string(),
    })
}
