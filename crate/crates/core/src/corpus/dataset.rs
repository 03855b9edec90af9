use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Caption, CorpusError, PosLexicon};

/// One line of the dataset JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetLine {
    pub id: String,
    pub image_id: String,
    pub captions: Vec<String>,
    pub true_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
}

/// One benchmark datum: candidate captions for an image and the index of the true one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalInstance {
    pub id: String,
    pub image_id: String,
    pub captions: Vec<Caption>,
    pub true_index: usize,
    pub relation: Option<String>,
}

impl EvalInstance {
    pub fn true_caption(&self) -> &Caption {
        &self.captions[self.true_index]
    }

    pub fn to_line(&self) -> DatasetLine {
        DatasetLine {
            id: self.id.clone(),
            image_id: self.image_id.clone(),
            captions: self.captions.iter().map(|c| c.text().to_string()).collect(),
            true_index: self.true_index,
            relation: self.relation.clone(),
        }
    }

    fn from_line(line: DatasetLine, lexicon: &PosLexicon) -> Result<Self, String> {
        if line.captions.len() < 2 {
            return Err(format!("{} caption(s); at least 2 required", line.captions.len()));
        }
        if line.true_index >= line.captions.len() {
            return Err(format!(
                "true_index {} out of range for {} captions",
                line.true_index,
                line.captions.len()
            ));
        }
        let captions = line
            .captions
            .iter()
            .enumerate()
            .map(|(i, text)| Caption::new(text, lexicon).map_err(|e| format!("caption {i}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            id: line.id,
            image_id: line.image_id,
            captions,
            true_index: line.true_index,
            relation: line.relation,
        })
    }
}

/// Loads a dataset JSONL file, tokenizing and tagging every caption.
pub fn load_dataset(path: &Path, lexicon: &PosLexicon) -> Result<Vec<EvalInstance>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    parse_dataset(std::io::BufReader::new(file), lexicon)
}

pub fn parse_dataset<R: BufRead>(reader: R, lexicon: &PosLexicon) -> Result<Vec<EvalInstance>, CorpusError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: DatasetLine = serde_json::from_str(&line).map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
        if !seen.insert(raw.id.clone()) {
            return Err(CorpusError::parse(lineno, format!("duplicate id {:?}", raw.id)));
        }
        let inst = EvalInstance::from_line(raw, lexicon).map_err(|m| CorpusError::parse(lineno, m))?;
        out.push(inst);
    }
    Ok(out)
}

/// Writes instances back out in the dataset JSONL format.
pub fn write_dataset<W: Write>(mut w: W, instances: &[EvalInstance]) -> std::io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut w, &inst.to_line())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
