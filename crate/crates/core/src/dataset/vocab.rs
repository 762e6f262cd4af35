use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/arpabet.tsv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhoneClass {
    Vowel,
    Consonant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manner {
    Plosive,
    Fricative,
    Nasal,
    Other,
}

impl Manner {
    pub fn as_str(self) -> &'static str {
        match self {
            Manner::Plosive => "plosive",
            Manner::Fricative => "fricative",
            Manner::Nasal => "nasal",
            Manner::Other => "other",
        }
    }

    /// Plosives, fricatives and nasals: the manners that define vowel contexts.
    pub fn is_obstruent_or_nasal(self) -> bool {
        !matches!(self, Manner::Other)
    }
}

impl fmt::Display for Manner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Manner {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plosive" => Ok(Manner::Plosive),
            "fricative" => Ok(Manner::Fricative),
            "nasal" => Ok(Manner::Nasal),
            "other" => Ok(Manner::Other),
            _ => Err(format!("unknown manner {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub label: String,
    pub class: PhoneClass,
    pub manner: Manner,
}

/// Ordered phoneme table; an entry's position is its label index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhonemeVocab {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
}

impl PhonemeVocab {
    pub fn new(entries: Vec<VocabEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Vocab {
                line: 0,
                message: "vocabulary is empty".into(),
            });
        }
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.label.clone(), i).is_some() {
                return Err(Error::Vocab {
                    line: i + 1,
                    message: format!("duplicate label {:?}", e.label),
                });
            }
        }
        Ok(PhonemeVocab { entries, index })
    }

    /// The 39-phoneme ARPAbet table shipped with the crate.
    pub fn default_arpabet() -> Self {
        Self::parse_tsv(DEFAULT_TABLE).expect("bundled vocabulary is valid")
    }

    /// Parses `label<TAB>V|C<TAB>manner` lines; blank lines and `#` comments are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Vocab {
                line: lineno,
                message,
            };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 columns, found {}", cols.len())));
            }
            if cols[0].is_empty() {
                return Err(err("empty label".into()));
            }
            let class = match cols[1] {
                "V" => PhoneClass::Vowel,
                "C" => PhoneClass::Consonant,
                other => return Err(err(format!("class must be V or C, found {other:?}"))),
            };
            let manner = cols[2].parse::<Manner>().map_err(err)?;
            if let Some(prev) = seen.insert(cols[0].to_string(), lineno) {
                return Err(err(format!(
                    "duplicate label {:?} (first on line {prev})",
                    cols[0]
                )));
            }
            entries.push(VocabEntry {
                label: cols[0].to_string(),
                class,
                manner,
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# label\tclass\tmanner\n");
        for e in &self.entries {
            let class = match e.class {
                PhoneClass::Vowel => "V",
                PhoneClass::Consonant => "C",
            };
            out.push_str(&format!("{}\t{}\t{}\n", e.label, class, e.manner));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &VocabEntry {
        &self.entries[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.entries[index].label
    }

    pub fn is_vowel(&self, index: usize) -> bool {
        self.entries[index].class == PhoneClass::Vowel
    }

    pub fn manner(&self, index: usize) -> Manner {
        self.entries[index].manner
    }

    pub fn count_class(&self, class: PhoneClass) -> usize {
        self.entries.iter().filter(|e| e.class == class).count()
    }
}
