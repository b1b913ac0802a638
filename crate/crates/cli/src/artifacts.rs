//! Artifact files, their SHA-256 digests and the manifests tying each
//! command's outputs to its inputs.

use std::fs;
use std::io;
use std::path::Path;

use anyhow::Context;
use floorplan_core::dfg::{parse_dfg, serialize_dfg};
use floorplan_core::library::REFERENCE_LIBRARY;
use floorplan_core::{Dfg, TaskLibrary};
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Structural digest of a graph: its serialisation with the id blanked,
/// so a graph re-saved under another id still matches.
pub fn dfg_digest(dfg: &Dfg) -> String {
    sha256_hex(serialize_dfg(&dfg.clone().with_id("_")).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digest {
    pub name: String,
    pub sha256: String,
}

impl Digest {
    pub fn of(name: impl Into<String>, bytes: &[u8]) -> Self {
        Digest {
            name: name.into(),
            sha256: sha256_hex(bytes),
        }
    }
}

/// Sidecar written next to every command's outputs. Names are relative
/// (file names or logical input names) so manifests do not depend on
/// where the output directory lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub case: Option<String>,
    pub inputs: Vec<Digest>,
    pub outputs: Vec<Digest>,
    /// Settings the outputs depend on.
    pub settings: serde_json::Value,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, case: Option<String>) -> Self {
        Manifest {
            command: command.to_string(),
            case,
            inputs: Vec::new(),
            outputs: Vec::new(),
            settings: serde_json::Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn input(&self, name: &str) -> Option<&Digest> {
        self.inputs.iter().find(|d| d.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Digest> {
        self.outputs.iter().find(|d| d.name == name)
    }

    /// Writes `name` into `dir` and records its digest as an output.
    pub fn emit(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        write_file(&dir.join(name), contents)?;
        self.outputs.push(Digest::of(name, contents.as_bytes()));
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        write_file(path, &json)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = read_input(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads a required input; a missing file maps to exit status 2.
pub fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::Missing(path.display().to_string()),
        _ => CliError::Other(anyhow::Error::new(e).context(format!("reading {}", path.display()))),
    })
}

pub struct Corpus {
    pub dfgs: Vec<Dfg>,
    /// Digest over the listing and every graph file, in listing order.
    pub digest: Digest,
}

impl Corpus {
    pub fn dfg_digests(&self) -> Vec<String> {
        self.dfgs.iter().map(dfg_digest).collect()
    }
}

/// Loads a corpus directory through its `corpus.csv` listing.
pub fn load_corpus(dir: &Path, name: &str) -> Result<Corpus, CliError> {
    let listing = read_input(&dir.join("corpus.csv"))?;
    let mut hasher = Sha256::new();
    hasher.update(listing.as_bytes());
    let mut dfgs = Vec::new();
    for (n, line) in listing.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let [id, file, ..] = cells.as_slice() else {
            return Err(CliError::Invalid(format!("corpus.csv line {}: expected id,file,...", n + 1)));
        };
        let text = read_input(&dir.join(file))?;
        hasher.update([0]);
        hasher.update(text.as_bytes());
        let dfg = parse_dfg(&text).map_err(|e| CliError::Invalid(format!("{file}: {e}")))?;
        if dfg.id() != *id {
            return Err(CliError::Invalid(format!("{file}: header names {}, listing says {id}", dfg.id())));
        }
        dfgs.push(dfg);
    }
    if dfgs.is_empty() {
        return Err(CliError::Invalid(format!("corpus {} lists no graphs", dir.display())));
    }
    Ok(Corpus {
        dfgs,
        digest: Digest {
            name: name.to_string(),
            sha256: hex::encode(hasher.finalize()),
        },
    })
}

pub struct Library {
    pub lib: TaskLibrary,
    pub digest: Digest,
}

/// Loads a task library file, or the built-in reference library.
pub fn load_library(path: Option<&Path>) -> Result<Library, CliError> {
    let text = match path {
        Some(p) => read_input(p)?,
        None => REFERENCE_LIBRARY.to_string(),
    };
    let lib = TaskLibrary::parse(&text).map_err(|e| CliError::Invalid(format!("task library: {e}")))?;
    Ok(Library {
        lib,
        digest: Digest::of("task_library", text.as_bytes()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use floorplan_core::gen::{generate_corpus, write_corpus};
    use floorplan_core::GenParams;

    #[test]
    fn known_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn dfg_digest_ignores_the_id() {
        let g = floorplan_core::gen::generate_dfg(&GenParams::default(), 3);
        assert_eq!(dfg_digest(&g), dfg_digest(&g.clone().with_id("other")));
        let h = floorplan_core::gen::generate_dfg(&GenParams::default(), 4);
        assert_ne!(dfg_digest(&g), dfg_digest(&h));
    }

    #[test]
    fn corpus_round_trip_and_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = GenParams {
            corpus_size: 4,
            node_count_range: (5, 30),
            ..GenParams::default()
        };
        let corpus = generate_corpus(&p).unwrap();
        write_corpus(dir.path(), &p, &corpus).unwrap();
        let a = load_corpus(dir.path(), "corpus").unwrap();
        assert_eq!(a.dfgs, corpus);
        let b = load_corpus(dir.path(), "corpus").unwrap();
        assert_eq!(a.digest, b.digest);

        let file = dir.path().join(format!("{}.dfg", corpus[2].id()));
        let edited = fs::read_to_string(&file).unwrap() + "# touched\n";
        fs::write(&file, edited).unwrap();
        assert_ne!(load_corpus(dir.path(), "corpus").unwrap().digest, a.digest);
    }

    #[test]
    fn missing_corpus_is_exit_2_and_bad_graph_exit_3() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(load_corpus(dir.path(), "c").err().unwrap().exit_code(), 2);
        fs::write(dir.path().join("corpus.csv"), "id,file,seed,index\ng0,g0.dfg,1,0\n").unwrap();
        fs::write(dir.path().join("g0.dfg"), "dfg g0\nedge 0 1\n").unwrap();
        assert_eq!(load_corpus(dir.path(), "c").err().unwrap().exit_code(), 3);
    }
}
