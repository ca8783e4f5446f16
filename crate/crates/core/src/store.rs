//! Persistent witness cache: one JSON file, rewritten atomically.
//!
//! Every entry is recounted and certified when the file is loaded; a store
//! holding a wrong or unparsable witness fails to load instead of silently
//! shrinking. Writers take an advisory lock file (`<store>.lock`) for the
//! whole load-modify-save cycle.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::constructions::MapClass;
use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};
use crate::patterns::{self, AchievabilityTable, KnownWitness, Provenance, Status};

pub const STORE_VERSION: u32 = 1;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StoreEntry {
    pub k: usize,
    pub class: MapClass,
    pub t: u64,
    #[serde(with = "linalg::matrix_text")]
    pub matrix: RatMatrix,
    /// Construction name, or `"search"`.
    pub provenance: String,
    /// Store generation at which the entry was written.
    pub verified_at: u64,
}

impl StoreEntry {
    fn key(&self) -> (usize, MapClass, u64) {
        (self.k, self.class, self.t)
    }

    fn known(&self) -> KnownWitness {
        let provenance = if self.provenance == "search" {
            let pattern = patterns::Pattern::new(self.k, trace_bits(&self.matrix))
                .map(|p| p.to_hex())
                .unwrap_or_default();
            Provenance::Search { pattern }
        } else {
            Provenance::Construction {
                name: self.provenance.clone(),
            }
        };
        KnownWitness {
            t: self.t,
            matrix: self.matrix.clone(),
            provenance,
        }
    }

    /// Recount and class certificate.
    pub fn verify(&self) -> Result<()> {
        patterns::check_witness(self.k, self.class, &self.known())
    }
}

fn trace_bits(l: &RatMatrix) -> u64 {
    let map = crate::cube::AffineMap::linear(l.clone());
    crate::cube::count_points(&map, true)
        .ok()
        .and_then(|t| t.points)
        .map_or(0, |p| p.into_iter().fold(0, |acc, b| acc | 1 << b))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct WitnessStore {
    pub version: u32,
    /// Incremented on every save.
    pub generation: u64,
    pub entries: Vec<StoreEntry>,
}

impl Default for WitnessStore {
    fn default() -> Self {
        Self {
            version: STORE_VERSION,
            generation: 0,
            entries: Vec::new(),
        }
    }
}

impl WitnessStore {
    pub fn from_json(text: &str) -> Result<Self> {
        let store: WitnessStore =
            serde_json::from_str(text).map_err(|e| Error::Store(format!("corrupt store: {e}")))?;
        if store.version != STORE_VERSION {
            return Err(Error::Store(format!(
                "unsupported store version {} (expected {STORE_VERSION})",
                store.version
            )));
        }
        let mut seen = BTreeMap::new();
        for (i, e) in store.entries.iter().enumerate() {
            if let Some(j) = seen.insert(e.key(), i) {
                return Err(Error::Store(format!(
                    "entries {j} and {i} both hold k = {}, class = {}, t = {}",
                    e.k, e.class, e.t
                )));
            }
            e.verify()
                .map_err(|err| Error::Store(format!("entry {i} is stale: {err}")))?;
        }
        Ok(store)
    }

    /// Loads and re-verifies; a missing file is an empty store.
    pub fn load(path: &Path) -> Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => Self::from_json(&text),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes to a temporary file in the same directory, then renames it
    /// over `path`.
    pub fn save(&mut self, path: &Path) -> Result<()> {
        self.generation += 1;
        self.entries.sort_by_key(StoreEntry::key);
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, self)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    pub fn get(&self, k: usize, class: MapClass, t: u64) -> Option<&StoreEntry> {
        self.entries.iter().find(|e| e.key() == (k, class, t))
    }

    /// Adds a verified entry unless one already exists for its
    /// `(k, class, t)`. Returns whether it was added.
    pub fn insert(
        &mut self,
        k: usize,
        class: MapClass,
        t: u64,
        matrix: RatMatrix,
        provenance: String,
    ) -> Result<bool> {
        if self.get(k, class, t).is_some() {
            return Ok(false);
        }
        let entry = StoreEntry {
            k,
            class,
            t,
            matrix,
            provenance,
            verified_at: self.generation + 1,
        };
        entry.verify()?;
        self.entries.push(entry);
        Ok(true)
    }

    /// Adds every realizable table entry not yet stored.
    pub fn merge_table(&mut self, table: &AchievabilityTable) -> Result<usize> {
        let mut added = 0;
        for e in &table.entries {
            if let Status::Realizable {
                provenance,
                witness,
                ..
            } = &e.status
            {
                if self.insert(
                    table.k,
                    table.class,
                    e.t,
                    witness.clone(),
                    provenance.label(),
                )? {
                    added += 1;
                }
            }
        }
        Ok(added)
    }

    /// Stored witnesses usable for `class` in dimension `k`: entries of that
    /// class or a more restrictive one.
    pub fn known(&self, k: usize, class: MapClass) -> Vec<KnownWitness> {
        let mut out: BTreeMap<u64, (MapClass, KnownWitness)> = BTreeMap::new();
        for e in self
            .entries
            .iter()
            .filter(|e| e.k == k && e.class.implies(class))
        {
            // prefer the entry stored for exactly this class
            match out.get(&e.t) {
                Some((c, _)) if *c == class => {}
                _ => {
                    out.insert(e.t, (e.class, e.known()));
                }
            }
        }
        out.into_values().map(|(_, w)| w).collect()
    }
}

/// Advisory lock held while a store file is read and rewritten.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
}

impl StoreLock {
    pub fn lock_path(store: &Path) -> PathBuf {
        let mut name = store.as_os_str().to_owned();
        name.push(".lock");
        PathBuf::from(name)
    }

    /// Creates `<store>.lock`, retrying until `wait` has elapsed.
    pub fn acquire(store: &Path, wait: Duration) -> Result<Self> {
        let path = Self::lock_path(store);
        let start = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    let _ = writeln!(f, "{}", std::process::id());
                    return Ok(Self { path });
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    if start.elapsed() >= wait {
                        return Err(Error::Store(format!(
                            "{} is held by another writer",
                            path.display()
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(50));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_reverify() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        let mut s = WitnessStore::load(&path).unwrap();
        assert!(s.entries.is_empty());
        let l = RatMatrix::from_i64(1, 2, &[1, 1]);
        assert!(s
            .insert(2, MapClass::General, 3, l.clone(), "AllOnes(k=2)".into())
            .unwrap());
        assert!(!s
            .insert(2, MapClass::General, 3, l, "again".into())
            .unwrap());
        s.save(&path).unwrap();
        let back = WitnessStore::load(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.generation, 1);
        assert_eq!(back.known(2, MapClass::General).len(), 1);
        assert!(back.known(2, MapClass::Isometry).is_empty());
    }

    #[test]
    fn wrong_counts_are_rejected() {
        let l = RatMatrix::from_i64(1, 2, &[1, 1]);
        let mut s = WitnessStore::default();
        assert!(s
            .insert(2, MapClass::General, 4, l.clone(), "x".into())
            .is_err());
        s.entries.push(StoreEntry {
            k: 2,
            class: MapClass::General,
            t: 4,
            matrix: l,
            provenance: "x".into(),
            verified_at: 0,
        });
        let text = serde_json::to_string(&s).unwrap();
        assert!(matches!(
            WitnessStore::from_json(&text),
            Err(Error::Store(_))
        ));
        assert!(WitnessStore::from_json("{not json").is_err());
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let e = StoreEntry {
            k: 1,
            class: MapClass::General,
            t: 2,
            matrix: RatMatrix::identity(1),
            provenance: "search".into(),
            verified_at: 1,
        };
        let s = WitnessStore {
            version: STORE_VERSION,
            generation: 1,
            entries: vec![e.clone(), e],
        };
        let text = serde_json::to_string(&s).unwrap();
        assert!(WitnessStore::from_json(&text).is_err());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        let held = StoreLock::acquire(&path, Duration::ZERO).unwrap();
        assert!(StoreLock::acquire(&path, Duration::from_millis(60)).is_err());
        drop(held);
        assert!(StoreLock::acquire(&path, Duration::ZERO).is_ok());
    }
}
