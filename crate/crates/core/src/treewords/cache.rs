use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::{count_table, CountTable, DEFAULT_GUARD};
use crate::error::{Error, Result};

/// Bumped whenever the on-disk table layout or the enumeration changes.
/// Files written under another version are ignored and recomputed.
pub const COUNT_TABLE_SCHEMA_VERSION: u32 = 1;

/// Anything that can hand out exact count tables by half-length.
pub trait CountTableSource: Sync {
    fn count_table(&self, k: u32) -> Result<Arc<CountTable>>;

    /// Largest half-length this source will enumerate.
    fn guard(&self) -> u32;
}

/// Memoizing table provider with an optional JSON cache directory.
#[derive(Debug)]
pub struct TableCache {
    guard: u32,
    dir: Option<PathBuf>,
    memo: Mutex<HashMap<u32, Arc<CountTable>>>,
}

impl Default for TableCache {
    fn default() -> Self {
        Self::in_memory(DEFAULT_GUARD)
    }
}

impl TableCache {
    pub fn in_memory(guard: u32) -> Self {
        Self {
            guard,
            dir: None,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_dir(dir: impl Into<PathBuf>, guard: u32) -> Self {
        Self {
            dir: Some(dir.into()),
            ..Self::in_memory(guard)
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Cache file for half-length `k` under the current schema version.
    pub fn file_for(dir: &Path, k: u32) -> PathBuf {
        dir.join(format!("count_table_v{COUNT_TABLE_SCHEMA_VERSION}_k{k}.json"))
    }

    fn load_from_disk(&self, k: u32) -> Option<CountTable> {
        let path = Self::file_for(self.dir.as_ref()?, k);
        let text = fs::read_to_string(path).ok()?;
        // A corrupt or stale file is simply recomputed.
        CountTable::from_json(&text).ok().filter(|t| t.k() == k)
    }

    fn store_to_disk(&self, table: &CountTable) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        fs::create_dir_all(dir)
            .map_err(|e| Error::Cache(format!("cannot create {}: {e}", dir.display())))?;
        let path = Self::file_for(dir, table.k());
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, table.to_json()?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

impl CountTableSource for TableCache {
    fn count_table(&self, k: u32) -> Result<Arc<CountTable>> {
        if let Some(t) = self.memo.lock().expect("table cache poisoned").get(&k) {
            return Ok(Arc::clone(t));
        }
        let table = match self.load_from_disk(k) {
            Some(t) => t,
            None => {
                let t = count_table(k, self.guard)?;
                self.store_to_disk(&t)?;
                t
            }
        };
        let table = Arc::new(table);
        self.memo
            .lock()
            .expect("table cache poisoned")
            .insert(k, Arc::clone(&table));
        Ok(table)
    }

    fn guard(&self) -> u32 {
        self.guard
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_round_trip_and_stale_files() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::with_dir(dir.path(), DEFAULT_GUARD);
        let t = cache.count_table(4).unwrap();
        let path = TableCache::file_for(dir.path(), 4);
        assert!(path.exists());

        let fresh = TableCache::with_dir(dir.path(), DEFAULT_GUARD);
        assert_eq!(*fresh.count_table(4).unwrap(), *t);

        fs::write(&path, "{ not json").unwrap();
        let again = TableCache::with_dir(dir.path(), DEFAULT_GUARD);
        assert_eq!(*again.count_table(4).unwrap(), *t);
        assert!(CountTable::from_json(&fs::read_to_string(&path).unwrap()).is_ok());
    }

    #[test]
    fn guard_is_enforced() {
        let cache = TableCache::in_memory(3);
        assert!(matches!(
            cache.count_table(4),
            Err(Error::ResourceLimit { k: 4, guard: 3 })
        ));
    }
}
