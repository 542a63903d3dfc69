use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::profile::UserProfile;
use crate::error::{Error, Result};

/// One JSON file per user, replaced atomically on every write. Readers get
/// immutable snapshots; writes for a user are serialized.
#[derive(Debug)]
pub struct ProfileStore {
    dir: PathBuf,
    cache: RwLock<HashMap<String, Arc<UserProfile>>>,
    writers: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn valid_user(user: &str) -> bool {
    !user.is_empty()
        && user.len() <= 128
        && user.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !user.starts_with('.')
}

impl ProfileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ProfileStore {
            dir,
            cache: RwLock::new(HashMap::new()),
            writers: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, user: &str) -> Result<PathBuf> {
        if !valid_user(user) {
            return Err(Error::InvalidUser(user.to_string()));
        }
        Ok(self.dir.join(format!("{user}.json")))
    }

    pub fn get(&self, user: &str) -> Result<Option<Arc<UserProfile>>> {
        let path = self.path_of(user)?;
        if let Some(p) = self.cache.read().expect("profile cache poisoned").get(user) {
            return Ok(Some(p.clone()));
        }
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        let profile = Arc::new(serde_json::from_str::<UserProfile>(&text)?);
        self.cache
            .write()
            .expect("profile cache poisoned")
            .entry(user.to_string())
            .or_insert_with(|| profile.clone());
        Ok(Some(profile))
    }

    /// Stored profile or a fresh empty one; nothing is written.
    pub fn get_or_empty(&self, user: &str) -> Result<Arc<UserProfile>> {
        Ok(self.get(user)?.unwrap_or_else(|| Arc::new(UserProfile::empty(user))))
    }

    pub fn put(&self, profile: UserProfile) -> Result<Arc<UserProfile>> {
        let lock = self.writer(&profile.user)?;
        let _guard = lock.lock().expect("profile writer poisoned");
        self.write_locked(profile)
    }

    /// Applies `f` to the user's profile (created empty if missing) under the
    /// user's write lock and persists the result.
    pub fn update<R>(&self, user: &str, f: impl FnOnce(&mut UserProfile) -> R) -> Result<(Arc<UserProfile>, R)> {
        let lock = self.writer(user)?;
        let _guard = lock.lock().expect("profile writer poisoned");
        let mut profile = (*self.get_or_empty(user)?).clone();
        let r = f(&mut profile);
        Ok((self.write_locked(profile)?, r))
    }

    pub fn users(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for entry in std::fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))? {
            let path = entry.map_err(|e| Error::io(&self.dir, e))?.path();
            if path.extension().is_some_and(|x| x == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    out.push(stem.to_string());
                }
            }
        }
        out.sort();
        Ok(out)
    }

    fn writer(&self, user: &str) -> Result<Arc<Mutex<()>>> {
        self.path_of(user)?;
        Ok(self
            .writers
            .lock()
            .expect("writer table poisoned")
            .entry(user.to_string())
            .or_default()
            .clone())
    }

    fn write_locked(&self, profile: UserProfile) -> Result<Arc<UserProfile>> {
        let path = self.path_of(&profile.user)?;
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec_pretty(&profile)?;
        let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&body).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        let snapshot = Arc::new(profile);
        self.cache
            .write()
            .expect("profile cache poisoned")
            .insert(snapshot.user.clone(), snapshot.clone());
        Ok(snapshot)
    }
}
