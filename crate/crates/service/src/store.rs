//! In-memory sessions, with an optional snapshot file that survives a
//! restart.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use toffa_core::{parse_model, parse_scenario, Model, Scenario};

use crate::error::ApiError;

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub source: String,
    pub model: Arc<Model>,
    pub scenario: Option<Scenario>,
    /// Starts at 1 and grows by one per accepted scenario.
    pub version: u64,
    pub created: u64,
    pub updated: u64,
}

pub type SessionHandle = Arc<tokio::sync::Mutex<Session>>;

#[derive(Default)]
pub struct Store {
    sessions: Mutex<HashMap<String, SessionHandle>>,
    counter: AtomicU64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SavedSession {
    id: String,
    source: String,
    scenario: Option<String>,
    version: u64,
    created: u64,
    updated: u64,
}

impl Store {
    fn fresh_id(&self, source: &str) -> String {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        let mut h = Sha256::new();
        h.update(n.to_le_bytes());
        h.update(nanos.to_le_bytes());
        h.update(source.as_bytes());
        hex::encode(&h.finalize()[..12])
    }

    pub fn create(&self, source: String, model: Model) -> Session {
        let t = now();
        let s = Session {
            id: self.fresh_id(&source),
            source,
            model: Arc::new(model),
            scenario: None,
            version: 1,
            created: t,
            updated: t,
        };
        self.sessions
            .lock()
            .expect("session map poisoned")
            .insert(s.id.clone(), Arc::new(tokio::sync::Mutex::new(s.clone())));
        s
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub async fn save(&self, path: &Path) -> std::io::Result<()> {
        let handles: Vec<SessionHandle> = self
            .sessions
            .lock()
            .expect("session map poisoned")
            .values()
            .cloned()
            .collect();
        let mut saved = Vec::new();
        for h in handles {
            let s = h.lock().await;
            saved.push(SavedSession {
                id: s.id.clone(),
                source: s.source.clone(),
                scenario: s.scenario.as_ref().map(Scenario::to_text),
                version: s.version,
                created: s.created,
                updated: s.updated,
            });
        }
        saved.sort_by(|a, b| a.id.cmp(&b.id));
        let text = serde_json::to_string_pretty(&saved).map_err(std::io::Error::other)?;
        tokio::fs::write(path, text).await
    }

    /// Restores sessions written by [`Store::save`]. Entries that no longer
    /// parse are skipped and counted.
    pub fn load(&self, path: &Path) -> std::io::Result<(usize, usize)> {
        let text = std::fs::read_to_string(path)?;
        let saved: Vec<SavedSession> =
            serde_json::from_str(&text).map_err(std::io::Error::other)?;
        let (mut ok, mut skipped) = (0, 0);
        let mut map = self.sessions.lock().expect("session map poisoned");
        for s in saved {
            let Ok(model) = parse_model(&s.source) else {
                skipped += 1;
                continue;
            };
            let scenario = match s.scenario.as_deref().map(parse_scenario) {
                Some(Err(_)) => {
                    skipped += 1;
                    continue;
                }
                other => other.and_then(Result::ok),
            };
            let session = Session {
                id: s.id.clone(),
                source: s.source,
                model: Arc::new(model),
                scenario,
                version: s.version,
                created: s.created,
                updated: s.updated,
            };
            map.insert(s.id, Arc::new(tokio::sync::Mutex::new(session)));
            ok += 1;
        }
        Ok((ok, skipped))
    }
}
