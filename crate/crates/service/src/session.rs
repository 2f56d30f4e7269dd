use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use minesweep_core::engine::GameState;
use minesweep_core::policies::{PolicyContext, VersionId};

pub struct Session {
    pub state: GameState,
    pub ctx: PolicyContext,
    pub version: VersionId,
    pub seed: u64,
    /// Bumped by every mutation.
    pub revision: u64,
    pub last_access: Instant,
}

pub type SessionHandle = Arc<Mutex<Session>>;

/// In-memory sessions. The map lock is held only to look a session up;
/// each session has its own lock, so moves on one game are serialized
/// while other games proceed.
#[derive(Default)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, SessionHandle>>,
}

impl SessionStore {
    fn map(&self) -> MutexGuard<'_, HashMap<String, SessionHandle>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Stores `session` under a fresh random id and returns the id.
    pub fn insert(&self, session: Session) -> String {
        let mut map = self.map();
        let id = loop {
            let id = format!("{:016x}", rand::random::<u64>());
            if !map.contains_key(&id) {
                break id;
            }
        };
        map.insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.map().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.map().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions untouched for longer than `idle` as of `now`; returns
    /// how many were removed. A session whose lock is held is in use and
    /// kept.
    pub fn evict_idle(&self, idle: Duration, now: Instant) -> usize {
        let mut map = self.map();
        let before = map.len();
        map.retain(|_, s| match s.try_lock() {
            Ok(s) => now.saturating_duration_since(s.last_access) <= idle,
            Err(_) => true,
        });
        before - map.len()
    }
}

pub fn lock(handle: &SessionHandle) -> MutexGuard<'_, Session> {
    let mut s = handle.lock().unwrap_or_else(|e| e.into_inner());
    s.last_access = Instant::now();
    s
}
