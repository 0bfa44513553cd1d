use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use distmodes::pipeline::{from_json, to_json, SessionState};

use crate::error::{ApiError, ApiResult};

pub type SessionHandle = Arc<tokio::sync::Mutex<SessionState>>;

/// Sessions held in memory and mirrored to one JSON file each.
#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    open: Mutex<HashMap<String, SessionHandle>>,
}

pub fn check_id(id: &str) -> ApiResult<()> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(ApiError::bad_request(format!("invalid session id {id:?}")))
    }
}

impl SessionStore {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(SessionStore {
            dir,
            open: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// An existing session, from memory or disk.
    pub fn get(&self, id: &str) -> ApiResult<SessionHandle> {
        check_id(id)?;
        let mut open = self.open.lock().expect("session table poisoned");
        if let Some(h) = open.get(id) {
            return Ok(h.clone());
        }
        let path = self.path(id);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ApiError::not_found(format!("unknown session {id:?}")))
            }
            Err(e) => return Err(ApiError::internal(format!("reading {}: {e}", path.display()))),
        };
        let state: SessionState =
            from_json(&text).map_err(|e| ApiError::internal(format!("corrupt session file {}: {e}", path.display())))?;
        let h = Arc::new(tokio::sync::Mutex::new(state));
        open.insert(id.to_string(), h.clone());
        Ok(h)
    }

    /// The session `id`, created empty when it does not exist yet.
    pub fn get_or_create(&self, id: &str) -> ApiResult<SessionHandle> {
        match self.get(id) {
            Err(e) if e.status == axum::http::StatusCode::NOT_FOUND => {
                let mut open = self.open.lock().expect("session table poisoned");
                Ok(open
                    .entry(id.to_string())
                    .or_insert_with(|| Arc::new(tokio::sync::Mutex::new(SessionState::new(id))))
                    .clone())
            }
            other => other,
        }
    }

    /// Writes the session to a temporary file and renames it into place.
    pub fn save(&self, state: &SessionState) -> ApiResult<()> {
        let path = self.path(&state.id);
        let tmp = self.dir.join(format!(".{}.json.tmp", state.id));
        let text = to_json(state).map_err(|e| ApiError::internal(e.to_string()))?;
        std::fs::write(&tmp, text)
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|e| ApiError::internal(format!("writing {}: {e}", path.display())))
    }
}
