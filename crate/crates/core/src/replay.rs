//! Record-replay fixtures for HTTP traffic.
//!
//! A fixture directory holds one JSON file per distinct request, named by the
//! request fingerprint: SHA-256 over method, path+query (host excluded, so an
//! API base override does not invalidate recordings) and the canonicalised body.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fsutil::write_atomic;
use crate::http::{HttpRequest, HttpResponse, HttpTransport, Method, TransportError};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Fixture {
    pub method: Method,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_body: Option<serde_json::Value>,
    pub response: RecordedResponse,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RecordedResponse {
    pub status: u16,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub headers: Vec<(String, String)>,
    pub body: String,
}

/// Path and query of a URL, without scheme and host.
pub fn path_of(url: &str) -> &str {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    match rest.find('/') {
        Some(i) => &rest[i..],
        None => "/",
    }
}

fn canonical_body(body: Option<&[u8]>) -> Option<serde_json::Value> {
    let body = body?;
    match serde_json::from_slice::<serde_json::Value>(body) {
        Ok(v) => Some(v),
        Err(_) => Some(serde_json::Value::String(String::from_utf8_lossy(body).into_owned())),
    }
}

pub fn fingerprint(request: &HttpRequest) -> String {
    let mut h = Sha256::new();
    h.update(match request.method {
        Method::Get => b"GET\n".as_slice(),
        Method::Post => b"POST\n".as_slice(),
    });
    h.update(path_of(&request.url).as_bytes());
    h.update(b"\n");
    if let Some(body) = canonical_body(request.body.as_deref()) {
        h.update(body.to_string().as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_for(&self, fp: &str) -> PathBuf {
        self.dir.join(format!("{fp}.json"))
    }

    pub fn lookup(&self, request: &HttpRequest) -> Option<Fixture> {
        let bytes = fs::read(self.file_for(&fingerprint(request))).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn insert(&self, request: &HttpRequest, response: &HttpResponse) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let fixture = Fixture {
            method: request.method,
            path: path_of(&request.url).to_string(),
            request_body: canonical_body(request.body.as_deref()),
            response: RecordedResponse {
                status: response.status,
                headers: response.headers.clone(),
                body: String::from_utf8_lossy(&response.body).into_owned(),
            },
        };
        let path = self.file_for(&fingerprint(request));
        let mut text = serde_json::to_string_pretty(&fixture)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Serves responses from a [`FixtureStore`]; a miss is an error, never a network call.
pub struct ReplayTransport {
    store: FixtureStore,
}

impl ReplayTransport {
    pub fn new(store: FixtureStore) -> Self {
        ReplayTransport { store }
    }
}

impl HttpTransport for ReplayTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let fixture = self.store.lookup(request).ok_or_else(|| {
            TransportError::ReplayMiss(format!(
                "{:?} {} ({})",
                request.method,
                path_of(&request.url),
                fingerprint(request)
            ))
        })?;
        Ok(HttpResponse {
            status: fixture.response.status,
            headers: fixture.response.headers,
            body: fixture.response.body.into_bytes(),
        })
    }
}

/// Forwards to a live transport and records every response it sees.
pub struct RecordingTransport {
    inner: Arc<dyn HttpTransport>,
    store: FixtureStore,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn HttpTransport>, store: FixtureStore) -> Self {
        RecordingTransport { inner, store }
    }
}

impl HttpTransport for RecordingTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let response = self.inner.send(request)?;
        if let Err(e) = self.store.insert(request, &response) {
            log::warn!("could not record fixture: {e}");
        }
        Ok(response)
    }
}
