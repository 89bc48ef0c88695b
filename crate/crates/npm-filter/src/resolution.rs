//! Finding the source repository of an npm package.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use npm_filter_core::registry::{repo_from_html, repo_from_metadata};
use npm_filter_core::{BackoffPolicy, RegistryError, RepoRef};

pub const REGISTRY_URL: &str = "https://registry.npmjs.org";
pub const WEBSITE_URL: &str = "https://www.npmjs.com/package";

#[derive(Debug, thiserror::Error)]
pub enum ResolveError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("cannot read saved page {path}: {source}")]
    SavedPage { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// A blocking HTTP GET. Errors are connection-level failures; any HTTP
/// status is an `Ok` response.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .user_agent(concat!("npm-filter/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        Self { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let mut body = String::new();
        resp.body_mut()
            .as_reader()
            .read_to_string(&mut body)
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

/// Spaces requests at least `interval` apart, across all threads sharing it.
#[derive(Debug)]
pub struct Throttle {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl Throttle {
    pub fn new(interval: Duration) -> Self {
        Self { interval, next_slot: Mutex::new(None) }
    }

    /// Blocks until the caller may send a request.
    pub fn wait(&self) {
        let slot = {
            let mut next = self.next_slot.lock().unwrap();
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
    }
}

impl Default for Throttle {
    /// One request per second.
    fn default() -> Self {
        Self::new(Duration::from_secs(1))
    }
}

pub struct Resolver {
    transport: Arc<dyn Transport>,
    throttle: Arc<Throttle>,
    policy: BackoffPolicy,
    registry_url: String,
    website_url: String,
}

impl Resolver {
    pub fn new(transport: Arc<dyn Transport>, throttle: Arc<Throttle>, policy: BackoffPolicy) -> Self {
        Self {
            transport,
            throttle,
            policy,
            registry_url: REGISTRY_URL.to_owned(),
            website_url: WEBSITE_URL.to_owned(),
        }
    }

    /// A resolver talking to the public registry.
    pub fn public() -> Self {
        Self::new(Arc::new(UreqTransport::default()), Arc::new(Throttle::default()), BackoffPolicy::default())
    }

    pub fn with_endpoints(mut self, registry_url: &str, website_url: &str) -> Self {
        self.registry_url = registry_url.trim_end_matches('/').to_owned();
        self.website_url = website_url.trim_end_matches('/').to_owned();
        self
    }

    /// Repository of package `name`. With `html_override`, the saved page is
    /// parsed and nothing is fetched.
    pub fn resolve(&self, name: &str, html_override: Option<&Path>) -> Result<RepoRef, ResolveError> {
        let url = match html_override {
            Some(path) => {
                let html = fs::read_to_string(path)
                    .map_err(|source| ResolveError::SavedPage { path: path.to_owned(), source })?;
                repo_from_html(name, &html)?
            }
            None => self.fetch_repo_url(name)?,
        };
        RepoRef::new(&url, Some(name))
            .map_err(|e| RegistryError::ParseFailure(e.to_string()).into())
    }

    fn fetch_repo_url(&self, name: &str) -> Result<String, RegistryError> {
        let encoded = name.replace('/', "%2F");
        let metadata = self
            .get_with_retry(&format!("{}/{encoded}", self.registry_url))
            .and_then(|body| repo_from_metadata(name, &body));
        match metadata {
            Ok(url) => Ok(url),
            Err(e @ RegistryError::NoRepoLink { .. }) => Err(e),
            Err(e) => {
                log::warn!("{name}: registry metadata unusable ({e}), trying the package page");
                let page = self.get_with_retry(&format!("{}/{name}", self.website_url))?;
                repo_from_html(name, &page)
            }
        }
    }

    /// GETs `url`, retrying rate-limit responses and connection failures
    /// according to the backoff policy.
    fn get_with_retry(&self, url: &str) -> Result<String, RegistryError> {
        let mut retry = 0;
        loop {
            self.throttle.wait();
            let failure = match self.transport.get(url) {
                Ok(resp) if resp.status == 200 => return Ok(resp.body),
                Ok(resp) if BackoffPolicy::is_retryable(resp.status) => format!("HTTP {}", resp.status),
                Ok(resp) => {
                    return Err(RegistryError::NetworkFailure(format!("{url}: HTTP {}", resp.status)))
                }
                Err(e) => e,
            };
            match self.policy.delay(retry) {
                Some(delay) => {
                    log::info!("{url}: {failure}, retrying in {delay:?}");
                    thread::sleep(delay);
                    retry += 1;
                }
                None => {
                    return Err(RegistryError::NetworkFailure(format!(
                        "{url}: {failure} (gave up after {} retries)",
                        self.policy.max_retries
                    )))
                }
            }
        }
    }
}
