//! SPARQL protocol client over HTTP.

use std::time::Duration;

use sparqlrest_core::sparql::RESULTS_JSON;
use sparqlrest_core::{ClientError, Endpoint, HttpMethod, RawResponse};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Blocking client; clones share one connection pool.
#[derive(Clone)]
pub struct HttpEndpoint {
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(timeout: Duration) -> Self {
        HttpEndpoint { agent: ureq::AgentBuilder::new().timeout(timeout).build() }
    }
}

impl Default for HttpEndpoint {
    fn default() -> Self {
        HttpEndpoint::new(DEFAULT_TIMEOUT)
    }
}

impl std::fmt::Debug for HttpEndpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("HttpEndpoint")
    }
}

impl Endpoint for HttpEndpoint {
    fn dispatch(&self, endpoint: &str, query: &str, method: HttpMethod) -> Result<RawResponse, ClientError> {
        let sent = match method {
            HttpMethod::Get => self.agent.get(endpoint).query("query", query).set("Accept", RESULTS_JSON).call(),
            HttpMethod::Post => self.agent.post(endpoint).set("Accept", RESULTS_JSON).send_form(&[("query", query)]),
        };
        match sent {
            Ok(response) => {
                let status = response.status();
                let media_type = response.header("Content-Type").unwrap_or_default().to_owned();
                let body = response.into_string().map_err(|e| ClientError::Unreachable(e.to_string()))?;
                Ok(RawResponse { status, media_type, body })
            }
            Err(ureq::Error::Status(status, response)) => {
                Err(ClientError::Upstream { status, body: response.into_string().unwrap_or_default() })
            }
            Err(ureq::Error::Transport(t)) => Err(ClientError::Unreachable(t.to_string())),
        }
    }
}
