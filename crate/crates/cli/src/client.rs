//! Blocking HTTP client for a remote backend.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;
use ureq::Agent;

use wordsig_core::backend::wire::{
    DfRequest, DfResponse, ErrorResponse, HealthResponse, VectorsRequest, VectorsResponse,
};
use wordsig_core::backend::DfService;
use wordsig_core::error::BackendError;

#[derive(Debug, Clone)]
pub struct HttpBackend {
    base: String,
    agent: Agent,
}

fn transport_error(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Json(e) => BackendError::Rejected(format!("malformed response: {e}")),
        other => BackendError::Connectivity(other.to_string()),
    }
}

impl HttpBackend {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base: base_url.trim_end_matches('/').to_string(),
            agent,
        }
    }

    fn decode<T: DeserializeOwned>(
        mut resp: ureq::http::Response<ureq::Body>,
    ) -> Result<T, BackendError> {
        let status = resp.status();
        if status.is_success() {
            return resp.body_mut().read_json::<T>().map_err(transport_error);
        }
        let text = resp.body_mut().read_to_string().unwrap_or_default();
        let message = serde_json::from_str::<ErrorResponse>(&text)
            .map(|e| e.error)
            .unwrap_or(text);
        if status.as_u16() == 503 && message.contains("model") {
            return Err(BackendError::ModelUnavailable);
        }
        Err(BackendError::Rejected(format!("{status}: {message}")))
    }

    fn post<B: Serialize, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T, BackendError> {
        let resp = self
            .agent
            .post(format!("{}{path}", self.base))
            .send_json(body)
            .map_err(transport_error)?;
        Self::decode(resp)
    }

    pub fn health(&self) -> Result<HealthResponse, BackendError> {
        let resp = self
            .agent
            .get(format!("{}/v1/health", self.base))
            .call()
            .map_err(transport_error)?;
        Self::decode(resp)
    }
}

impl DfService for HttpBackend {
    fn submit_df(&self, request: &DfRequest) -> Result<DfResponse, BackendError> {
        self.post("/v1/df", request)
    }

    fn fetch_vectors(&self, request: &VectorsRequest) -> Result<VectorsResponse, BackendError> {
        self.post("/v1/vectors", request)
    }
}
