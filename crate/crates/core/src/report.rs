//! Decision reports, typed certificates and the content-addressed store.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{AmenabilityEvidence, AvoidanceEvidence, Coloring, PatternSet};
use crate::error::Result;
use crate::set_algebra::SetSpec;
use crate::strong::{MultisetWitness, ScsCertificate};
use crate::symmetric::{DenseOrbitWitness, SymmetricEvidence};
use crate::syndetic::{SyndeticWitness, ThickRefutation};

pub const REPORT_SCHEMA: &str = "syndetic-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Proved,
    Refuted,
    UndecidedAtScale,
}

impl Verdict {
    /// Process exit code for this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Proved => 0,
            Verdict::Refuted => 1,
            Verdict::UndecidedAtScale => 2,
        }
    }

    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Proved => Verdict::Refuted,
            Verdict::Refuted => Verdict::Proved,
            Verdict::UndecidedAtScale => Verdict::UndecidedAtScale,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "proved",
            Verdict::Refuted => "refuted",
            Verdict::UndecidedAtScale => "undecided-at-scale",
        })
    }
}

/// How far a claim reaches: everywhere, or only on a finite window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scope {
    Exact,
    Window { radius: u64 },
}

impl Scope {
    pub fn is_exact(self) -> bool {
        self == Scope::Exact
    }

    /// The weaker of two scopes.
    pub fn meet(self, other: Scope) -> Scope {
        match (self, other) {
            (Scope::Exact, s) | (s, Scope::Exact) => s,
            (Scope::Window { radius: a }, Scope::Window { radius: b }) => Scope::Window { radius: a.min(b) },
        }
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scope::Exact => f.write_str("exact"),
            Scope::Window { radius } => write!(f, "window(radius {radius})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    Syndetic(SyndeticWitness),
    ThickRefutation(ThickRefutation),
    Scs(ScsCertificate),
    Multiset(MultisetWitness),
    Symmetric(SymmetricEvidence),
    DenseOrbit(DenseOrbitWitness),
    Patterns(PatternSet),
    Avoidance(AvoidanceEvidence),
    Coloring(Coloring),
    Amenability(AmenabilityEvidence),
    Bundle { items: Vec<Certificate> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub schema: String,
    pub command: String,
    pub group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec>,
    pub verdict: Verdict,
    pub scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default)]
    pub scale: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub notes: Vec<String>,
    /// The request that produced this report, for replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl DecisionReport {
    pub fn new(command: &str, group: &str, verdict: Verdict, scope: Scope) -> Self {
        DecisionReport {
            schema: REPORT_SCHEMA.into(),
            command: command.into(),
            group: group.into(),
            set: None,
            verdict,
            scope,
            certificate: None,
            scale: BTreeMap::new(),
            notes: Vec::new(),
            request: None,
            wall_time_ms: None,
        }
    }

    pub fn with_set(mut self, set: SetSpec) -> Self {
        self.set = Some(set);
        self
    }

    pub fn with_certificate(mut self, cert: Certificate) -> Self {
        self.certificate = Some(cert);
        self
    }

    pub fn with_scale(mut self, key: &str, value: impl Serialize) -> Self {
        self.scale.insert(key.into(), serde_json::to_value(value).expect("serializable scale value"));
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    /// Canonical JSON with the timing field removed; two runs with the same
    /// seed and configuration produce identical strings.
    pub fn replay_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_ms = None;
        canonical_json(&r)
    }
}

/// Compact JSON with object keys in sorted order.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string(&sort_keys(v)).expect("serializable")
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(m) => {
            let sorted: BTreeMap<String, serde_json::Value> = m.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            serde_json::Value::Object(sorted.into_iter().collect())
        }
        serde_json::Value::Array(a) => serde_json::Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Hex SHA-256 of the canonical JSON encoding.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let digest = Sha256::digest(canonical_json(value).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Directory of certificates keyed by content hash.
pub struct CertificateStore {
    dir: PathBuf,
}

impl CertificateStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CertificateStore { dir: dir.into() }
    }

    /// Writes the certificate (idempotently) and returns its path.
    pub fn put(&self, cert: &Certificate) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{}.json", content_hash(cert)));
        if !path.exists() {
            std::fs::write(&path, canonical_json(cert))?;
        }
        Ok(path)
    }

    pub fn get(&self, hash: &str) -> Result<Certificate> {
        let text = std::fs::read_to_string(self.dir.join(format!("{hash}.json")))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
