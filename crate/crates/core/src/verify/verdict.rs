use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Nonincreasing,
    Sound,
    Complete,
    LevelsetSync,
    CriticalPoints,
    ManifoldContainment,
    Invariance,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Nonincreasing => "nonincreasing",
            VerdictKind::Sound => "sound",
            VerdictKind::Complete => "complete",
            VerdictKind::LevelsetSync => "levelset_sync",
            VerdictKind::CriticalPoints => "critical_points",
            VerdictKind::ManifoldContainment => "manifold_containment",
            VerdictKind::Invariance => "invariance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum Status {
    Pass,
    Fail,
    /// The check's precondition does not hold, e.g. a critical level.
    NotApplicable(String),
}

/// A point, time or value that explains a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Default)]
pub struct Witness {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Witness {
    pub fn new(label: impl Into<String>) -> Self {
        Witness {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn at(mut self, point: &[f64]) -> Self {
        self.point = Some(point.to_vec());
        self
    }

    pub fn time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// What was checked, e.g. a family name or `phi1 level 4`.
    pub subject: String,
    pub pass: bool,
    #[serde(flatten)]
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub tolerances: BTreeMap<String, f64>,
    pub coverage: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(kind: VerdictKind, subject: impl Into<String>) -> Self {
        Verdict {
            kind,
            subject: subject.into(),
            pass: true,
            status: Status::Pass,
            witnesses: Vec::new(),
            tolerances: BTreeMap::new(),
            coverage: String::new(),
            notes: Vec::new(),
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn coverage(mut self, text: impl Into<String>) -> Self {
        self.coverage = text.into();
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn witness(&mut self, w: Witness) {
        self.witnesses.push(w);
    }

    /// Marks the verdict failed. Callers attach witnesses before or after.
    pub fn fail(&mut self) {
        self.pass = false;
        self.status = Status::Fail;
    }

    pub fn not_applicable(mut self, reason: impl Into<String>) -> Self {
        self.pass = false;
        self.status = Status::NotApplicable(reason.into());
        self
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn is_applicable(&self) -> bool {
        !matches!(self.status, Status::NotApplicable(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match &self.status {
            Status::Pass => "PASS".to_string(),
            Status::Fail => "FAIL".to_string(),
            Status::NotApplicable(r) => format!("N/A ({r})"),
        };
        write!(f, "{} [{}]: {}", self.kind.name(), self.subject, status)?;
        if !self.coverage.is_empty() {
            write!(f, "; {}", self.coverage)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut v = Verdict::new(VerdictKind::CriticalPoints, "phi")
            .tolerance("grad", 1e-6)
            .coverage("1 equilibrium");
        v.fail();
        v.witness(Witness::new("equilibrium").at(&[0.0, 0.0]).value(1.0));
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"critical_points","subject":"phi","pass":false,"status":"fail","witnesses":[{"label":"equilibrium","point":[0.0,0.0],"value":1.0}],"tolerances":{"grad":1e-6},"coverage":"1 equilibrium"}"#
        );
    }

    #[test]
    fn not_applicable_is_not_a_failure() {
        let v = Verdict::new(VerdictKind::LevelsetSync, "phi").not_applicable("critical value");
        assert!(!v.failed());
        assert!(!v.pass);
        assert!(v.to_string().contains("N/A (critical value)"));
    }
}
