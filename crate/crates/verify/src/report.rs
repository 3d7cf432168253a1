//! Check reports: one record per verified statement, with a pure
//! verdict-derivation rule.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// the confidence interval straddles the threshold; not a refutation
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    /// which statement, e.g. "lsm-properties/3"
    pub theorem: String,
    pub model: String,
    pub statistic: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
    pub n_samples: u64,
    pub detail: String,
}

impl CheckReport {
    /// Statistic-vs-tolerance verdict: pass when the statistic clears the
    /// threshold by its CI, fail when it exceeds by its CI, inconclusive
    /// when the CI straddles.
    pub fn from_statistic(
        theorem: impl Into<String>,
        model: impl Into<String>,
        statistic: f64,
        threshold: f64,
        ci: f64,
        seed: u64,
        n_samples: u64,
        detail: impl Into<String>,
    ) -> CheckReport {
        let verdict = if statistic + ci <= threshold {
            Verdict::Pass
        } else if statistic - ci > threshold {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        CheckReport {
            theorem: theorem.into(),
            model: model.into(),
            statistic,
            threshold,
            p_value: None,
            verdict,
            seed,
            n_samples,
            detail: detail.into(),
        }
    }

    /// P-value verdict at the global threshold (pass means "not rejected").
    pub fn from_p_value(
        theorem: impl Into<String>,
        model: impl Into<String>,
        statistic: f64,
        p_value: f64,
        p_threshold: f64,
        seed: u64,
        n_samples: u64,
        detail: impl Into<String>,
    ) -> CheckReport {
        CheckReport {
            theorem: theorem.into(),
            model: model.into(),
            statistic,
            threshold: p_threshold,
            p_value: Some(p_value),
            verdict: if p_value > p_threshold {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            seed,
            n_samples,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn summary_line(&self) -> String {
        let v = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        match self.p_value {
            Some(p) => format!(
                "{v:13} {:40} [{}] stat {:.4e}, p {:.4}",
                self.theorem, self.model, self.statistic, p
            ),
            None => format!(
                "{v:13} {:40} [{}] stat {:.4e} vs {:.4e}",
                self.theorem, self.model, self.statistic, self.threshold
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rule_is_pure() {
        let pass = CheckReport::from_statistic("t", "m", 0.5, 1.0, 0.1, 0, 10, "");
        assert_eq!(pass.verdict, Verdict::Pass);
        let fail = CheckReport::from_statistic("t", "m", 1.5, 1.0, 0.1, 0, 10, "");
        assert_eq!(fail.verdict, Verdict::Fail);
        let straddle = CheckReport::from_statistic("t", "m", 1.05, 1.0, 0.1, 0, 10, "");
        assert_eq!(straddle.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn json_round_trip() {
        let r = CheckReport::from_p_value("markov/homogeneity", "m", 3.2, 0.4, 0.01, 7, 1000, "");
        let back: CheckReport = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(back.verdict, Verdict::Pass);
        assert_eq!(back.p_value, Some(0.4));
    }
}
