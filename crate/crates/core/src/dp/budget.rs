use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub component: String,
    pub epsilon: f64,
}

/// Total privacy budget with a record of every spend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon_total: f64,
    ledger: Vec<LedgerEntry>,
}

impl PrivacyBudget {
    pub fn new(epsilon_total: f64) -> Result<Self> {
        if !(epsilon_total > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon_total}")));
        }
        Ok(PrivacyBudget { epsilon_total, ledger: Vec::new() })
    }

    pub fn epsilon_total(&self) -> f64 {
        self.epsilon_total
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn spent(&self) -> f64 {
        self.ledger.iter().map(|e| e.epsilon).sum()
    }

    pub fn remaining(&self) -> f64 {
        self.epsilon_total - self.spent()
    }

    /// Record a spend. Fails if it would exceed the total.
    pub fn spend(&mut self, component: impl Into<String>, epsilon: f64) -> Result<()> {
        let component = component.into();
        if !(epsilon >= 0.0) {
            return Err(Error::invalid(format!("{component}: negative spend {epsilon}")));
        }
        if self.spent() + epsilon > self.epsilon_total + SLACK {
            return Err(Error::invalid(format!(
                "{component}: spending {epsilon} exceeds the remaining budget {}",
                self.remaining()
            )));
        }
        self.ledger.push(LedgerEntry { component, epsilon });
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.ledger).expect("ledger serializes")
    }
}
