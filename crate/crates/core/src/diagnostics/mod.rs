//! Estimate ledgers, a priori checks, uniqueness gaps, sweeps and the
//! fixed verification suites.

pub mod apriori;
pub mod ledger;
pub mod scenario;
pub mod suites;
pub mod sweeps;
pub mod uniqueness;

pub use crate::semigroup::{damping_report, DampingReport};
pub use apriori::{check_apriori, select_cutoff, AprioriReport, Check};
pub use ledger::{build_ledger, hypothesis_norms, EstimateLedger, HypothesisNorms, LedgerBuilder, LedgerRow};
pub use uniqueness::{uniqueness_gap, GapLedger, GapRow};
