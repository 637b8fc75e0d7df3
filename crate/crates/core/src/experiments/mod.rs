//! Verification campaigns, counterexample search and figure fixtures.

pub mod campaign;
pub mod figures;
pub mod records;
pub mod search;
pub mod strong;

pub use campaign::{
    campaign, campaign_pair, dump_violations, verify_intersection_pair, verify_union_pair, within_hypotheses,
    CampaignSpec, CampaignSummary, TheoremId, ViolationFixture,
};
pub use figures::{figure_fixtures, FigureReports};
pub use records::{read_results_csv, write_results_csv, Method, VerificationRecord, Verdict};
pub use search::{anneal_search, Schedule, SearchParams, SearchState};
pub use strong::{strong_contraction_campaign, BodyFamily, StrongMode, StrongSpec};
