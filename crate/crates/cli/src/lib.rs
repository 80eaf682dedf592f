//! Pipeline commands behind the `belief` binary: simulate sessions, fit and
//! classify, measure bias impact, settle payments and serve the
//! elicitation endpoints.

pub mod estimate;
pub mod impact;
pub mod io;
pub mod pay;
pub mod serve;
pub mod simulate;
