pub mod beta;
pub mod special;
pub mod experiment;
pub mod estimation;
pub mod impact;
pub mod population;
pub mod report;
pub mod scoring;
pub mod session;
