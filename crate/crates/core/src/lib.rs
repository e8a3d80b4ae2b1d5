pub mod dot;
pub mod gen;
pub mod graph;
pub mod instance;
pub mod mis;
pub mod oracle;
pub mod pipeline;
pub mod prune;
pub mod squares;
pub mod suite;
