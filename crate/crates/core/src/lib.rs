pub mod bounds;
pub mod cli;
pub mod error;
pub mod exec;
pub mod gibbs;
pub mod recoding;
pub mod subshift;
pub mod symbolic;
pub mod tm;
pub mod wang;
