use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("thesaurus line {line}: {message}")]
    Thesaurus { line: usize, message: String },

    #[error("query syntax error at byte {position}: {message}")]
    QuerySyntax { position: usize, message: String },

    #[error("unknown descriptor \"{0}\"")]
    UnknownDescriptor(String),

    #[error("pattern map line {line}: {message}")]
    PatternMap { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown country \"{0}\"")]
    UnknownCountry(String),

    #[error("layout produced non-finite coordinates at iteration {iteration}")]
    LayoutDiverged { iteration: usize },

    #[error("citation data incomplete for publication years {years:?} (window needs citations through {needed}, data complete through {available})")]
    IncompleteCitations {
        years: Vec<i32>,
        needed: i32,
        available: i32,
    },

    #[error("ledger invariant violated: {0}")]
    Ledger(String),

    #[error("map table line {line}: {message}")]
    MapTable { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
