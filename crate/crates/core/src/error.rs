use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A text field was empty after whitespace trimming. `index` is the
    /// zero-based row / record position.
    #[error("validation: row {index}: empty {field} text")]
    EmptyText { index: usize, field: &'static str },

    #[error("validation: {0}")]
    Validation(String),

    #[error("alignment: language {language}: expected {expected} sentences, found {actual}")]
    Alignment {
        language: String,
        expected: usize,
        actual: usize,
    },

    #[error("alignment: sentence {sentence_id} has no text for language {language}")]
    MissingText { sentence_id: u64, language: String },

    #[error("language collision: {0}")]
    LanguageCollision(String),

    #[error("need at least {needed} languages, corpus has {available}")]
    TooFewLanguages { needed: usize, available: usize },

    #[error("unknown language {0}")]
    UnknownLanguage(String),

    #[error("{what} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        what: &'static str,
        value: String,
        allowed: String,
    },

    #[error("split sizes sum to {requested} but corpus has {available} records")]
    SplitTooLarge { requested: usize, available: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("batch size {0} is odd and cannot be halved")]
    OddBatch(usize),

    #[error("hypothesis count {hyps} differs from reference count {refs}")]
    LengthMismatch { hyps: usize, refs: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("duplicate direction {src}-{tgt}")]
    DuplicateDirection { src: String, tgt: String },
}

impl Error {
    pub(crate) fn out_of_range(
        what: &'static str,
        value: impl core::fmt::Display,
        allowed: &str,
    ) -> Self {
        use alloc::string::ToString;
        Error::OutOfRange {
            what,
            value: value.to_string(),
            allowed: allowed.to_string(),
        }
    }
}
