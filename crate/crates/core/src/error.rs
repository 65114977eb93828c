use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("symbol id {0} is not registered in the symbol table")]
    UnregisteredSymbol(usize),
    #[error("symbol id {0} is outside the given alphabet")]
    OutsideAlphabet(usize),
    #[error("symbol id {0} has no BDD variable")]
    UnmappedAtom(usize),
}

/// A system that fails structural validation cannot be analysed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid system: {}", .0.join("; "))]
pub struct InvalidSystem(pub Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query `{query}`: consequent mentions environment symbol `{symbol}`")]
    EnvInConsequent { query: String, symbol: String },
    #[error("query `{query}`: conjunct `{conjunct}` mixes state and environment symbols")]
    MixedConjunct { query: String, conjunct: String },
    #[error("ctl `{query}`: atom `{symbol}` is not an output symbol")]
    NonOutputAtom { query: String, symbol: String },
    #[error("query `{query}`: unknown symbol `{symbol}`")]
    UnknownSymbol { query: String, symbol: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VhdlError {
    #[error("`{name}` is not a legal VHDL identifier; try `{suggestion}`")]
    IllegalIdentifier { name: String, suggestion: String },
    #[error("generated name `{0}` collides with another name (VHDL is case-insensitive)")]
    NameClash(String),
    #[error("machine `{machine}` has {states} states, which do not fit in {width} bits")]
    WidthOverflow { machine: String, states: usize, width: usize },
    #[error(transparent)]
    Invalid(#[from] InvalidSystem),
}
