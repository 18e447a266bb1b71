use std::fmt;

use super::term::{Term, ValueType};

/// Literal held by the store before the program runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StoreValue {
    Nat(u64),
    Unit,
}

impl StoreValue {
    pub fn value_type(self) -> ValueType {
        match self {
            StoreValue::Nat(_) => ValueType::Nat,
            StoreValue::Unit => ValueType::Unit,
        }
    }
}

impl fmt::Display for StoreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreValue::Nat(n) => write!(f, "{n}"),
            StoreValue::Unit => f.write_str("unit"),
        }
    }
}

/// A source program: one store of a declared type, its initial value and the
/// term to run against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub store_type: ValueType,
    pub init: StoreValue,
    pub root: Term,
}

impl Program {
    pub fn new(store_type: ValueType, init: StoreValue, root: Term) -> Self {
        debug_assert_eq!(init.value_type(), store_type);
        Program {
            store_type,
            init,
            root,
        }
    }

    pub fn nat(init: u64, root: Term) -> Self {
        Program::new(ValueType::Nat, StoreValue::Nat(init), root)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "store {} init {}", self.store_type, self.init)?;
        writeln!(f, "{}", self.root)
    }
}
