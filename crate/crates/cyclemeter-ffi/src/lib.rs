//! C ABI bindings for cyclemeter.
//!
//! Heap-allocated objects are opaque handles freed by their `_free`
//! functions; every fallible call returns a `CmStatus` and writes its result
//! through out-pointers. The most recent error message is kept per thread
//! and retrieved with [`cm_last_error_message`].

mod handles;

pub use handles::*;
