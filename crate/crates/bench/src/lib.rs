//! Empty library target; this package exists for its criterion benches.
