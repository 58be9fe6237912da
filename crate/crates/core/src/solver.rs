//! Operator-splitting conic solver (in progress).
