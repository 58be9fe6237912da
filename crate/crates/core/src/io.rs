//! JSON interchange formats (in progress).
