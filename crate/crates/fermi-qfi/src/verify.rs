//! Seeded verification suites (stub).
