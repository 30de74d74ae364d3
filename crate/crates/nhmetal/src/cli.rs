//! Command-line driver.
