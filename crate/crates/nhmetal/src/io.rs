//! Persistence and plotting.
