"""AHD-LDPC Test Suite."""
