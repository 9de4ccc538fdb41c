"""driftctl test suite."""
