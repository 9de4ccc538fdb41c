"""Structured logging and Prometheus metrics for driftctl runs."""
