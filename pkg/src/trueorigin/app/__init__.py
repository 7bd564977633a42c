"""CLI and HTTP service wiring."""
