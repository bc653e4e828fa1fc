"""Subcommand implementations for the rieszflow CLI."""
