"""Tests for rieszflow."""
