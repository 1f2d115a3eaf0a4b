"""Tests for ca_utils shared utilities."""
