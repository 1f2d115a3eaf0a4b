"""Tests for the CA toolkit CLI."""
