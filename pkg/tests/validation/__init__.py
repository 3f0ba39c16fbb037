"""Tests for validation logic."""
