"""Tests for integration features."""
