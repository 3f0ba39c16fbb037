"""Tests for the multiplier-bootstrap engines."""
