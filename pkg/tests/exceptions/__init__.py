"""Tests for exception handling."""
