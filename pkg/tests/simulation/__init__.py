"""Tests for simulation designs and coverage experiments."""
