"""Tests for dyadic density estimation and bands."""
