"""Tests for the clustered Lasso and its penalty."""
