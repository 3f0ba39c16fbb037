"""Tests for array containers and CSV ingestion."""
