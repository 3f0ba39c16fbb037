"""Test package for exboot."""
