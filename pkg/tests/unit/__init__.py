"""Unit tests for pdnsense."""
