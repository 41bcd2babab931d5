"""Tests for fdslrm."""
