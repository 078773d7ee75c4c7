"""Tests for formal-gaussian."""
