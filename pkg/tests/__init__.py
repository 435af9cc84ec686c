"""Tests for the usegnet package."""
