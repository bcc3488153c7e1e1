"""Tests for privslice."""
