"""Test suite for vg-stein."""
