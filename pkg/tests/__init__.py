"""Tests for cohering-power."""
