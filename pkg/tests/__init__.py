"""Unit test package for tdx."""
