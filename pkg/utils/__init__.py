"""Utility package for sedf-lab."""

