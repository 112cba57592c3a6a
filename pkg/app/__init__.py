"""Application entry package for sedf-lab."""

