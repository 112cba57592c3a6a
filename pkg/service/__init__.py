"""Service layer package for sedf-lab."""

