"""Hitting times and spectral objects for non-symmetric alpha-stable processes."""
