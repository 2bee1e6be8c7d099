"""Adaptive LMS estimation of band-limited graph signals."""
