"""Exact goodness-of-fit tests for stochastic block models."""
