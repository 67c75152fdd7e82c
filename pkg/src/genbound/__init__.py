"""Numeric generalization-bound toolkit: divergences, CGF envelopes,
PAC-Bayes and expectation bounds, privacy conversions, and the sampling
oracles used to sanity-check them."""

__version__ = "0.1.0"
