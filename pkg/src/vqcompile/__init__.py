"""Variational quantum compiling with tabular double Q-learning."""
