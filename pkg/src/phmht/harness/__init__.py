"""Experiment configuration, fixtures, simulation runs and the CLI."""
