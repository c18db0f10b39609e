"""Simulation, statistics and protocol services."""
