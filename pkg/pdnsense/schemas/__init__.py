"""Pydantic models for networks, tamper events, traces, signatures and verdicts."""
