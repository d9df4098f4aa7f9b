"""Deterministic simulation of a four-agent robotic control pipeline with
red-team attack injectors and replayable experiments."""
