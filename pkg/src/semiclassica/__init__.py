"""Semiclassical limits of Schrödinger ground states via coherent-state quantization."""
