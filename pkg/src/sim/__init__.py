"""Simulación reproducible de CTRW y de sus procesos límite."""
