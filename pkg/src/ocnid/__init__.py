"""Epsilon-perfect sampling of order-constrained non-identically distributed order statistics."""

from .cftp import DrawBatch, PerfectDraw, UniformStore, draw_batch, perfect_draw
from .distributions import parse_distribution

__version__ = "0.1.0"

__all__ = ["DrawBatch", "PerfectDraw", "UniformStore", "draw_batch", "perfect_draw", "parse_distribution"]
