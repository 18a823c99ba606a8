"""Open-ended evolution experiments over two media with a shared deterministic engine."""

__version__ = "0.1.0"
