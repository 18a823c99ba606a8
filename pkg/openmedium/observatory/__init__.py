from .hooks import Observatory

__all__ = ["Observatory"]
