from .commands import depth_bp

__all__ = ['depth_bp']
