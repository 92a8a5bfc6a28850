from .commands import mapping_bp

__all__ = ['mapping_bp']
