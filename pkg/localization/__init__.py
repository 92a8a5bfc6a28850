from .commands import localization_bp

__all__ = ['localization_bp']
