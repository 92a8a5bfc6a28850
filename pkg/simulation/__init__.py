from .commands import simulation_bp

__all__ = ['simulation_bp']
