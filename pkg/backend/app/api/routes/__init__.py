from . import health_routes, memory_routes

__all__ = ['health_routes', 'memory_routes']
