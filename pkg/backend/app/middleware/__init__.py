from .error_handler import add_exception_handlers
from .request_logger import RequestLoggingMiddleware, REQUEST_ID_HEADER

__all__ = [
    'add_exception_handlers',
    'RequestLoggingMiddleware',
    'REQUEST_ID_HEADER',
]
