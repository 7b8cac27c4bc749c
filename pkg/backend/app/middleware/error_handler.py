from typing import Any, Dict, Optional

from fastapi import FastAPI, Request, status
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from backend.app.config import get_logger
from backend.app.utils.exceptions import MemOrbException

logger = get_logger(__name__)


def error_response(status_code: int, error: str, message: Any, details: Optional[Dict[str, Any]] = None) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content=jsonable_encoder({"error": error, "message": message, "details": details or {}}),
    )


def add_exception_handlers(app: FastAPI) -> None:

    @app.exception_handler(MemOrbException)
    async def memorb_exception_handler(request: Request, exc: MemOrbException) -> JSONResponse:
        log = logger.error if exc.http_status >= 500 else logger.warning
        log(
            "Request rejected",
            error_code=exc.error_code,
            error_msg=exc.message,
            status_code=exc.http_status,
            path=request.url.path,
            method=request.method,
        )
        return JSONResponse(status_code=exc.http_status, content=jsonable_encoder(exc.to_dict()))

    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        logger.warning("HTTP exception", status_code=exc.status_code, detail=str(exc.detail), path=request.url.path)
        return error_response(exc.status_code, "HTTPException", exc.detail)

    # malformed bodies are a client error: 400, not FastAPI's default 422
    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
        errors = jsonable_encoder(exc.errors())
        logger.warning("Request validation failed", error_count=len(errors), path=request.url.path)
        return error_response(
            status.HTTP_400_BAD_REQUEST, "ValidationError", "Request validation failed", {"errors": errors}
        )

    @app.exception_handler(Exception)
    async def general_exception_handler(request: Request, exc: Exception) -> JSONResponse:
        logger.error(
            "Unhandled exception",
            error_type=type(exc).__name__,
            error_msg=str(exc),
            path=request.url.path,
            method=request.method,
            exc_info=True,
        )
        return error_response(
            status.HTTP_500_INTERNAL_SERVER_ERROR, "InternalServerError", "An unexpected error occurred"
        )
