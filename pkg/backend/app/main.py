from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from backend.app.api.routes import health_routes, memory_routes
from backend.app.config import Settings, get_logger, settings as default_settings
from backend.app.middleware.error_handler import add_exception_handlers
from backend.app.middleware.request_logger import RequestLoggingMiddleware
from backend.app.services import MemoryEngine, create_memory_engine

logger = get_logger(__name__)

API_PREFIX = "/v1"


def create_app(engine: Optional[MemoryEngine] = None, settings: Optional[Settings] = None) -> FastAPI:
    """
    Build the HTTP facade. A supplied engine is used as-is (tests, CLI serve);
    otherwise one is built from settings and loaded from disk at startup.
    """
    settings = settings or default_settings

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        owned = engine is None
        if owned:
            app.state.engine = create_memory_engine(settings)
            app.state.engine.load()
        logger.info("Memory service started", listen=settings.LISTEN_ADDR, **app.state.engine.stats().model_dump())
        yield
        if owned:
            app.state.engine.close()
        logger.info("Memory service stopped")

    app = FastAPI(
        title=settings.APP_NAME,
        version=settings.APP_VERSION,
        description="Self-reflective memory layer for customer-service agents",
        docs_url="/docs" if settings.DEBUG else None,
        redoc_url="/redoc" if settings.DEBUG else None,
        lifespan=lifespan
    )
    if engine is not None:
        app.state.engine = engine

    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.CORS_ORIGINS,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    app.add_middleware(RequestLoggingMiddleware)

    add_exception_handlers(app)

    app.include_router(
        health_routes.router,
        prefix=API_PREFIX,
        tags=["Health"]
    )

    app.include_router(
        memory_routes.router,
        prefix=API_PREFIX,
        tags=["Memory"]
    )

    return app


app = create_app()


if __name__ == "__main__":
    import uvicorn

    logger.info("Starting server", listen=default_settings.LISTEN_ADDR)

    uvicorn.run(
        "backend.app.main:app",
        host=default_settings.listen_host,
        port=default_settings.listen_port,
        log_level=default_settings.LOG_LEVEL.lower()
    )
