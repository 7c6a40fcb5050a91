"""
FastAPI main application.
Presentation layer - application setup and configuration.
"""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .api import inference_router
from ..infrastructure.container import cleanup_container, get_container

logger = logging.getLogger(__name__)

SERVICE_NAME = "R2OMC Inference API"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan management."""
    settings = get_container().settings
    logger.info(f"Starting {SERVICE_NAME} (workers={settings.workers}, oracle cache {settings.oracle_cache})")
    yield
    logger.info(f"Shutting down {SERVICE_NAME}...")
    cleanup_container()


def create_app() -> FastAPI:
    """Create and configure the FastAPI application."""

    app = FastAPI(
        title=SERVICE_NAME,
        description="Simulation-based inference with robust optimization Monte Carlo on differentiable simulators.",
        version="1.0.0",
        docs_url="/docs",
        redoc_url="/redoc",
        lifespan=lifespan
    )

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    app.include_router(inference_router)

    @app.get("/health")
    async def health_check():
        """Health check endpoint."""
        return {"status": "healthy", "service": SERVICE_NAME}

    @app.get("/api")
    async def api_info():
        """API information endpoint."""
        return {
            "message": f"Welcome to {SERVICE_NAME}",
            "version": "1.0.0",
            "documentation": "/docs",
            "health": "/health",
            "problems": "/api/problems",
            "inference": "/api/inference"
        }

    @app.exception_handler(Exception)
    async def global_exception_handler(request, exc):
        """Global exception handler."""
        logger.error(f"Unhandled exception: {exc}", exc_info=True)
        return JSONResponse(
            status_code=500,
            content={
                "success": False,
                "message": "Internal server error",
                "errors": ["An unexpected error occurred"]
            }
        )

    return app


# Create the app instance
app = create_app()


def run_app(host: str = "0.0.0.0", port: int = None, log_level: str = "info"):
    """Run the FastAPI application using uvicorn."""
    import uvicorn

    port = port or get_container().settings.api_port
    uvicorn.run(app, host=host, port=port, log_level=log_level)
