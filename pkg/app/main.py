# app/main.py
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from app.api.v1.router import api_router
from app.config.settings import settings
from app.core.middleware import setup_middleware
from app.modules.classical.repository import trajectory_cache
from app.modules.deformation.repository import kernel_cache

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    # Startup
    logger.info("🚀 Deformation Kernel API Starting...")
    logger.info(f"📍 Version: {settings.version}")
    logger.info(f"🧮 RK4 steps: {settings.rk_steps} · M: {settings.kernel_quadrature_order} · Q: {settings.series_nodes}")
    logger.info(f"🧵 Workers: {settings.workers}")

    yield

    # Shutdown
    logger.info(f"📊 Caché de trayectorias: {trajectory_cache.stats()}")
    trajectory_cache.clear()
    kernel_cache.clear()
    logger.info("🛑 Deformation Kernel API Shutting down...")


# Create FastAPI app
app = FastAPI(
    title=settings.app_name,
    version=settings.version,
    description="Núcleos de calor por fórmula de deformación: dinámica clásica, matriz de deformación y serie",
    docs_url="/docs",
    redoc_url="/redoc" if settings.debug else None,
    lifespan=lifespan,
)

# Setup middleware
setup_middleware(app)

# Include routers
app.include_router(api_router, prefix="/api/v1")


@app.get("/")
async def root():
    return {
        "message": "🚀 Deformation Kernel API",
        "version": settings.version,
        "status": "running",
        "environment": "production" if not settings.debug else "development",
        "docs": "/docs",
        "api": "/api/v1",
    }


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "version": settings.version,
        "app": settings.app_name,
        "environment": "production" if not settings.debug else "development",
        "caches": {
            "trajectories": trajectory_cache.stats(),
            "kernels": kernel_cache.size(),
        },
    }


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host=settings.host,
        port=settings.port,
        reload=settings.debug,
    )
