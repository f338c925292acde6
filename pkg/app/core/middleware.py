import logging
import time

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.core.errors import DeformationError

logger = logging.getLogger(__name__)


def setup_middleware(app: FastAPI):
    """Configura CORS, manejadores de errores del dominio y el log de peticiones"""

    # CORS
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(DeformationError)
    async def deformation_error_handler(request: Request, exc: DeformationError):
        logger.error(f"❌ {type(exc).__name__} en {request.url.path}: {exc.detail}")
        return JSONResponse(status_code=exc.status_code, content=exc.to_dict())

    # Argumentos numéricos fuera de dominio (órdenes, intervalos, formas) que
    # los servicios rechazan con ValueError
    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        logger.warning(f"⚠️ Argumento inválido en {request.url.path}: {exc}")
        return JSONResponse(
            status_code=422,
            content={"error": "ValueError", "detail": str(exc), "context": {}},
        )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        elapsed = time.perf_counter() - start

        response.headers["X-Process-Time"] = f"{elapsed:.4f}"
        icon = "✅" if response.status_code < 400 else "⚠️"
        logger.info(
            f"{icon} {request.method} {request.url.path} - "
            f"Status: {response.status_code} - Time: {elapsed:.4f}s"
        )
        return response
