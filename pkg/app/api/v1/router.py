# app/api/v1/router.py
from fastapi import APIRouter

from app.config.settings import settings
from app.modules.classical import classical_router
from app.modules.deformation import deformation_router
from app.modules.operator_model import problems_router
from app.modules.series import series_router
from app.modules.verification import verification_router

# Crear router principal de la API v1
api_router = APIRouter()

# ==================== MÓDULOS ====================

api_router.include_router(problems_router)
api_router.include_router(classical_router)
api_router.include_router(deformation_router)
api_router.include_router(series_router)
api_router.include_router(verification_router)


# ==================== ENDPOINTS RAÍZ ====================

@api_router.get("/")
async def api_root():
    """Root endpoint de la API"""
    return {
        "message": "Deformation Kernel API v1",
        "version": settings.version,
        "status": "active",
        "docs": "/docs",
        "available_endpoints": {
            "problems": "/api/v1/problems/validate",
            "potential": "/api/v1/problems/potential",
            "classical": "/api/v1/classical/evaluate",
            "deformation": "/api/v1/deformation/quadratic-form",
            "series": "/api/v1/series/kernel",
            "verification": "/api/v1/verification/run",
        },
    }


@api_router.get("/health")
async def health_check():
    """Health check con la configuración numérica activa"""
    return {
        "status": "healthy",
        "service": settings.app_name,
        "version": settings.version,
        "architecture": "modular_monolith",
        "numerics": {
            "rk_steps": settings.rk_steps,
            "kernel_quadrature_order": settings.kernel_quadrature_order,
            "kernel_grid_nodes": settings.kernel_grid_nodes,
            "series_nodes": settings.series_nodes,
            "series_n_max": settings.series_n_max,
            "series_budget": settings.series_budget,
        },
    }
