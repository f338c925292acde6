# app/config/settings.py
from pydantic_settings import BaseSettings
import os

class Settings(BaseSettings):
    # App Info
    app_name: str = "Deformation Kernel API"
    version: str = "1.0.0"
    debug: bool = False
    log_level: str = os.getenv("LOG_LEVEL", "INFO")

    # Server
    host: str = "0.0.0.0"
    port: int = int(os.getenv("PORT", 8000))

    # Dinámica clásica
    rk_steps: int = 256
    action_quadrature_nodes: int = 32
    theta_quadrature_nodes: int = 16
    theta_epsilon_factor: float = 1e-3
    focal_condition_limit: float = 1e8
    focal_warning_limit: float = 1e4
    singular_condition_limit: float = 1e12
    bvp_cache_size: int = 1024

    # Matriz de deformación
    kernel_quadrature_order: int = 32
    kernel_grid_nodes: int = 24

    # Serie de deformación
    series_nodes: int = 12
    series_n_max: int = 6
    series_tol: float = 1e-8
    series_budget: int = 10_000_000

    # Ejecución
    workers: int = 4
    output_dir: str = "out"
    default_seed: int = 20130123

    class Config:
        env_file = ".env"
        case_sensitive = False
        extra = 'ignore'

settings = Settings()
