from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""
    APP_NAME: str = "systolic"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Lattice settings
    MAX_ENUM_DIM: int = 12
    SHELL_TOLERANCE: float = 1e-9
    MAX_CONDITION: float = 1e12
    LLL_DELTA: float = 0.99
    ISODUAL_MAX_DIM: int = 4

    # Dual-criteria settings
    RANK_THRESHOLD: float = 1e-8
    CRITICAL_TOL_EXACT: float = 1e-9
    CRITICAL_TOL_FLOAT: float = 1e-6

    # Inequality settings
    INEQUALITY_TOL: float = 1e-9
    BOUND_TOL: float = 1e-9
    IDENTITY_TOL: float = 1e-12

    # Mesh settings
    MIN_MESH_RESOLUTION: int = 8
    SOLVER_TOL: float = 1e-10
    RECONSTRUCTION_TOL: float = 1e-9
    HOLDER_TOL: float = 1e-8
    LOEWNER_C: float = 1.0
    IRLS_MAX_ITERS: int = 60
    IRLS_TOL: float = 1e-10

    # Construction settings
    FIBER_VOLUME_TOL: float = 1e-10
    LIFT_RESIDUAL_TOL: float = 1e-8
    SUBMERSION_TOL: float = 1e-9
    MINIMALITY_C: float = 200.0
    DERIVATIVE_SCHEME: str = "spectral"

    # Runtime settings
    THREADS: int = 1
    FLOAT_DIGITS: int = 17

    model_config = SettingsConfigDict(
        env_prefix="SYSTOLIC_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


@lru_cache()
def get_settings():
    """Get cached settings"""
    return Settings()
