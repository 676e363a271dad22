"""
Configuration management for GermCalc.
Loads environment variables (prefix GERMCALC_) and provides typed configuration objects.
"""

import logging
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Main engine settings loaded from environment variables with validation."""

    model_config = SettingsConfigDict(
        env_prefix="GERMCALC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        validate_default=True,
    )

    # Coefficient fields
    max_cyclotomic: int = Field(default=360, ge=1, description="Largest m accepted for Q(zeta_m)")
    float_tolerance: float = Field(default=1e-9, gt=0, description="Tolerance for float equality and unity detection")
    unity_power_bound: int = Field(default=720, ge=1, description="Largest k tried when detecting float roots of unity")
    relation_height: int = Field(default=10**6, ge=1, description="Height bound for integer-relation searches")

    # Jets
    default_order: int = Field(default=6, ge=1, description="Default jet truncation order N")
    default_vars: int = Field(default=2, ge=1, description="Default number of variables n")

    # Group searches
    permutation_search_bound: int = Field(default=1024, ge=1, description="Largest permutation group searched for isotropies")
    group_closure_bound: int = Field(default=10_000, ge=1, description="Largest projective group enumerated by closure")

    # Holonomy numerics
    holonomy_rtol: float = Field(default=1e-12, gt=0, description="Relative tolerance of the Runge-Kutta integrator")
    holonomy_atol: float = Field(default=1e-14, gt=0, description="Absolute tolerance of the Runge-Kutta integrator")
    holonomy_grid_points: int = Field(default=12, ge=2, description="Number of initial values in the fitting grid")
    holonomy_grid_ratio: float = Field(default=0.5, gt=0, lt=1, description="Geometric ratio of the fitting grid")
    holonomy_grid_largest: float = Field(default=1e-2, gt=0, description="Largest initial value of the fitting grid")
    holonomy_jet_order: int = Field(default=6, ge=1, description="Order of the fitted holonomy jet")
    holonomy_max_steps: int = Field(default=200_000, ge=1, description="Step budget per integration segment")

    # Application Settings
    environment: Literal["development", "staging", "production"] = Field(
        default="development",
        description="Application environment"
    )
    log_level: str = Field(default="WARNING", description="Logging level")
    log_json: bool = Field(default=False, description="Render logs as JSON lines")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only stdlib level names."""
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level: {v}")
        return level

    @property
    def is_production(self) -> bool:
        """Check if running in production environment."""
        return self.environment == "production"


def get_config() -> Settings:
    """Get a configuration instance reflecting the current environment."""
    return Settings()


# Global settings instance
settings = get_config()
