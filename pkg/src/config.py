"""Configuration module for the convolution toolkit."""

import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, field_validator

# Load environment variables
load_dotenv()

# Entries of products of two residues must stay inside int64
MAX_PRIME = 2 ** 20


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _optional_int(name: str) -> Optional[int]:
    raw = os.getenv(name, "")
    return int(raw) if raw.strip() else None


class FieldConfig(BaseModel):
    """Coefficient field F_p."""
    prime: int = int(os.getenv("CONVOLVE_FIELD_PRIME", "2"))

    @field_validator("prime")
    @classmethod
    def _check_prime(cls, value: int) -> int:
        if not _is_prime(value) or value >= MAX_PRIME:
            raise ValueError(f"field characteristic must be a prime below {MAX_PRIME}, got {value}")
        return value


class OracleConfig(BaseModel):
    """Randomized closed-form vs grid-oracle comparison."""
    # Endpoints of random half-open bars are drawn from [endpoint_lo, endpoint_hi]
    endpoint_lo: int = int(os.getenv("CONVOLVE_ORACLE_ENDPOINT_LO", "0"))
    endpoint_hi: int = int(os.getenv("CONVOLVE_ORACLE_ENDPOINT_HI", "10"))

    # Evaluation window for the convolution oracles
    window_lo: int = int(os.getenv("CONVOLVE_ORACLE_WINDOW_LO", "-2"))
    window_hi: int = int(os.getenv("CONVOLVE_ORACLE_WINDOW_HI", "22"))

    trials: int = int(os.getenv("CONVOLVE_ORACLE_TRIALS", "50"))
    seed: int = int(os.getenv("CONVOLVE_ORACLE_SEED", "7"))


class ResolutionConfig(BaseModel):
    """Projective / injective resolutions."""
    # None means 2n+1 on n-parameter grids and |Q|+1 on finite preorders
    length_cap: Optional[int] = _optional_int("CONVOLVE_RESOLUTION_CAP")


class InterleavingConfig(BaseModel):
    """Interleaving search."""
    # Max candidate morphisms visited by the multi-parameter search
    max_enumeration: int = int(os.getenv("CONVOLVE_MAX_ENUMERATION", "4096"))


class Config(BaseModel):
    """Main configuration."""
    field: FieldConfig = FieldConfig()
    oracle: OracleConfig = OracleConfig()
    resolution: ResolutionConfig = ResolutionConfig()
    interleaving: InterleavingConfig = InterleavingConfig()

    # Logging
    log_level: str = os.getenv("CONVOLVE_LOG_LEVEL", "INFO")
    log_file: Optional[Path] = Path(os.environ["CONVOLVE_LOG_FILE"]) if os.getenv("CONVOLVE_LOG_FILE") else None


# Global config instance
config = Config()


def validate_config() -> bool:
    """Validate that the configuration is usable."""
    errors = []

    if not _is_prime(config.field.prime) or config.field.prime >= MAX_PRIME:
        errors.append(f"CONVOLVE_FIELD_PRIME={config.field.prime} is not a prime below {MAX_PRIME}")

    if config.oracle.endpoint_lo > config.oracle.endpoint_hi:
        errors.append("CONVOLVE_ORACLE_ENDPOINT_LO exceeds CONVOLVE_ORACLE_ENDPOINT_HI")

    if config.oracle.window_lo > config.oracle.window_hi:
        errors.append("CONVOLVE_ORACLE_WINDOW_LO exceeds CONVOLVE_ORACLE_WINDOW_HI")

    if config.resolution.length_cap is not None and config.resolution.length_cap < 0:
        errors.append("CONVOLVE_RESOLUTION_CAP must be non-negative")

    if config.interleaving.max_enumeration < 1:
        errors.append("CONVOLVE_MAX_ENUMERATION must be positive")

    if errors:
        print("❌ Configuration errors:", file=sys.stderr)
        for error in errors:
            print(f"   - {error}", file=sys.stderr)
        return False

    return True
