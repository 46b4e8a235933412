"""
Configuration settings for the prime-representing constant toolkit.
"""
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings."""

    # Interval arithmetic
    PRECISION_START: int = 128
    PRECISION_MAX: int = 1_048_576  # bits; PrecisionExhausted beyond this

    # Primality
    MR_ROUNDS: int = 16  # extra random Miller-Rabin rounds above 2^64

    # Sieve settings
    SIEVE_SEGMENT_ODDS: int = 2 ** 20
    SIEVE_BASE_LIMIT: int = 2 ** 20
    SIEVE_CACHE_SEGMENTS: int = 32
    PRIME_INDEX_LIMIT: int = 10 ** 7

    # Construction settings
    MAX_TERM_BITS: int = 8192
    MAX_EXACT_BITS: int = 1 << 20
    FLOOR_MARGIN_BITS: int = 20
    TERMS_DOUBLY_EXPONENTIAL: int = 6
    TERMS_SLOW_GROWTH: int = 12
    DIGIT_GOAL: int = 20

    # Gap fitting
    GAP_FIT_LIMIT: int = 10 ** 7

    # Hypothesis sampling
    HYPOTHESIS_SAMPLES: int = 64
    HYPOTHESIS_SEED: int = 0
    WINDOW_OFFSET: float = 1e-3
    WINDOW_SPAN: float = 1e3

    # Verification
    VERIFY_PRECISION_FACTOR: int = 2

    LOG_LEVEL: str = "INFO"

    class Config:
        env_file = ".env"
        case_sensitive = True


# Global settings instance
settings = Settings()
