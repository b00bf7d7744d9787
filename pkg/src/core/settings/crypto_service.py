from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class CryptoSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="CRYPTO_", env_file=".env", extra="ignore")

    key_bits: int = 32
    prime_rounds: int = 40
    candidate_budget: int = 100_000
    key_dir: str = "keys"
    max_types: int = 1_000_000


@lru_cache
def get_crypto_settings():
    return CryptoSettings()
