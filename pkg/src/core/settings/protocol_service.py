from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class ProtocolSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="PROTOCOL_", env_file=".env", extra="ignore")

    max_rounds_c: int = 8
    max_s: int = 8
    degree_bound: int = 6


@lru_cache
def get_protocol_settings():
    return ProtocolSettings()
