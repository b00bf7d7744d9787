from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class WorkbenchSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="WORKBENCH_", env_file=".env", extra="ignore")

    budget: int = 1_000_000
    state_cap: int = 500_000
    depth_cap: int = 10_000
    seed: int = 0
    tmax: int = 10_000
    max_program_len: int = 24
    halting_max_input: int = 4
    dp_height_slack: int = 2
    log_level: str = "WARNING"


@lru_cache
def get_workbench_settings():
    return WorkbenchSettings()
