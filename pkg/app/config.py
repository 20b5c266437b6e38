from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Server
    host: str = "127.0.0.1"
    port: int = 8000

    # Enumeration guardrails
    ball_capacity: int = 1_000_000
    graph_vertex_limit: int = 400

    # Output
    output_dir: str = "out"
    log_level: str = "INFO"

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "env_prefix": "AXIAL_",
    }


@lru_cache
def get_settings() -> Settings:
    return Settings()
