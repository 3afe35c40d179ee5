"""Configuration management module"""
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class Settings(BaseSettings):
    """Toolkit settings read from the environment and .env"""

    # Logging
    log_level: str = "INFO"
    log_dir: Optional[str] = None  # rotating log file is only written when set

    # Shipped Pidgin normalization data
    variant_table_path: str = str(DATA_DIR / "pidgin_variants.tsv")
    homophone_path: str = str(DATA_DIR / "pidgin_homophones.txt")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


# Global settings instance
settings = Settings()
