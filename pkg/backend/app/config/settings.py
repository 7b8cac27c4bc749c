from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):

    APP_NAME: str = "MemOrb-Memory-Service"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    ENVIRONMENT: str = "development"


    LISTEN_ADDR: str = "127.0.0.1:8000"


    BASE_DIR: Path = Path(__file__).resolve().parent.parent.parent.parent


    DATA_DIR: str = "storage/memory"
    LOGS_DIR: str = "logs"
    STORE_FSYNC: bool = True


    EMBED_DIM: int = 768
    EMBED_ENDPOINT: Optional[str] = None
    EMBED_TIMEOUT_SECONDS: float = 30.0


    TOPK_DEFAULT: int = 5
    CROSS_USER: bool = True
    REFLECTION_WINDOW: int = 5


    LLM_ENDPOINT: Optional[str] = None
    LLM_TOKEN: Optional[str] = None
    LLM_TIMEOUT_SECONDS: float = 60.0


    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "json"
    LOG_TO_FILE: bool = False
    LOG_ROTATION: str = "midnight"
    LOG_RETENTION_DAYS: int = 30


    CORS_ORIGINS: Union[str, List[str]] = "*"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    @field_validator("EMBED_DIM", "TOPK_DEFAULT", "REFLECTION_WINDOW")
    @classmethod
    def must_be_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("LISTEN_ADDR")
    @classmethod
    def parse_listen_addr(cls, v: str) -> str:
        host, sep, port = v.rpartition(":")
        if not sep or not host or not port.isdigit():
            raise ValueError("LISTEN_ADDR must look like host:port")
        return v

    @field_validator("CORS_ORIGINS")
    @classmethod
    def parse_cors_origins(cls, v):
        if isinstance(v, str):
            return [origin.strip() for origin in v.split(",") if origin.strip()]
        return v

    @property
    def listen_host(self) -> str:
        return self.LISTEN_ADDR.rpartition(":")[0]

    @property
    def listen_port(self) -> int:
        return int(self.LISTEN_ADDR.rpartition(":")[2])

    def get_absolute_path(self, relative_path: Union[str, Path]) -> Path:
        return self.BASE_DIR / relative_path

    @property
    def data_path(self) -> Path:
        return self.get_absolute_path(self.DATA_DIR)


def load_settings(config_file: Optional[Union[str, Path]] = None, **overrides: Any) -> Settings:
    """Build settings with flags > environment > config file > defaults.

    The config file uses the same KEY=value lines as a dotenv file.
    """
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if config_file is not None:
        return Settings(_env_file=str(config_file), **overrides)
    return Settings(**overrides)


def describe(settings: "Settings") -> List[Tuple[str, Any]]:
    return [
        ("Application", f"{settings.APP_NAME} v{settings.APP_VERSION}"),
        ("Environment", settings.ENVIRONMENT),
        ("Listen", settings.LISTEN_ADDR),
        ("Data dir", str(settings.data_path)),
        ("Embedding dim", settings.EMBED_DIM),
        ("Embedder", settings.EMBED_ENDPOINT or "hashing"),
        ("LLM", settings.LLM_ENDPOINT or "scripted"),
        ("Top-k default", settings.TOPK_DEFAULT),
        ("Cross-user", settings.CROSS_USER),
    ]


settings = Settings()


if __name__ == "__main__":
    print("=" * 60)
    for label, value in describe(settings):
        print(f"{label}: {value}")
    print("=" * 60)
