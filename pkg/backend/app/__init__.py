__version__ = "1.0.0"
__author__ = "MemOrb Team"
__description__ = "Verbal-reinforcement memory layer for frozen LLM agents"

from .config import settings, get_logger


logger = get_logger(__name__)


logger.debug(
    f"Initializing {settings.APP_NAME} v{__version__} | "
    f"Environment: {settings.ENVIRONMENT} | "
    f"Debug: {settings.DEBUG}"
)
