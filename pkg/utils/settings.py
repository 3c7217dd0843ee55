import os
import logging
from dotenv import load_dotenv  # type: ignore

# Load environment variables
load_dotenv()

DEFAULT_OUT_DIR = os.getenv("CHIRALKK_OUT_DIR", "runs")
LOG_LEVEL = os.getenv("CHIRALKK_LOG_LEVEL", "INFO")
TOL_SCALE = float(os.getenv("CHIRALKK_TOL_SCALE", "1"))
# verify runs synchronously in the request, so the API refuses larger grids
MAX_API_N = int(os.getenv("CHIRALKK_MAX_API_N", "128"))


def configure_logging(level=None):
    """Configure root logging once for the CLI and the API."""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
