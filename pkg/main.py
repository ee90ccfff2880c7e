import logging

from vipclip.config import LOG_LEVEL
from vipclip.core.cli import cli

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

if __name__ == "__main__":
    cli()
