import os
import sys
from typing import Final

from loguru import logger

from .agents import FlatAgent
from .agents import HRLAgent
from .agents import ScriptedAgent
from .agents import get_agent
from .config import RunConfig
from .config import load_run_config
from .envs import GridWorld
from .harness import evaluate
from .harness import run_experiment
from .lazy import lazy_run

LOGURU_LEVEL: Final[str] = os.getenv("LOGURU_LEVEL", "INFO")
logger.configure(handlers=[{"sink": sys.stderr, "level": LOGURU_LEVEL}])
