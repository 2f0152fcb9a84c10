from .base import Agent
from .base import AgentStats
from .base import EpisodeResult
from .factory import get_agent
from .factory import hrl_config_for
from .flat import FlatAgent
from .flat import exploration_bonus
from .hrl import HRLAgent
from .scripted import ScriptedAgent
