from .generator import door_room
from .generator import doorway_cells
from .generator import generate_task
from .generator import mirror_task
from .generator import room_map
from .generator import solve_bfs
from .gridworld import MOVES
from .gridworld import N_ACTIONS
from .gridworld import Action
from .gridworld import GridState
from .gridworld import GridWorld
from .gridworld import Inventory
from .gridworld import Transition
from .gridworld import resolve_layout
from .layouts import Layout
from .layouts import builtin_layout
from .layouts import load_layout
from .layouts import parse_layout
