from .base import ObservationEncoder
from .base import Worker
from .base import WorkerStep
from .factory import make_worker
from .mlp import init_mlp
from .mlp import mlp_backward
from .mlp import mlp_forward
from .optim import make_optimizer
from .replay import PrioritizedReplayBuffer
from .replay import SumTree
from .sil import LossBatch
from .sil import SILWorker
from .sil import sil_loss
from .tabular import TabularWorker
