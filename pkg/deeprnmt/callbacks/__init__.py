from .callback import Callback
from .checkpoint import Checkpoint
from .early_stopping import EarlyStopping
from .progress_bar import Tqdm
from .training_log import TrainingLog, read_training_log
