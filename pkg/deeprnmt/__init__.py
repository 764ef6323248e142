r'''
# What is deeprnmt?

`deeprnmt` is a small library for deep recurrent encoder-decoder models with attention,
built on its own numpy reverse-mode differentiation engine. It provides:

* GRU, deep transition and residual recurrent cells with layer normalization;
* shallow, deep transition, alternating, biunidirectional, bideep and mixed encoders;
* baseline, deep transition, stacked (`gru`, `rgru`, `cgru`, `crgru`) and bideep decoders;
* synthetic copy, reverse and agreement tasks, a training loop with early stopping,
  beam search, a lightweight BLEU and contrastive evaluation by distance.

```python
from deeprnmt import ModelConfig, SyntheticTask, TrainHyper, train

result = train(ModelConfig(), SyntheticTask(kind='copy'), TrainHyper(max_steps=1000))
result.history.plot('ce', with_valid=True)
```
'''

from .models import (
    EncoderConfig,
    DecoderConfig,
    ModelConfig,
    init_params,
    count_params,
    save_checkpoint,
    load_checkpoint,
    score_sequence,
    )
from .data import SyntheticTask, Vocabulary, generate
from .train import Trainer, TrainHyper, History, train
from .evaluation import decode, contrastive_eval
from .reproduce import seed_everything
