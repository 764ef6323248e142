from collections.abc import Sequence
from dataclasses import dataclass
import logging
import math
import time

import numpy as np

from ..callbacks import (
    Callback,
    Checkpoint,
    EarlyStopping,
    TrainingLog,
    Tqdm,
    )
from ..data import Batch, Pair, SyntheticTask, generate, make_batches, with_eos
from ..errors import DivergenceError
from ..evaluation import decode_corpus
from ..metrics import corpus_bleu_lite
from ..models import ModelConfig, ParameterSet, count_params, init_params
from ..reproduce import seed_everything, spawn_generators
from .history import History
from .objective import corpus_cross_entropy, loss
from .optim import TrainHyper, TrainState, clip_grad_norm, optimizer_step


logger = logging.getLogger(__name__)


class Trainer():
    '''
    Step-based training loop with periodic validation.

    Every step draws the next batch of the current epoch (length-bucketed and
    shuffled anew each epoch), backpropagates the mean token cross-entropy,
    clips the gradients by global norm and applies an adaptive-moment update.
    Every `hyper.valid_every` steps and once at the end the validation
    cross-entropy is computed and `on_evaluation_end` is fired. Early stopping on
    the validation cross-entropy is always active.
    '''

    def __init__(self,
                 config: ModelConfig,
                 params: ParameterSet,
                 hyper: TrainHyper,
                 rng: np.random.Generator | None = None,
                 workers: int = 1,
                 ) -> None:
        '''
        :param config: Model configuration.
        :param params: Parameters to train, updated in place.
        :param hyper: Optimizer and loop settings.
        :param rng: Generator used to shuffle the batch order; defaults to one seeded with `config.seed`.
        :param workers: Worker processes for the greedy decoding behind validation BLEU.
        '''
        self._config = config.validate()
        self._params = params
        self._hyper = hyper.validate()
        self._rng = np.random.default_rng(config.seed) if rng is None else rng
        self._workers = workers
        self._state = TrainState(seed=config.seed)
        self._is_training = False
        self._callbacks = []
        self._early_stopping = None
        self._last_evaluation_logs = {}
        self._verbose = True

    @property
    def params(self) -> ParameterSet:
        return self._params

    @property
    def config(self) -> ModelConfig:
        return self._config

    @property
    def hyper(self) -> TrainHyper:
        return self._hyper

    @property
    def state(self) -> TrainState:
        return self._state

    @property
    def early_stopping(self) -> EarlyStopping | None:
        return self._early_stopping

    @property
    def is_training(self) -> bool:
        '''
        Returns a bool value whether the model is training now.
        :return: `True` if the model is training, `False` otherwise.
        '''
        return self._is_training

    @is_training.setter
    def is_training(self, status: bool) -> None:
        '''
        Sets the status of training. This function must be used only inside a `Callback` class to
        stop training.
        :param status: Status of training. When `False` and the model was in training mode,
            training stops after the current step.
        '''
        if not isinstance(status, bool):
            raise TypeError('Expect a value of bool type')

        self._is_training = status

    def _on_train_begin(self, logs=None):
        for cb in self._callbacks:
            cb.on_train_begin(logs)

    def _on_train_end(self, logs=None):
        for cb in self._callbacks:
            cb.on_train_end(self._last_evaluation_logs)

    def _on_train_batch_begin(self, step, logs=None):
        for cb in self._callbacks:
            cb.on_train_batch_begin(step, logs)

    def _on_train_batch_end(self, step, logs=None):
        for cb in self._callbacks:
            cb.on_train_batch_end(step, logs)

    def _on_evaluation_begin(self, step, logs=None):
        for cb in self._callbacks:
            cb.on_evaluation_begin(step, logs)

    def _on_evaluation_end(self, step, logs=None):
        self._last_evaluation_logs = logs
        for cb in self._callbacks:
            cb.on_evaluation_end(step, logs)

    def _log(self, message: str, level: int = logging.INFO) -> None:
        '''
        Logs a message through the package logger, whose handler writes around the progress bar.
        Use it inside a custom `Callback` instead of `print`.

        :param message: Message to log.
        :param level: Logging level.
        '''
        logger.log(level, message)

    def _setup_callbacks(self,
                         user_callbacks,
                         training_params: dict,
                         ) -> None:
        if user_callbacks is None:
            user_callbacks = []

        self._callbacks = []
        self._early_stopping = EarlyStopping(self._hyper.patience, monitor='valid_ce', mode='min')
        builtin = [self._early_stopping]
        if self._verbose and not any(isinstance(cb, Tqdm) for cb in user_callbacks):
            builtin.append(Tqdm())

        for callback in builtin + list(user_callbacks):
            callback.params = self._params
            callback.trainer = self
            callback.training_params = training_params
            self._callbacks.append(callback)

    def _train_step(self, step: int, batch: Batch) -> float:
        self._params.zero_grad()
        batch_loss = loss(self._params, self._config, batch)
        self._check_divergence(step, batch_loss.item(), 'training')
        batch_loss.backward()
        (grads, norm) = clip_grad_norm(self._params.grads(), self._hyper.clip_norm)
        optimizer_step(self._state, self._params, grads, self._hyper)
        self._params.zero_grad()
        logger.debug(f'Step: {self._state.step} - loss: {batch_loss.item():0.6f}, grad norm: {norm:0.4f}')
        return batch_loss.item()

    def _check_divergence(self, step: int, cross_entropy: float, what: str) -> None:
        limit = 10.0 * math.log(self._config.tgt_vocab)
        if not math.isfinite(cross_entropy):
            raise DivergenceError(f'Step {step}: {what} cross-entropy is {cross_entropy}')
        if step > self._hyper.warmup and cross_entropy > limit:
            raise DivergenceError(f'Step {step}: {what} cross-entropy {cross_entropy:0.4f} exceeds '
                                  f'10 ln V = {limit:0.4f} after {self._hyper.warmup} warmup steps')

    def _evaluate(self,
                  step: int,
                  train_ce: float,
                  tokens_per_s: float,
                  valid_batches: list[Batch],
                  valid_pairs: Sequence[Pair],
                  ) -> dict:
        self._on_evaluation_begin(step)
        valid_ce = corpus_cross_entropy(self._params, self._config, valid_batches)
        self._check_divergence(step, valid_ce, 'validation')
        logs = {
            'step': step,
            'train_ce': train_ce,
            'valid_ce': valid_ce,
            'tokens_per_s': tokens_per_s,
            }
        if self._hyper.select_by == 'bleu':
            sources = [source for (source, _) in valid_pairs]
            max_len = 2 * max(len(s) for s in sources) + 2
            hypotheses = decode_corpus(self._params, self._config, sources, beam_size=1, max_len=max_len,
                                       workers=self._workers)
            logs['valid_bleu'] = corpus_bleu_lite([h.tokens for h in hypotheses],
                                                  [target for (_, target) in valid_pairs])

        self._state.best_valid_ce = min(self._state.best_valid_ce, valid_ce)
        self._log(f'Step: {step} - train_ce: {train_ce:0.4f}, valid_ce: {valid_ce:0.4f}, '
                  f'tokens/s: {tokens_per_s:0.1f}'
                  + (f', valid_bleu: {logs["valid_bleu"]:0.4f}' if 'valid_bleu' in logs else ''))
        self._on_evaluation_end(step, logs)
        self._state.bad_evaluations = self._early_stopping.bad_evaluations
        return logs

    def _training_loop(self,
                       train_pairs: list[Pair],
                       valid_pairs: Sequence[Pair],
                       ) -> History:
        hyper = self._hyper
        valid_batches = make_batches([(s, with_eos(t)) for (s, t) in valid_pairs], hyper.batch_size)
        history = History()
        self.is_training = True
        self._on_train_begin()

        (summed_loss, tokens, last_evaluated) = (0.0, 0, 0)
        started = time.perf_counter()
        while self.is_training and self._state.step < hyper.max_steps:
            for batch in make_batches(train_pairs, hyper.batch_size, self._rng):
                step = self._state.step + 1
                self._on_train_batch_begin(step)
                batch_loss = self._train_step(step, batch)
                summed_loss += batch_loss * batch.num_target_tokens
                tokens += batch.num_target_tokens
                self._on_train_batch_end(step, {'loss': batch_loss, 'tokens': batch.num_target_tokens})

                if step % hyper.valid_every == 0 or step == hyper.max_steps:
                    elapsed = max(time.perf_counter() - started, 1e-9)
                    logs = self._evaluate(step, summed_loss / tokens, tokens / elapsed, valid_batches, valid_pairs)
                    history.update(logs)
                    last_evaluated = step
                    (summed_loss, tokens) = (0.0, 0)
                    started = time.perf_counter()

                if not self.is_training or step >= hyper.max_steps:
                    break

        if self._state.step > last_evaluated:
            elapsed = max(time.perf_counter() - started, 1e-9)
            logs = self._evaluate(self._state.step, summed_loss / tokens, tokens / elapsed, valid_batches, valid_pairs)
            history.update(logs)

        self.is_training = False
        self._on_train_end()
        return history

    def train(self,
              train_pairs: Sequence[Pair],
              valid_pairs: Sequence[Pair],
              callbacks: Sequence[Callback] | None = None,
              verbose: bool = True,
              ) -> History:
        '''
        Trains the parameters until `hyper.max_steps` steps ran or early stopping fired.

        :param train_pairs: (source, target) pairs without end-of-sentence; it is appended here.
        :param valid_pairs: Validation pairs in the same form.
        :param callbacks: Callbacks to interact with the parameters and the logs during training.
            Early stopping is always installed; the progress bar is controlled by `verbose`.
        :param verbose: Verbosity mode. If `False`, no progress bar appears.
        :return: History object with one entry per evaluation.
        '''
        if len(train_pairs) == 0 or len(valid_pairs) == 0:
            raise ValueError('Training and validation data must not be empty')
        self._verbose = verbose
        training_params = {
            'max_steps': self._hyper.max_steps,
            'valid_every': self._hyper.valid_every,
            'num_batches': math.ceil(len(train_pairs) / self._hyper.batch_size),
            }
        self._setup_callbacks(callbacks, training_params)
        train_pairs = [(s, with_eos(t)) for (s, t) in train_pairs]
        return self._training_loop(train_pairs, valid_pairs)


@dataclass
class TrainResult:
    '''
    :param params: Parameters of the selected evaluation.
    :param history: Values logged at every evaluation.
    :param best_step: Step of the selected evaluation.
    :param stopped_early: `True` when early stopping ended training.
    '''
    params: ParameterSet
    config: ModelConfig
    history: History
    state: TrainState
    best_step: int
    stopped_early: bool

    @property
    def best_valid_ce(self) -> float:
        return self.state.best_valid_ce


def train(config: ModelConfig,
          task: SyntheticTask,
          hyper: TrainHyper,
          checkpoint_path=None,
          log_path=None,
          callbacks: Sequence[Callback] | None = None,
          verbose: bool = False,
          workers: int = 1,
          ) -> TrainResult:
    '''
    Trains a freshly initialized model on a synthetic task.

    Training and validation pairs come from disjoint generators derived from
    `config.seed`. The kept parameters are the best by `hyper.select_by`.

    :param checkpoint_path: Where to write the selected checkpoint, or `None`.
    :param log_path: Where to write the tab-separated training log, or `None`.
    :param workers: Worker processes for validation decoding; `1` keeps everything in-process.
    :raises DivergenceError: When the cross-entropy leaves the plausible range.
    '''
    config = config.validate()
    task = task.validate()
    hyper = hyper.validate()
    seed_everything(config.seed)
    (train_rng, valid_rng, shuffle_rng) = spawn_generators(config.seed, 3)
    train_pairs = generate(task, task.train_size, train_rng)
    valid_pairs = generate(task, task.valid_size, valid_rng)

    params = init_params(config)
    counts = count_params(config)
    logger.info(f'Parameters: {counts.total}')
    logger.debug(counts.format())

    monitor = ('valid_bleu', 'max') if hyper.select_by == 'bleu' else ('valid_ce', 'min')
    checkpoint = Checkpoint(checkpoint_path, config, monitor=monitor[0], mode=monitor[1])
    builtin = [checkpoint]
    if log_path is not None:
        builtin.append(TrainingLog(log_path))

    trainer = Trainer(config, params, hyper, rng=shuffle_rng, workers=workers)
    history = trainer.train(train_pairs, valid_pairs, builtin + list(callbacks or []), verbose=verbose)
    logger.info(f'Best step: {checkpoint.best_step} ({monitor[0]}: {checkpoint.best_value:0.4f})')
    return TrainResult(params, config, history, trainer.state, checkpoint.best_step,
                       trainer.early_stopping.stopped_step is not None)
