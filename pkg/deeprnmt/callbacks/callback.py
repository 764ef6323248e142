from abc import ABC

import collections.abc


class Callback(ABC):
    '''
    Base class used to build new callbacks.

    Callbacks can be passed to `Trainer.train()` in order to hook into the
    various stages of training and evaluation.

    To create a custom callback, subclass `deeprnmt.callbacks.Callback` and
    override the method associated with the stage of interest.

    To access the trainer, one should use `self.trainer`.
    To access the trained parameters, one should use `self.params`.
    '''

    def __init__(self) -> None:
        self._trainer = None
        self._params = None
        self._training_params = None

    @property
    def trainer(self):
        return self._trainer

    @trainer.setter
    def trainer(self, new_trainer):
        self._trainer = new_trainer

    @property
    def params(self):
        return self._params

    @params.setter
    def params(self, new_params):
        self._params = new_params

    @property
    def training_params(self):
        return self._training_params

    @training_params.setter
    def training_params(self, new_training_params):
        self._training_params = new_training_params

    def on_train_begin(self,
                       logs: collections.abc.Mapping | None = None
                       ) -> None:
        '''
        Called at the beginning of training.

        :param logs: Mapping. Currently no data is passed to this argument,
            but that may change in the future.
        '''

    def on_train_end(self,
                     logs: collections.abc.Mapping | None = None
                     ) -> None:
        '''
        Called at the end of training.

        :param logs: Mapping. The logs of the last evaluation.
        '''

    def on_train_batch_begin(self,
                             step: int,
                             logs: collections.abc.Mapping | None = None
                             ) -> None:
        '''
        Called before an optimizer step.

        :param step: Number of the step about to run, starting at 1.
        :param logs: Mapping. Currently no data is passed to this argument,
            but that may change in the future.
        '''

    def on_train_batch_end(self,
                           step: int,
                           logs: collections.abc.Mapping | None = None
                           ) -> None:
        '''
        Called after an optimizer step.

        :param step: Number of the step that just ran.
        :param logs: Mapping with the batch cross-entropy (`"loss"`) and its token count (`"tokens"`).
        '''

    def on_evaluation_begin(self,
                            step: int,
                            logs: collections.abc.Mapping | None = None
                            ) -> None:
        '''
        Called before the validation set is scored.

        :param step: Current step.
        :param logs: Mapping. Currently no data is passed to this argument,
            but that may change in the future.
        '''

    def on_evaluation_end(self,
                          step: int,
                          logs: collections.abc.Mapping | None = None
                          ) -> None:
        '''
        Called after the validation set is scored.

        :param step: Current step.
        :param logs: Mapping with `step`, `train_ce` (token-weighted since the previous
            evaluation), `valid_ce`, `tokens_per_s` and, when selecting by BLEU, `valid_bleu`.
        '''
