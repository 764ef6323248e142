'''
Exceptions raised by `deeprnmt`. Every class derives from `DeepRnmtError` and from the
builtin exception a caller would naturally expect, so `except ValueError` keeps working.
'''


class DeepRnmtError(Exception):
    '''
    Base class of all library errors.
    '''


class DimensionError(DeepRnmtError, ValueError):
    '''
    Raised when tensor shapes are incompatible or an index is out of range.
    '''


class GraphError(DeepRnmtError, RuntimeError):
    '''
    Raised when the differentiation graph is used incorrectly, e.g. backward from a
    non-scalar or from a tensor that does not require gradients.
    '''


class ConfigError(DeepRnmtError, ValueError):
    '''
    Raised when a configuration violates one of its invariants.
    '''


class CheckpointError(DeepRnmtError, IOError):
    '''
    Raised when a checkpoint file is malformed or does not match the expected model.
    '''


class NonFiniteGradientError(DeepRnmtError, FloatingPointError):
    '''
    Raised by the optimizer when a gradient holds NaN or infinity.
    '''

    def __init__(self, tensor_name: str) -> None:
        super().__init__(f'Non-finite gradient in tensor "{tensor_name}"')
        self.tensor_name = tensor_name


class DivergenceError(DeepRnmtError, RuntimeError):
    '''
    Raised when training cross-entropy leaves the plausible range.
    '''


class VocabularyError(DeepRnmtError, KeyError):
    '''
    Raised when a token is not part of the vocabulary and no unknown-token fallback is used.
    '''

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ''


class EmptySequenceError(DeepRnmtError, ValueError):
    '''
    Raised for empty sentences and fully masked inputs.
    '''


class DataFormatError(DeepRnmtError, ValueError):
    '''
    Raised for malformed input files; the message carries the file name and line number.
    '''
