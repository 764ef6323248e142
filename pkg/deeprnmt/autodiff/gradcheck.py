from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
import logging

import numpy as np

from .tensor import Tensor, no_grad


logger = logging.getLogger(__name__)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3)


@dataclass(frozen=True)
class TensorCheck:
    name: str
    max_error: float
    entries_checked: int


@dataclass
class GradcheckReport:
    '''
    Outcome of `check_gradients`: the largest relative error per tensor plus the
    error of one random-direction directional derivative over all tensors.
    '''
    tolerance: float
    checks: list[TensorCheck] = field(default_factory=list)
    directional_error: float = 0.0

    @property
    def worst(self) -> TensorCheck | None:
        return max(self.checks, key=lambda c: c.max_error, default=None)

    @property
    def max_error(self) -> float:
        worst = self.worst
        return max(worst.max_error if worst else 0.0, self.directional_error)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def format(self) -> str:
        lines = [f'{c.name}\t{c.max_error:.3e}\t({c.entries_checked} entries)' for c in self.checks]
        lines.append(f'directional\t{self.directional_error:.3e}')
        worst = self.worst
        if worst is not None:
            lines.append(f'worst tensor: {worst.name} ({worst.max_error:.3e})')
        lines.append(f'{"PASSED" if self.passed else "FAILED"} at tolerance {self.tolerance:g}')
        return '\n'.join(lines)


def _sample_entries(size: int, max_entries: int | None, rng: np.random.Generator) -> np.ndarray:
    if max_entries is None or size <= max_entries:
        return np.arange(size)
    return np.sort(rng.choice(size, size=max_entries, replace=False))


def _evaluate(loss_fn: Callable[[], Tensor]) -> float:
    with no_grad():
        return loss_fn().item()


def check_gradients(loss_fn: Callable[[], Tensor],
                    tensors: Mapping[str, Tensor],
                    eps: float = 1e-5,
                    tolerance: float = 1e-4,
                    max_entries: int | None = None,
                    seed: int = 0,
                    ) -> GradcheckReport:
    '''
    Compares the analytic gradients of `loss_fn` with central finite differences.

    :param loss_fn: Builds a fresh graph and returns a scalar loss on every call.
    :param tensors: Leaves to check, by name. Their data is perturbed in place and restored.
    :param eps: Finite difference step.
    :param tolerance: A check passes when every relative error stays below it.
    :param max_entries: Check at most this many entries per tensor, chosen deterministically from `seed`.
        `None` checks every entry.
    :param seed: Seed of the entry sample and of the random direction.
    :return: `GradcheckReport`.
    '''
    rng = np.random.default_rng(seed)
    for tensor in tensors.values():
        tensor.zero_grad()
    loss_fn().backward()
    analytic = {
        name: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data))
        for (name, t) in tensors.items()
        }

    report = GradcheckReport(tolerance=tolerance)
    for (name, tensor) in tensors.items():
        flat = tensor.data.reshape(-1)
        worst = 0.0
        entries = _sample_entries(flat.size, max_entries, rng)
        for index in entries:
            original = flat[index]
            try:
                flat[index] = original + eps
                plus = _evaluate(loss_fn)
                flat[index] = original - eps
                minus = _evaluate(loss_fn)
            finally:
                flat[index] = original
            numeric = (plus - minus) / (2 * eps)
            worst = max(worst, relative_error(analytic[name].reshape(-1)[index], numeric))
        report.checks.append(TensorCheck(name, worst, len(entries)))
        logger.debug('gradcheck %s: max relative error %.3e', name, worst)

    directions = {name: rng.standard_normal(t.shape) for (name, t) in tensors.items()}
    norm = np.sqrt(sum(float(np.vdot(d, d)) for d in directions.values()))
    directions = {name: d / norm for (name, d) in directions.items()}
    originals = {name: t.data.copy() for (name, t) in tensors.items()}

    def shifted_loss(sign: float) -> float:
        for (name, t) in tensors.items():
            t.data[...] = originals[name] + sign * eps * directions[name]
        return _evaluate(loss_fn)

    try:
        plus, minus = shifted_loss(1.0), shifted_loss(-1.0)
    finally:
        for (name, t) in tensors.items():
            t.data[...] = originals[name]
    numeric = (plus - minus) / (2 * eps)
    projected = sum(float(np.vdot(analytic[name], directions[name])) for name in tensors)
    report.directional_error = relative_error(projected, numeric)

    for tensor in tensors.values():
        tensor.zero_grad()
    return report
