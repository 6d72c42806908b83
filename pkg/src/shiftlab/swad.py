"""Dense weight averaging over an overfit-aware validation-loss window.

The start index t_s is the first evaluation whose loss heads its lookahead
window of n_s evaluations (window truncated at the end of the sequence); the
end index t_e is the first later evaluation whose loss exceeds (1 + r) times
the running minimum of the whole prefix, or the sequence length if none
does. Averaging covers the half-open iteration window [t_s, t_e): the
iterate that triggers the exceedance is excluded. An empty window falls back
to the final iterate and is flagged in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ContractError, DomainError


@dataclass(frozen=True)
class SwadConfig:
    """Loss tolerance r, evaluation stride, and start-detection window length."""

    r: float = 0.1
    eval_interval: int = 1
    n_s: int = 3

    def __post_init__(self):
        if self.r < 0:
            raise ConfigurationError("tolerance r must be non-negative")
        if self.eval_interval < 1 or self.n_s < 1:
            raise ConfigurationError("eval_interval and n_s must be at least 1")


def schedule(losses: Sequence[float], cfg: SwadConfig) -> tuple[int, int]:
    """Resolve (t_s, t_e) indices into ``losses`` for the averaging window."""
    n = len(losses)
    if n == 0:
        raise DomainError("schedule requires a nonempty loss sequence")
    if not all(math.isfinite(v) for v in losses):
        raise DomainError("schedule requires finite losses")
    t_s = n - 1
    for i in range(n):
        if losses[i] == min(losses[i : min(i + cfg.n_s, n)]):
            t_s = i
            break
    t_e = n
    run_min = math.inf
    for j, v in enumerate(losses):
        run_min = min(run_min, v)
        if j > t_s and v > (1.0 + cfg.r) * run_min:
            t_e = j
            break
    return t_s, t_e


class SwadState:
    """Online accumulator: buffers iterates until the loss window is resolved.

    ``accumulate`` must be called once per iteration in ascending order;
    ``record_loss`` marks evaluation points. Snapshots that can no longer
    fall inside the averaging window are dropped as candidates resolve, and
    once t_e is confirmed the buffer is collapsed into a running sum.
    """

    def __init__(self, cfg: SwadConfig):
        self.cfg = cfg
        self._loss_iters: list[int] = []
        self._losses: list[float] = []
        self._buffer: list[tuple[int, np.ndarray]] = []
        self._last_iteration: int | None = None
        self._sum: np.ndarray | None = None
        self._count = 0
        self._t_s_idx: int | None = None
        self._t_e_idx: int | None = None
        self._run_min = math.inf

    def record_loss(self, iteration: int, loss: float) -> None:
        if not math.isfinite(loss):
            raise DomainError("validation loss must be finite")
        if self._loss_iters and iteration <= self._loss_iters[-1]:
            raise ContractError("loss evaluations must arrive in ascending iteration order")
        self._loss_iters.append(iteration)
        self._losses.append(float(loss))
        self._resolve()

    def accumulate(self, iteration: int, params: np.ndarray) -> None:
        if self._last_iteration is not None and iteration <= self._last_iteration:
            raise ContractError(
                f"accumulate at iteration {iteration} after {self._last_iteration}"
            )
        self._last_iteration = iteration
        if self._t_e_idx is not None and iteration >= self._loss_iters[self._t_e_idx]:
            return
        vec = np.array(params, dtype=np.float64, copy=True)
        if self._t_s_idx is not None:
            if iteration >= self._loss_iters[self._t_s_idx]:
                self._add(vec)
            return
        self._buffer.append((iteration, vec))

    def finalize(self, fallback: np.ndarray | None = None) -> tuple[np.ndarray, dict]:
        """Mean of the in-window snapshots plus the schedule report."""
        if self._losses:
            t_s, t_e = schedule(self._losses, self.cfg)
            start = self._loss_iters[t_s]
            end = self._loss_iters[t_e] if t_e < len(self._losses) else math.inf
        else:
            t_s, t_e, start, end = 0, 0, -math.inf, math.inf
        for it, vec in self._buffer:
            if start <= it < end:
                self._add(vec)
        self._buffer.clear()
        report = {
            "t_s": t_s,
            "t_e": t_e,
            "n_snapshots": self._count,
            "fallback_used": self._count == 0,
        }
        if self._count == 0:
            if fallback is None:
                raise ContractError("empty averaging window and no fallback iterate")
            return np.array(fallback, dtype=np.float64, copy=True), report
        return self._sum / self._count, report

    def _add(self, vec: np.ndarray) -> None:
        if self._sum is None:
            self._sum = vec.astype(np.float64, copy=True)
        else:
            self._sum += vec
        self._count += 1

    def _resolve(self) -> None:
        """Advance confirmed/viable schedule state after a new loss arrives."""
        n = len(self._losses)
        self._run_min = min(self._run_min, self._losses[-1])
        if self._t_s_idx is None:
            for i in range(n):
                if i + self.cfg.n_s > n:
                    # Window still truncated: i stays a viable candidate.
                    self._prune(self._loss_iters[i])
                    break
                if self._losses[i] == min(self._losses[i : i + self.cfg.n_s]):
                    self._t_s_idx = i
                    # The exceedance may predate this confirmation: scan the
                    # whole prefix before flushing the buffered snapshots.
                    self._detect_t_e()
                    self._flush()
                    break
        elif self._t_e_idx is None:
            j = n - 1
            if j > self._t_s_idx and self._losses[j] > (1.0 + self.cfg.r) * self._run_min:
                self._t_e_idx = j

    def _detect_t_e(self) -> None:
        run = math.inf
        for j, v in enumerate(self._losses):
            run = min(run, v)
            if j > self._t_s_idx and v > (1.0 + self.cfg.r) * run:
                self._t_e_idx = j
                return

    def _prune(self, start_iteration: int) -> None:
        self._buffer = [(it, v) for it, v in self._buffer if it >= start_iteration]

    def _flush(self) -> None:
        start = self._loss_iters[self._t_s_idx]
        end = (
            self._loss_iters[self._t_e_idx] if self._t_e_idx is not None else math.inf
        )
        for it, vec in self._buffer:
            if start <= it < end:
                self._add(vec)
        self._buffer.clear()
