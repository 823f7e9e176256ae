"""Training loop for the generator and sampling from a trained network."""

from __future__ import annotations

import csv
import io
import logging
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .charfn import eval_batch
from .checkpoint import Checkpoint
from .kernel import KernelSpec, sample_frequencies
from .loss import TargetValues, loss_and_grad
from .net import AdamState, MlpParams, NetArch, adam_step, backward, clip_by_norm, forward, init_mlp
from .numkit import RngStream

log = logging.getLogger(__name__)

LOG_COLUMNS = ("epoch", "loss", "cp_hat", "interpretable", "grad_norm", "lr", "seconds")


@dataclass(frozen=True)
class TrainConfig:
    n: int = 6000
    m: int = 6000
    epochs: int = 6000
    w_refresh_every: int = 20
    lr: float = 0.01
    lr_decay_epochs: tuple = (2000, 4000)
    lr_decay_factor: float = 0.1
    kernel: KernelSpec = field(default_factory=KernelSpec)
    hidden_widths: tuple = (300, 50)
    latent_dim: int | None = None  # None means 2 * d
    theory_guard: bool = False
    seed: int = 0
    clip_norm: float | None = None
    log_every: int = 1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    early_stop: float | None = None
    checkpoint_every: int | None = None
    record_wall_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lr_decay_epochs", tuple(int(e) for e in self.lr_decay_epochs))
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.n < 2:
            raise ValueError(f"train.n must be >= 2, got {self.n}")
        if self.m < 1:
            raise ValueError(f"train.m must be >= 1, got {self.m}")
        if self.epochs < 1:
            raise ValueError(f"train.epochs must be >= 1, got {self.epochs}")
        if self.w_refresh_every < 1:
            raise ValueError("train.w_refresh_every must be >= 1")
        if any(e >= self.epochs or e < 0 for e in self.lr_decay_epochs):
            raise ValueError(
                f"train.lr_decay_epochs {list(self.lr_decay_epochs)} must lie in [0, epochs={self.epochs})"
            )
        if self.lr < 0:
            raise ValueError("train.lr must be nonnegative")
        if self.log_every < 1:
            raise ValueError("train.log_every must be >= 1")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ValueError("train.clip_norm must be positive")

    def arch(self, d: int) -> NetArch:
        return NetArch(self.latent_dim or 2 * d, self.hidden_widths, d, self.theory_guard)

    def lr_at(self, epoch: int) -> float:
        drops = sum(1 for e in self.lr_decay_epochs if epoch >= e)
        return self.lr * self.lr_decay_factor**drops

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "kernel"}
        out["lr_decay_epochs"] = list(self.lr_decay_epochs)
        out["hidden_widths"] = list(self.hidden_widths)
        out["kernel"] = self.kernel.to_dict()
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        doc = dict(doc)
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown train fields: {sorted(unknown)}")
        if "kernel" in doc:
            doc["kernel"] = KernelSpec.from_dict(doc["kernel"])
        return cls(**doc)


@dataclass
class TrainLog:
    records: list = field(default_factory=list)

    def append(self, **rec):
        if self.records and rec["epoch"] <= self.records[-1]["epoch"]:
            raise ValueError("log epochs must increase")
        self.records.append(rec)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    def extend(self, other: "TrainLog"):
        for r in other.records:
            self.append(**r)

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for r in self.records:
            row = [r["epoch"]] + [repr(float(r[c])) for c in LOG_COLUMNS[1:-1]]
            row.append("" if r["seconds"] is None else f"{r['seconds']:.3f}")
            writer.writerow(row)
        return buf.getvalue()


class TrainResult(NamedTuple):
    params: MlpParams
    log: TrainLog
    adam: AdamState
    epoch: int  # number of completed epochs


class TrainingAborted(RuntimeError):
    """Raised on a non-finite loss or gradient; carries the last good state."""

    def __init__(self, message, result: TrainResult):
        super().__init__(message)
        self.result = result


def _frequency_stream(master: RngStream, refresh_index: int) -> RngStream:
    return master.split("W").split(refresh_index)


def _latent_stream(master: RngStream, epoch: int) -> RngStream:
    return master.split("Z").split(epoch)


def train(
    cfg: TrainConfig,
    phi,
    resume: Checkpoint | None = None,
    on_checkpoint: Callable[[Checkpoint], None] | None = None,
) -> TrainResult:
    """Fit a generator to ``phi`` following the configured schedule.

    Each epoch draws fresh latents, while the frequencies are redrawn only
    every ``w_refresh_every`` epochs starting at epoch 0.  All randomness
    is keyed by ``(seed, label, epoch)`` so resuming from a checkpoint
    reproduces an uninterrupted run exactly.
    """
    d = int(phi.dim)
    arch = cfg.arch(d)
    master = RngStream(cfg.seed)
    if resume is None:
        params = init_mlp(arch, master.split("init"))
        adam = AdamState.zeros(arch.n_params, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
        start = 0
    else:
        if resume.params.arch.to_dict() != arch.to_dict():
            raise ValueError("checkpoint architecture does not match the training config")
        params, adam, start = resume.params, resume.adam, resume.epoch
    tlog = TrainLog()
    target = None
    warned_collapse = False
    t0 = time.perf_counter()

    def result(epoch):
        return TrainResult(params, tlog, adam, epoch)

    for epoch in range(start, cfg.epochs):
        refresh = epoch - epoch % cfg.w_refresh_every
        if target is None or epoch == refresh:
            freqs = sample_frequencies(cfg.kernel, _frequency_stream(master, refresh), cfg.m, d)
            target = TargetValues(freqs, values=eval_batch(phi, freqs.W))
        Z = _latent_stream(master, epoch).normal((cfg.n, arch.input_dim))
        Y, cache = forward(params, Z)
        value, dY = loss_and_grad(Y, target)
        grad = backward(params, cache, dY)
        gnorm = float(np.linalg.norm(grad))
        if not (np.isfinite(value) and np.isfinite(gnorm)):
            raise TrainingAborted(f"non-finite loss or gradient at epoch {epoch}", result(epoch))
        interp = value + target.cp_hat
        lr = cfg.lr_at(epoch)
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs - 1:
            tlog.append(
                epoch=epoch,
                loss=value,
                cp_hat=target.cp_hat,
                interpretable=interp,
                grad_norm=gnorm,
                lr=lr,
                seconds=(time.perf_counter() - t0) if cfg.record_wall_time else None,
            )
        if not warned_collapse and interp > 0.1 and float(np.var(Y, axis=0).max()) < 1e-6:
            warnings.warn(
                f"generator output collapsed to a constant at epoch {epoch} while L+C_P={interp:.4f}",
                RuntimeWarning,
            )
            warned_collapse = True
        if cfg.early_stop is not None and interp < cfg.early_stop:
            log.info("early stop at epoch %d with L+C_P=%.5f", epoch, interp)
            return result(epoch)
        params, adam = adam_step(params, adam, clip_by_norm(grad, cfg.clip_norm), lr)
        done = epoch + 1
        if on_checkpoint is not None and cfg.checkpoint_every and done % cfg.checkpoint_every == 0:
            on_checkpoint(Checkpoint(params, adam, done, cfg.seed, {}))
    return result(cfg.epochs)


def generate(params: MlpParams, stream: RngStream, n: int, latent_dim: int | None = None) -> np.ndarray:
    """Push ``n`` standard normal latent vectors through the generator."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    latent_dim = latent_dim or params.arch.input_dim
    if latent_dim != params.arch.input_dim:
        raise ValueError(f"latent dim {latent_dim} does not match network input {params.arch.input_dim}")
    out = np.empty((n, params.arch.output_dim))
    block = 100_000
    for start in range(0, n, block):
        k = min(block, n - start)
        Z = stream.split(start // block).normal((k, latent_dim))
        out[start : start + k] = forward(params, Z)[0]
    return out


def with_overrides(cfg: TrainConfig, **kw) -> TrainConfig:
    return replace(cfg, **kw)
