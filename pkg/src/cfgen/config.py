"""Experiment configuration: JSON in, fully resolved JSON out."""

from __future__ import annotations

import importlib
import importlib.util
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charfn import GaussianMixtureSpec, StableSpec, random_gaussian_mixture_spec
from .evaluation import EvalConfig
from .formats import config_hash
from .numkit import RngStream
from .trainer import TrainConfig

TARGET_TYPES = ("gaussian_mixture", "stable", "external")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def load_plugin(spec: str, args: dict | None = None):
    """Load ``"package.module:attr"`` or ``"path/to/file.py:attr"``.

    A callable attribute is called with ``args``; the result must expose
    ``dim`` and ``eval_batch``.
    """
    if ":" not in spec:
        raise ConfigError(f"target.plugin must look like 'module:attr' or 'file.py:attr', got {spec!r}")
    mod_name, attr = spec.rsplit(":", 1)
    if mod_name.endswith(".py"):
        path = Path(mod_name)
        modspec = importlib.util.spec_from_file_location(f"cfgen_plugin_{path.stem}", path)
        if modspec is None or not path.exists():
            raise ConfigError(f"target.plugin file not found: {path}")
        module = importlib.util.module_from_spec(modspec)
        modspec.loader.exec_module(module)
    else:
        try:
            module = importlib.import_module(mod_name)
        except ImportError as exc:
            raise ConfigError(f"target.plugin: cannot import {mod_name}: {exc}") from None
    try:
        obj = getattr(module, attr)
    except AttributeError:
        raise ConfigError(f"target.plugin: {mod_name} has no attribute {attr!r}") from None
    if callable(obj) and not hasattr(obj, "eval_batch"):
        obj = obj(**(args or {}))
    if not (hasattr(obj, "dim") and hasattr(obj, "eval_batch")):
        raise ConfigError("target.plugin must provide an object with 'dim' and 'eval_batch'")
    return obj


def _resolve_target(doc: dict, seed: int) -> dict:
    kind = doc.get("type")
    if kind not in TARGET_TYPES:
        raise ConfigError(f"target.type must be one of {TARGET_TYPES}, got {kind!r}")
    stream = RngStream(seed).split("target")
    try:
        if kind == "gaussian_mixture":
            extra = set(doc) - {"type", "mus", "sigmas", "random"}
            if extra:
                raise ConfigError(f"target: unknown gaussian_mixture fields {sorted(extra)} (components are equally weighted)")
            if "random" in doc:
                r = doc["random"]
                spec = random_gaussian_mixture_spec(int(r["d"]), int(r["J"]), stream, float(r.get("spread", 3.0)))
            else:
                spec = GaussianMixtureSpec.from_dict(doc)
            return spec.to_dict()
        if kind == "stable":
            out = {
                "type": "stable",
                "alpha": float(doc["alpha"]),
                "tau": [float(t) for t in doc["tau"]],
            }
            if "atoms" in doc:
                StableSpec.from_dict(doc)
                out.update(atoms=doc["atoms"], weights=doc.get("weights"))
            else:
                d = len(out["tau"])
                src = doc.get("spectral_source", {})
                out["spectral_source"] = {
                    "mu": list(src.get("mu", [0.0] * d)),
                    "sigma": [list(r) for r in src.get("sigma", np.eye(d).tolist())],
                }
                out["M"] = int(doc.get("M", 6000))
            return out
        if "plugin" not in doc:
            raise ConfigError("target.plugin is required for external targets")
        return {"type": "external", "plugin": doc["plugin"], "args": dict(doc.get("args", {}))}
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"target: {exc}") from None


def build_target(tdoc: dict, seed: int):
    """Materialise the characteristic function described by a resolved target."""
    kind = tdoc["type"]
    if kind == "gaussian_mixture":
        return GaussianMixtureSpec.from_dict(tdoc)
    if kind == "stable":
        if "atoms" in tdoc:
            return StableSpec.from_dict(tdoc)
        src = tdoc["spectral_source"]
        return StableSpec.from_gaussian_source(
            tdoc["alpha"], tdoc["tau"], src["mu"], src["sigma"], tdoc["M"],
            RngStream(seed).split("target").split("atoms"),
        )
    return load_plugin(tdoc["plugin"], tdoc.get("args"))


@dataclass
class ExperimentConfig:
    target: dict
    train: TrainConfig
    eval: EvalConfig = field(default_factory=EvalConfig)
    output_dir: str = "runs/default"
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "target": self.target,
            "train": self.train.to_dict(),
            "eval": self.eval.to_dict(),
        }

    @property
    def hash(self) -> str:
        return config_hash(self.to_dict())

    def build_target(self):
        return build_target(self.target, self.seed)


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - {"seed", "output_dir", "target", "train", "eval"}
    if unknown:
        raise ConfigError(f"unknown top-level fields: {sorted(unknown)}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    if "target" not in doc:
        raise ConfigError("target is required")
    target = _resolve_target(doc["target"], seed)
    tdoc = dict(doc.get("train", {}))
    tdoc.setdefault("seed", seed)
    try:
        train = TrainConfig.from_dict(tdoc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"train: {exc}") from None
    try:
        ev = EvalConfig.from_dict(doc.get("eval", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"eval: {exc}") from None
    return ExperimentConfig(target, train, ev, str(doc.get("output_dir", "runs/default")), seed)


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(doc)
