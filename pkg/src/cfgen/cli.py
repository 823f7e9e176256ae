"""Command line interface: ``cfgen {train,sample,eval,selftest}``.

Exit codes: 0 success, 1 failed self-test, 2 configuration error,
3 numerical abort, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import _backend
from .baselines import (
    project_stable_params,
    sample_gaussian_mixture,
    sample_stable_discrete_spectral,
    sample_stable_univ,
)
from .charfn import GaussianMixtureSpec, StableSpec
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import ConfigError, load_config, parse_config
from .evaluation import kde_density, projection_quantiles, projection_vectors, two_sample_report
from .formats import (
    git_describe,
    provenance,
    write_density_csv,
    write_json,
    write_sample_csv,
    write_table_csv,
)
from .numkit import RngStream
from .trainer import TrainingAborted, generate, train

log = logging.getLogger("cfgen")

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

CHECKPOINT_NAME = "checkpoint.bin"
LOG_NAME = "train_log.csv"
RESOLVED_NAME = "resolved_config.json"


def _load_checkpoint(path):
    try:
        return load_checkpoint(path)
    except ValueError as exc:
        raise OSError(str(exc)) from None


def _checkpoint_meta(cfg, git):
    return {"config_hash": cfg.hash, "git": git, "config": cfg.to_dict()}


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        doc = cfg.to_dict()
        doc["seed"] = args.seed
        doc["train"]["seed"] = args.seed
        cfg = parse_config(doc)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    git = git_describe()
    phi = cfg.build_target()
    write_json(out / RESOLVED_NAME, cfg.to_dict())
    ck_path = out / CHECKPOINT_NAME

    def on_checkpoint(ck):
        ck.meta = _checkpoint_meta(cfg, git)
        save_checkpoint(ck_path, ck, args.format)

    try:
        result = train(cfg.train, phi, on_checkpoint=on_checkpoint)
    except TrainingAborted as exc:
        r = exc.result
        on_checkpoint(Checkpoint(r.params, r.adam, r.epoch, cfg.train.seed, {}))
        (out / LOG_NAME).write_text(r.log.to_csv(provenance(cfg.hash, git)))
        print(f"training aborted: {exc}; last good checkpoint kept at {ck_path}", file=sys.stderr)
        return EXIT_NUMERIC
    on_checkpoint(Checkpoint(result.params, result.adam, result.epoch, cfg.train.seed, {}))
    (out / LOG_NAME).write_text(result.log.to_csv(provenance(cfg.hash, git)))
    last = result.log.records[-1]
    print(f"trained {result.epoch} epochs; final L+C_P = {last['interpretable']:.5f}; artifacts in {out}")
    return EXIT_OK


def _target_dim(target):
    if target.get("type") == "gaussian_mixture":
        return len(target["mus"][0])
    if target.get("type") == "stable":
        return len(target["tau"])
    return None


def cmd_sample(args) -> int:
    ck = _load_checkpoint(args.checkpoint)
    n = args.n if args.n is not None else 1000
    seed = args.seed if args.seed is not None else 0
    target = ck.meta.get("config", {}).get("target", {})
    d = _target_dim(target)
    if d is not None and d != ck.params.arch.output_dim:
        raise ConfigError(f"checkpoint output dim {ck.params.arch.output_dim} does not match target dim {d}")
    X = generate(ck.params, RngStream(seed).split("sample"), n)
    header = provenance(ck.meta.get("config_hash", "none"), ck.meta.get("git"))
    write_sample_csv(args.out or "samples.csv", X, header + [f"seed={seed}", f"n={n}"])
    return EXIT_OK


def _oracle_samples(phi, stream, n):
    if isinstance(phi, GaussianMixtureSpec):
        return "exact", sample_gaussian_mixture(phi, stream, n)
    if isinstance(phi, StableSpec):
        return "discrete-spectral", sample_stable_discrete_spectral(phi, stream, n)
    return None, None


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    ck = _load_checkpoint(args.checkpoint)
    phi = cfg.build_target()
    if ck.params.arch.output_dim != phi.dim:
        raise ConfigError(f"checkpoint output dim {ck.params.arch.output_dim} does not match target dim {phi.dim}")
    ev = cfg.eval
    out = Path(args.out or cfg.output_dir)
    seed = args.seed if args.seed is not None else cfg.seed
    root = RngStream(seed).split("eval")
    git = git_describe()
    header = provenance(cfg.hash, git)
    n = args.n or ev.sample_size
    Y = generate(ck.params, root.split("generator"), n)
    d = phi.dim
    us = projection_vectors(d)

    # quantile table
    rows = []
    oracle_label = "none"
    for k, u in enumerate(us, start=1):
        rows.append((f"u{k}", "generator", *projection_quantiles(Y, u, ev.quantiles)))
        if isinstance(phi, StableSpec):
            oracle_label = "projection"
            p = project_stable_params(phi, u)
            ref = sample_stable_univ(p, root.split("oracle").split(k), n)
            rows.append((f"u{k}", "oracle", *np.quantile(ref, ev.quantiles)))
        elif isinstance(phi, GaussianMixtureSpec):
            oracle_label = "exact"
            if k == 1:
                X_exact = sample_gaussian_mixture(phi, root.split("oracle"), n)
            rows.append((f"u{k}", "oracle", *projection_quantiles(X_exact, u, ev.quantiles)))
    if oracle_label == "none":
        warnings.warn("no baseline sampler for this target; quantile oracle skipped")
    write_table_csv(
        out / "quantiles.csv",
        ["u", "source", *[f"q{q:g}" for q in ev.quantiles]],
        rows,
        header + [f"oracle={oracle_label}"],
    )

    # MMD report
    nm = min(ev.mmd_sample_size, n)
    kind, ref = _oracle_samples(phi, root.split("mmd-oracle"), nm)
    report = {"oracle": kind or "none", "kernel": cfg.train.kernel.to_dict(), "n": nm}
    if ref is not None:
        rep = two_sample_report(Y[:nm], ref, cfg.train.kernel, ev.permutations, root.split("perm"))
        report["generator_vs_oracle"] = rep.to_dict()
    half = nm // 2
    Y2 = generate(ck.params, root.split("generator-2"), nm)
    rep = two_sample_report(Y[:half], Y2[:half], cfg.train.kernel, ev.permutations, root.split("perm-self"))
    report["generator_vs_generator"] = rep.to_dict()
    report["meta"] = {"config_hash": cfg.hash, "git": git}
    write_json(out / "mmd_report.json", report)

    # density grids
    def bounds_for(X, j):
        if ev.grid_bounds is not None:
            return tuple(ev.grid_bounds)
        lo, hi = np.quantile(X[:, j], [0.005, 0.995])
        pad = 0.1 * (hi - lo)
        return (lo - pad, hi + pad)

    sources = {"generator": Y}
    if isinstance(phi, GaussianMixtureSpec):
        sources["oracle"] = sample_gaussian_mixture(phi, root.split("density-oracle"), n)
    for name, X in sources.items():
        for j in range(d):
            g = kde_density(X, (j,), ev.grid_resolution, bounds_for(Y, j), ev.contour_levels)
            write_density_csv(out / f"density_{name}_x{j + 1}.csv", g, header)
        if d >= 2:
            dims = tuple(ev.bivariate_dims) if ev.bivariate_dims else (d - 2, d - 1)
            b = [bounds_for(Y, j) for j in dims]
            res = min(ev.grid_resolution, 101)
            g = kde_density(X, dims, res, b, ev.contour_levels)
            write_density_csv(out / f"density_{name}_x{dims[0] + 1}_x{dims[1] + 1}.csv", g, header)
    print(f"evaluation written to {out} (oracle: {oracle_label})")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    ok = True
    for name, passed, detail in run_all(args.seed or 0):
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    print(f"backend: {_backend.name()}")
    return EXIT_OK if ok else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfgen", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None, help="worker threads for the compiled kernels")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a generator from a JSON config")
    t.add_argument("--config", required=True)
    t.add_argument("--out", help="output directory (overrides output_dir)")
    t.add_argument("--seed", type=int)
    t.add_argument("--format", choices=("binary", "json"), default="binary", help="checkpoint format")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="draw samples from a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("eval", help="quantile tables, MMD report and density grids")
    e.add_argument("--config", required=True)
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--out")
    e.add_argument("--seed", type=int)
    e.add_argument("--n", type=int, help="generator sample size (default eval.sample_size)")
    e.set_defaults(func=cmd_eval)

    st = sub.add_parser("selftest", help="identity, gradient and Bochner checks")
    st.add_argument("--seed", type=int)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        _backend.set_num_threads(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, TrainingAborted) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
