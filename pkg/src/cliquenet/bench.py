"""Monte Carlo harness: error rate and mean iteration count against the
number of stored messages, for a list of retrieval configurations.

Spec files are plain ``key = value`` text::

    chi = 100
    ell = 64
    c = 12
    erasures = 3
    message_counts = 50000, 100000
    trials = 2000          # optional, default 2000
    seed = 1               # optional, default 0
    oracle = yes           # optional, adds an "ML" row

    [config gwsta12]
    dynamic = SOM
    activation = GWSTA
    alpha = 12
    gamma = 1
    criteria = CONV, ITER
    max_iters = 30

Every random draw is keyed on ``(master seed, M, trial)`` and, for the
retrieval itself, on the configuration name, so results do not depend on the
number of workers or on which other configurations are present.
"""

from __future__ import annotations

import argparse
import csv
import multiprocessing
import os
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .activation import GlskoParams, GwstaParams
from .network import NetworkShape, erase_segments, message_indices, new_network, store_many
from .oracle import MessageStore, oracle_success
from .retrieval import RetrievalConfig, retrieve

__all__ = [
    "SpecError",
    "ExperimentSpec",
    "ResultRow",
    "parse_spec",
    "parse_spec_text",
    "sample_messages",
    "run_experiment",
    "write_csv",
    "write_gnuplot",
    "main",
]

ORACLE_NAME = "ML"
CSV_HEADER = ["config", "M", "error_rate", "avg_iterations", "trials", "wall_time_ms"]

_TOP_KEYS = {
    "chi", "ell", "c", "erasures", "message_counts", "trials", "seed",
    "oracle", "oracle_ambiguity", "metric",
}
_REQUIRED = ("chi", "ell", "c", "erasures", "message_counts")
_CONFIG_KEYS = {
    "dynamic", "activation", "alpha", "beta", "mu", "gamma", "criteria",
    "max_iters", "strict_clique",
}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    chi: int
    ell: int
    c: int
    erasures: int
    message_counts: tuple[int, ...]
    trials: int = 2000
    seed: int = 0
    configs: tuple[tuple[str, RetrievalConfig], ...] = ()
    include_oracle: bool = False
    oracle_ambiguity: str = "strict"
    # "exact": the final active set must equal the stored clique;
    # "lenient": it must contain it (correct or ambiguous)
    metric: str = "exact"

    def __post_init__(self):
        object.__setattr__(self, "message_counts", tuple(int(m) for m in self.message_counts))
        object.__setattr__(self, "configs", tuple(self.configs))
        self.validate()

    @property
    def shape(self) -> NetworkShape:
        return NetworkShape(self.chi, self.ell)

    def validate(self) -> None:
        try:
            shape = self.shape
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        if not 2 <= self.c <= self.chi:
            raise SpecError(f"c must lie in [2, chi={self.chi}], got {self.c}")
        if not 0 <= self.erasures < self.c:
            raise SpecError(f"erasures must lie in [0, c), got {self.erasures} with c={self.c}")
        counts = self.message_counts
        if not counts:
            raise SpecError("message_counts is empty")
        if counts[0] < 1 or any(b <= a for a, b in zip(counts, counts[1:])):
            raise SpecError("message_counts must be positive and strictly increasing")
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if not self.configs and not self.include_oracle:
            raise SpecError("no [config] blocks and oracle disabled: nothing to run")
        names = [name for name, _ in self.configs]
        if self.include_oracle:
            names.append(ORACLE_NAME)
        if len(set(names)) != len(names):
            raise SpecError("config names must be unique (ML is reserved for the oracle)")
        for name, cfg in self.configs:
            act = cfg.activation
            if isinstance(act, GwstaParams) and act.alpha > shape.n:
                raise SpecError(f"config {name}: alpha={act.alpha} exceeds n={shape.n}")
        if self.oracle_ambiguity not in ("strict", "random"):
            raise SpecError(f"oracle_ambiguity must be strict or random, got {self.oracle_ambiguity!r}")
        if self.metric not in ("exact", "lenient"):
            raise SpecError(f"metric must be exact or lenient, got {self.metric!r}")

    @property
    def row_names(self) -> list[str]:
        names = [name for name, _ in self.configs]
        return names + [ORACLE_NAME] if self.include_oracle else names


@dataclass
class ResultRow:
    config: str
    M: int
    errors: int
    trials: int
    iterations: int
    wall_time_ms: float = field(default=0.0, compare=False)

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def avg_iterations(self) -> float:
        return self.iterations / self.trials


# -- spec parsing -------------------------------------------------------------

def _int(value: str, key: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise SpecError(f"line {lineno}: {key} must be an integer, got {value!r}") from None


def _bool(value: str, key: str, lineno: int) -> bool:
    v = value.lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise SpecError(f"line {lineno}: {key} must be yes/no, got {value!r}")


def _build_config(name: str, block: dict, lineno: int) -> RetrievalConfig:
    def get(key, default=None):
        return block[key][0] if key in block else default

    def as_int(key, default=None):
        if key not in block:
            return default
        value, line = block[key]
        return _int(value, key, line)

    activation = get("activation")
    if activation is None:
        raise SpecError(f"line {lineno}: config {name}: missing key activation")
    criteria = get("criteria")
    if criteria is None:
        raise SpecError(f"line {lineno}: config {name}: missing key criteria")
    crit = frozenset(c.strip().upper() for c in criteria.split(",") if c.strip())
    try:
        kind = activation.upper()
        if kind in ("GWSTA", "GWTA"):
            for key in ("beta", "mu"):
                if key in block:
                    raise SpecError(f"line {block[key][1]}: config {name}: {key} only applies to GLSKO")
            alpha = as_int("alpha", 1)
            if kind == "GWTA" and alpha != 1:
                raise ValueError("GWTA is GWSTA with alpha = 1")
            act = GwstaParams(alpha)
        elif kind == "GLSKO":
            if "alpha" in block:
                raise SpecError(f"line {block['alpha'][1]}: config {name}: alpha only applies to GWSTA")
            act = GlskoParams(as_int("beta", 1), as_int("mu"))
        else:
            raise ValueError(f"unknown activation {activation!r}")
        max_iters = as_int("max_iters")
        if "ITER" in crit and max_iters is None:
            raise ValueError("criteria include ITER but max_iters is missing")
        gamma = float(get("gamma", "1"))
        strict = _bool(get("strict_clique"), "strict_clique", block["strict_clique"][1]) if "strict_clique" in block else False
        return RetrievalConfig(
            dynamic=get("dynamic", "SOM"),
            activation=act,
            criteria=crit,
            max_iters=max_iters,
            gamma=gamma,
            strict_clique=strict,
        )
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError(f"line {lineno}: config {name}: {exc}") from None


def parse_spec_text(text: str) -> ExperimentSpec:
    top: dict[str, tuple[str, int]] = {}
    blocks: list[tuple[str, int, dict]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise SpecError(f"line {lineno}: malformed section header {raw.strip()!r}")
            parts = line[1:-1].split(None, 1)
            if len(parts) != 2 or parts[0] != "config":
                raise SpecError(f"line {lineno}: expected [config <name>], got {raw.strip()!r}")
            current = {}
            blocks.append((parts[1].strip(), lineno, current))
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        target, allowed = (top, _TOP_KEYS) if current is None else (current, _CONFIG_KEYS)
        if key not in allowed:
            where = "top level" if current is None else "config block"
            raise SpecError(f"line {lineno}: unknown key {key!r} at {where}")
        if key in target:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        target[key] = (value, lineno)

    missing = [k for k in _REQUIRED if k not in top]
    if missing:
        raise SpecError("missing mandatory keys: " + ", ".join(missing))

    def top_int(key, default=None):
        if key not in top:
            return default
        value, lineno = top[key]
        return _int(value, key, lineno)

    value, lineno = top["message_counts"]
    counts = tuple(_int(v.strip(), "message_counts", lineno) for v in value.split(",") if v.strip())
    configs = tuple((name, _build_config(name, block, ln)) for name, ln, block in blocks)
    oracle = _bool(top["oracle"][0], "oracle", top["oracle"][1]) if "oracle" in top else False
    try:
        return ExperimentSpec(
            chi=top_int("chi"),
            ell=top_int("ell"),
            c=top_int("c"),
            erasures=top_int("erasures"),
            message_counts=counts,
            trials=top_int("trials", 2000),
            seed=top_int("seed", 0),
            configs=configs,
            include_oracle=oracle,
            oracle_ambiguity=top.get("oracle_ambiguity", ("strict",))[0],
            metric=top.get("metric", ("exact",))[0],
        )
    except SpecError as exc:
        key = _blame(str(exc), top)
        if key is not None:
            raise SpecError(f"line {top[key][1]}: {exc}") from None
        raise


def _blame(message: str, top: dict):
    for key in ("erasures", "message_counts", "trials", "c", "chi", "ell", "metric", "oracle_ambiguity"):
        if message.startswith(key) and key in top:
            return key
    return None


def parse_spec(path) -> ExperimentSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return parse_spec_text(text)
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None


# -- sampling -----------------------------------------------------------------

def _seed(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=key)


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def sample_messages(shape: NetworkShape, c: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` distinct messages of order ``c``: clusters uniform without
    replacement, values uniform in ``[1, ell]``.  Duplicates are redrawn."""
    dtype = np.uint8 if shape.ell <= np.iinfo(np.uint8).max else np.uint16
    out = np.zeros((count, shape.chi), dtype=dtype)
    todo = np.arange(count)
    while todo.size:
        clusters = np.argpartition(rng.random((todo.size, shape.chi)), c - 1, axis=1)[:, :c]
        values = rng.integers(1, shape.ell + 1, size=(todo.size, c), dtype=dtype)
        block = np.zeros((todo.size, shape.chi), dtype=dtype)
        np.put_along_axis(block, clusters, values, axis=1)
        out[todo] = block
        _, first = np.unique(out, axis=0, return_index=True)
        keep = np.zeros(count, dtype=bool)
        keep[first] = True
        todo = np.flatnonzero(~keep)
    return out


# -- running ------------------------------------------------------------------

# Set before worker processes fork so they inherit the stored network.
_SHARED: dict = {}


def _run_trials(trial_ids):
    spec = _SHARED["spec"]
    network = _SHARED["network"]
    store = _SHARED["store"]
    M = _SHARED["M"]
    configs = _SHARED["configs"]
    k = len(spec.row_names)
    errors = np.zeros((k, len(trial_ids)), dtype=np.int64)
    iterations = np.zeros((k, len(trial_ids)), dtype=np.int64)
    elapsed = np.zeros(k)
    shape = network.shape
    for col, trial in enumerate(trial_ids):
        rng = np.random.default_rng(_seed(spec.seed, 1, M, trial))
        original = store[rng.integers(len(store))]
        probe = erase_segments(original, spec.erasures, rng)
        truth = message_indices(shape, original)
        for row, (name, cfg) in enumerate(configs):
            run_rng = np.random.default_rng(_seed(spec.seed, 2, M, trial, _name_key(name)))
            t0 = time.perf_counter()
            result = retrieve(network, probe, cfg, run_rng)
            elapsed[row] += time.perf_counter() - t0
            if spec.metric == "exact":
                ok = np.array_equal(result.active, truth)
            else:
                ok = bool(np.isin(truth, result.active).all())
            errors[row, col] = not ok
            iterations[row, col] = result.iterations
        if spec.include_oracle:
            run_rng = np.random.default_rng(_seed(spec.seed, 2, M, trial, _name_key(ORACLE_NAME)))
            t0 = time.perf_counter()
            ok = oracle_success(store, probe, original, spec.oracle_ambiguity, run_rng)
            elapsed[-1] += time.perf_counter() - t0
            errors[-1, col] = not ok
            iterations[-1, col] = 1
    return errors, iterations, elapsed


def run_experiment(
    spec: ExperimentSpec,
    threads: int = 1,
    strict_clique: bool = False,
    progress=None,
) -> list[ResultRow]:
    """Run every configuration at every message count.

    Rows come back in configuration order (ML last), then ascending M.
    ``progress`` is called with ``(M, rows_for_M)`` after each message count.
    """
    configs = list(spec.configs)
    if strict_clique:
        configs = [(name, replace(cfg, strict_clique=True)) for name, cfg in configs]
    shape = spec.shape
    by_name: dict[str, list[ResultRow]] = {name: [] for name in spec.row_names}
    for M in spec.message_counts:
        messages = sample_messages(shape, spec.c, M, np.random.default_rng(_seed(spec.seed, 0, M)))
        network = new_network(shape)
        store_many(network, messages)
        _SHARED.update(spec=spec, network=network, store=MessageStore(messages), M=M, configs=configs)
        try:
            errors, iterations, elapsed = _dispatch(spec.trials, threads)
        finally:
            _SHARED.clear()
        rows = []
        for i, name in enumerate(spec.row_names):
            row = ResultRow(
                name, M, int(errors[i].sum()), spec.trials, int(iterations[i].sum()),
                wall_time_ms=1000.0 * float(elapsed[i]),
            )
            by_name[name].append(row)
            rows.append(row)
        if progress is not None:
            progress(M, rows)
    return [row for name in spec.row_names for row in by_name[name]]


def _dispatch(trials: int, threads: int):
    ids = np.arange(trials)
    if threads <= 1 or trials < 2:
        return _run_trials(ids)
    chunks = np.array_split(ids, min(trials, 4 * threads))
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
        parts = list(pool.map(_run_trials, chunks))
    errors = np.concatenate([p[0] for p in parts], axis=1)
    iterations = np.concatenate([p[1] for p in parts], axis=1)
    elapsed = np.sum([p[2] for p in parts], axis=0)
    return errors, iterations, elapsed


# -- output -------------------------------------------------------------------

def write_csv(rows: list[ResultRow], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                r.config, r.M, f"{r.error_rate:.6f}", f"{r.avg_iterations:.6f}",
                r.trials, f"{r.wall_time_ms:.3f}",
            ])


def write_gnuplot(rows: list[ResultRow], path) -> list[Path]:
    """One whitespace-separated ``<stem>.<config>.dat`` file per configuration."""
    path = Path(path)
    written = []
    for name in dict.fromkeys(r.config for r in rows):
        safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)
        out = path.with_name(f"{path.stem}.{safe}.dat")
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(f"# {name}\n# M error_rate avg_iterations\n")
            for r in rows:
                if r.config == name:
                    fh.write(f"{r.M} {r.error_rate:.6f} {r.avg_iterations:.6f}\n")
        written.append(out)
    return written


# -- command line -------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment spec and write CSV")
    run.add_argument("spec")
    run.add_argument("-o", "--output", required=True)
    run.add_argument("--seed", type=int, help="override the spec's master seed")
    run.add_argument("--threads", type=int, default=1, help="worker processes")
    run.add_argument("--trials", type=int, help="override trials per point")
    run.add_argument("--strict-clique", action="store_true",
                     help="CLQ also checks that the active fanals are pairwise connected")
    run.add_argument("--gnuplot", action="store_true", help="also write one .dat file per config")
    run.add_argument("-q", "--quiet", action="store_true")

    val = sub.add_parser("validate", help="parse and check a spec file")
    val.add_argument("spec")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = parse_spec(args.spec)
        if args.command == "run":
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.trials is not None:
                overrides["trials"] = args.trials
            if overrides:
                spec = replace(spec, **overrides)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {len(spec.row_names)} configs x {len(spec.message_counts)} message counts, "
              f"{spec.trials} trials per point")
        return 0

    def report(M, rows):
        if not args.quiet:
            summary = "  ".join(f"{r.config}={r.error_rate:.4f}" for r in rows)
            print(f"M={M}: {summary}", file=sys.stderr, flush=True)

    try:
        out = Path(args.output)
        if not os.access(out.parent, os.W_OK):
            raise OSError(f"output directory {out.parent} is not writable")
        rows = run_experiment(spec, threads=args.threads, strict_clique=args.strict_clique, progress=report)
        write_csv(rows, out)
        if args.gnuplot:
            write_gnuplot(rows, out)
    except (OSError, ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
