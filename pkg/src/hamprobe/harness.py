"""Seeded experiment runner with exact ground truth.

Each seed builds one promise instance (close or far), runs the protocol on a
fresh oracle, and scores the outcome against exact distances.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channels import ChannelOracle, distance_to_sparse_channel, generate_channel
from .config import ProtocolConfig
from .decision import CLOSE, FAR
from .hamiltonian import (
    GenerationError,
    Hamiltonian,
    distance_to_local,
    distance_to_sparse,
    generate_instance,
    operator_norm,
)
from .hashing import test_channel_sparsity, test_hamiltonian_sparsity_memoryless
from .learners import learn_local, learn_local_sparse, learn_sparse
from .pauli import PauliString, weights
from .simulator import EvolutionOracle, evolution_unitary
from .testers import junta_distance_bounds, test_junta, test_locality, test_sparsity, test_support

TESTERS = (
    "test-locality",
    "test-support",
    "test-sparsity",
    "test-junta",
    "test-channel-sparsity",
    "test-ham-sparsity-nomem",
)
LEARNERS = ("learn-local", "learn-sparse", "learn-local-sparse")
PROTOCOLS = TESTERS + LEARNERS
CSV_COLUMNS = ("seed", "verdict/err", "gamma", "exact_distance", "queries", "evolution_time", "clamped_flag")
SECTION = "experiment"


@dataclass
class ExperimentConfig:
    protocol: str = "test-locality"
    n: int = 4
    k: int = 1
    s: int = 1
    eps1: float = 0.05
    eps2: float = 0.6
    eps: float = 0.15
    delta: float = 0.1
    mode: str = "shots"
    memory: bool = True
    instance: str = "mixed"
    seed_start: int = 0
    seed_stop: int = 10
    c_T: float = 1.0
    c_t: float | None = None
    c_taylor: float = 1.0
    C_BH: float = 2.0
    max_shots: int = 10**15
    magnitude_lo: float = 0.2
    magnitude_hi: float = 1.0
    workers: int = 1
    output: str = ""

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; choose from {', '.join(PROTOCOLS)}")
        if self.instance not in ("close", "far", "mixed"):
            raise ValueError("instance must be close, far or mixed")
        if self.seed_stop < self.seed_start:
            raise ValueError("seed_stop must be >= seed_start")

    @property
    def seeds(self) -> range:
        return range(self.seed_start, self.seed_stop)

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            c_T=self.c_T,
            c_t=self.c_t,
            c_taylor=self.c_taylor,
            C_BH=self.C_BH,
            max_shots=self.max_shots,
        )

    def to_ini(self) -> str:
        lines = [f"[{SECTION}]"]
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'' if v is None else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser.read_string(text)
        if SECTION not in parser:
            raise ValueError(f"config has no [{SECTION}] section")
        return cls.from_mapping(dict(parser[SECTION]))

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for key, value in raw.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            kw[key] = _coerce(key, value)
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
        return cls.from_ini(text)


_INTS = {"n", "k", "s", "seed_start", "seed_stop", "workers", "max_shots"}
_FLOATS = {"eps1", "eps2", "eps", "delta", "c_T", "c_taylor", "C_BH", "magnitude_lo", "magnitude_hi"}


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    value = value.strip()
    if key in _INTS:
        return int(float(value)) if "e" in value.lower() else int(value)
    if key in _FLOATS:
        return float(value)
    if key == "c_t":
        return None if value in ("", "None") else float(value)
    if key == "memory":
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"memory must be true or false, got {value!r}")
        return value.lower() in ("true", "1", "yes")
    return value


# ---- instances ------------------------------------------------------------------


def _side(config: ExperimentConfig, seed: int) -> str:
    if config.instance != "mixed":
        return config.instance
    return CLOSE if seed % 2 == 0 else FAR


def _junta_hamiltonian(n: int, k: int, rng, magnitude) -> Hamiltonian:
    """Random Hamiltonian supported on a random k-subset of qubits."""
    K = sorted(int(q) for q in rng.choice(n, size=k, replace=False))
    km = sum(1 << (n - 1 - q) for q in K)
    idx = np.arange(1, 1 << (2 * n))
    inside = idx[((idx >> n) | (idx & ((1 << n) - 1))) & ~km == 0]
    m = min(len(inside), 3)
    picks = rng.choice(inside, size=m, replace=False) if m else []
    vals = rng.uniform(*magnitude, size=m) * rng.choice([-1.0, 1.0], size=m)
    h = Hamiltonian(n, {PauliString.from_index(n, int(i)): v for i, v in zip(picks, vals)})
    norm = operator_norm(h) if len(h) else 0.0
    return h.scaled(1.0 / norm) if norm > 1 else h


def _far_junta_unitary(n: int, k: int, rng) -> np.ndarray:
    """exp(-i pi/4 P) with P of weight k+1: half the weight lies off every k-subset."""
    qubits = sorted(int(q) for q in rng.choice(n, size=min(k + 1, n), replace=False))
    chars = ["I"] * n
    for q in qubits:
        chars[q] = "XYZ"[int(rng.integers(3))]
    h = Hamiltonian.from_labels({"".join(chars): 1.0})
    return evolution_unitary(h, math.pi / 4)


def build_instance(config: ExperimentConfig, seed: int):
    """(object, exact distance, side, extra) for one seed."""
    rng = np.random.default_rng([seed, 1])
    side = _side(config, seed)
    p, n = config.protocol, config.n
    mag = (config.magnitude_lo, config.magnitude_hi)
    eps = config.eps1 if side == CLOSE else config.eps2
    if p in ("test-locality", "test-support"):
        kind = "close_to_k_local" if side == CLOSE else "far_from_k_local"
        h = generate_instance(kind, n, k=config.k, eps=eps, rng=rng, magnitude=mag)
        return h, distance_to_local(h, config.k), side, {}
    if p in ("test-sparsity", "test-ham-sparsity-nomem"):
        kind = "close_to_s_sparse" if side == CLOSE else "far_from_s_sparse"
        h = generate_instance(kind, n, s=config.s, eps=eps, rng=rng, magnitude=mag)
        return h, distance_to_sparse(h, config.s), side, {}
    if p == "test-channel-sparsity":
        kind = "close_to_s_sparse" if side == CLOSE else "far_from_s_sparse"
        ch = generate_channel(kind, n, config.s, eps, rng)
        return ch, distance_to_sparse_channel(ch, config.s), side, {}
    if p == "test-junta":
        if side == CLOSE:
            h = _junta_hamiltonian(n, config.k, rng, mag)
            U = evolution_unitary(h, 1.0)
            target = h
        else:
            if config.k >= n:
                raise GenerationError("every unitary is an n-junta")
            U = _far_junta_unitary(n, config.k, rng)
            target = U
        lo, hi = junta_distance_bounds(U, config.k)
        return target, lo, side, {"distance_upper": hi}
    kind = {"learn-local": "k_local", "learn-sparse": "s_sparse", "learn-local-sparse": "k_local_s_sparse"}[p]
    h = generate_instance(kind, n, k=config.k, s=config.s, rng=rng, magnitude=mag)
    return h, 0.0, None, {}


# ---- trials ---------------------------------------------------------------------


def _expected(config: ExperimentConfig, dist: float, extra: dict) -> str | None:
    upper = extra.get("distance_upper", dist)
    if upper <= config.eps1 + 1e-12:
        return CLOSE
    if dist >= config.eps2 - 1e-12:
        return FAR
    return None


def run_trial(config: ExperimentConfig, seed: int) -> dict:
    row = {"seed": seed, "verdict/err": "", "gamma": "", "exact_distance": "", "queries": 0, "evolution_time": 0.0}
    row["clamped_flag"] = False
    try:
        target, dist, side, extra = build_instance(config, seed)
    except GenerationError as exc:
        row.update({"verdict/err": "infeasible", "success": None, "error": str(exc)})
        return row
    pc = config.protocol_config()
    p = config.protocol
    row["exact_distance"] = dist
    if p == "test-channel-sparsity":
        oracle = ChannelOracle(target, seed=seed, mode=config.mode)
    elif isinstance(target, np.ndarray):
        oracle = EvolutionOracle.from_unitary(target, seed=seed, mode=config.mode)
    else:
        oracle = EvolutionOracle(target, seed=seed, mode=config.mode)
    if p in LEARNERS:
        if p == "learn-local":
            rep = learn_local(oracle, config.k, config.eps, config.delta, config.memory, config=pc)
        elif p == "learn-sparse":
            rep = learn_sparse(oracle, config.s, config.eps, config.delta, config.memory, config=pc)
        else:
            rep = learn_local_sparse(oracle, config.k, config.s, config.eps, config.delta, config.memory, config=pc)
        err = rep.verify(target)
        row.update({"verdict/err": err, "success": err <= config.eps, "detected": [x.label for x in rep.detected]})
    else:
        if p == "test-locality":
            dec = test_locality(oracle, config.k, config.eps1, config.eps2, config.delta, config=pc)
        elif p == "test-support":
            support = [PauliString.from_index(config.n, int(i)) for i in np.nonzero(weights(config.n) <= config.k)[0]]
            (dec,) = test_support(oracle, [support], config.eps1, config.eps2, config.delta, config=pc)
        elif p == "test-sparsity":
            dec = test_sparsity(oracle, config.s, config.eps1, config.eps2, config.delta, config=pc)
        elif p == "test-junta":
            dec = test_junta(oracle, config.k, config.eps1, config.eps2, config.memory, delta=config.delta, config=pc)
        elif p == "test-channel-sparsity":
            dec = test_channel_sparsity(oracle, config.s, config.eps1, config.eps2, delta=config.delta, config=pc)
        else:
            dec = test_hamiltonian_sparsity_memoryless(
                oracle, config.s, config.eps1, config.eps2, delta=config.delta, config=pc
            )
        expected = _expected(config, dist, extra)
        row.update(
            {
                "verdict/err": dec.verdict,
                "gamma": dec.gamma,
                "expected": expected,
                "success": None if expected is None else dec.verdict == expected,
            }
        )
    row["queries"] = oracle.ledger.queries
    row["evolution_time"] = oracle.ledger.evolution_time
    row["clamped_flag"] = oracle.ledger.clamped
    row.update({k: v for k, v in extra.items()})
    return row


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[dict] = field(default_factory=list)
    started: float = 0.0
    wall_time: float = 0.0

    @property
    def scored(self) -> list[dict]:
        return [r for r in self.rows if r.get("success") is not None]

    @property
    def success_rate(self) -> float | None:
        scored = self.scored
        return None if not scored else sum(bool(r["success"]) for r in scored) / len(scored)

    def summary(self) -> dict:
        return {
            "config": asdict(self.config),
            "trials": len(self.rows),
            "scored": len(self.scored),
            "success_rate": self.success_rate,
            "infeasible": sum(r["verdict/err"] == "infeasible" for r in self.rows),
            "undecided": sum(r["verdict/err"] == "undecided" for r in self.rows),
            "clamped": sum(bool(r["clamped_flag"]) for r in self.rows),
            "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(self.started)),
            "wall_time": self.wall_time,
            "rows": self.rows,
        }

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        try:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(CSV_COLUMNS)
                for r in self.rows:
                    w.writerow([_cell(r[c]) for c in CSV_COLUMNS])
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc

    def write_json(self, path: str | Path) -> None:
        path = Path(path)
        try:
            path.write_text(json.dumps(self.summary(), indent=2, default=_plain))
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _cell(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _plain(obj):
    if hasattr(obj, "item"):
        return obj.item()
    return str(obj)


def _trial(args):
    return run_trial(*args)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every seed; writes <output>.csv and <output>.json when output is set."""
    report = ExperimentReport(config, started=time.time())
    w0 = time.perf_counter()
    jobs = [(config, seed) for seed in config.seeds]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_trial, jobs))
    else:
        rows = [_trial(j) for j in jobs]
    report.rows = sorted(rows, key=lambda r: r["seed"])
    report.wall_time = time.perf_counter() - w0
    if config.output:
        out = Path(config.output)
        if out.parent and not out.parent.exists():
            raise OSError(f"output directory {out.parent} does not exist")
        report.write_csv(out.with_suffix(".csv"))
        report.write_json(out.with_suffix(".json"))
    return report
