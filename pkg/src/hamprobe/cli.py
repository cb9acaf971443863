"""Command-line entry point: ``hamprobe <subcommand>``.

Testers print a JSON decision. Learners print the learned Hamiltonian in the
text format followed by a JSON report. ``run`` executes a seeded experiment
from a config file; ``config --defaults`` prints that file's defaults.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import hashing, learners, testers
from .channels import CHANNEL_KINDS, ChannelOracle, PauliChannel, distance_to_sparse_channel, generate_channel
from .config import CapacityError, ProtocolConfig
from .hamiltonian import (
    KINDS,
    GenerationError,
    Hamiltonian,
    ValidationError,
    distance_to_local,
    distance_to_sparse,
    generate_instance,
)
from .harness import ExperimentConfig, run_experiment
from .lemmas import SUITES, verify_lemmas
from .pauli import PauliString, weights
from .simulator import EvolutionOracle

TESTER_COMMANDS = {
    "test-locality": "close_to_k_local",
    "test-support": "close_to_k_local",
    "test-sparsity": "close_to_s_sparse",
    "test-junta": "k_local",
    "test-channel-sparsity": "close_to_s_sparse",
    "test-ham-sparsity-nomem": "close_to_s_sparse",
}
LEARNER_COMMANDS = {"learn-local": "k_local", "learn-sparse": "s_sparse", "learn-local-sparse": "k_local_s_sparse"}


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _common(p: argparse.ArgumentParser, channel: bool = False) -> None:
    src = p.add_mutually_exclusive_group()
    if channel:
        src.add_argument("--channel", help="Pauli channel file (text 'LABEL rate' lines or .json)")
    else:
        src.add_argument("--hamiltonian", help="Hamiltonian file (text 'LABEL coefficient' lines or .json)")
    kinds = CHANNEL_KINDS if channel else KINDS
    src.add_argument("--instance", choices=kinds, help="generate a seeded instance of this kind instead")
    p.add_argument("--instance-eps", type=float, default=None, help="target distance of a generated instance")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--eps1", type=float, default=0.05)
    p.add_argument("--eps2", type=float, default=0.6)
    p.add_argument("--eps", type=float, default=0.15)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "shots"), default="shots")
    p.add_argument("--memory", type=_bool, default=True, help="true or false")
    p.add_argument("--c-T", dest="c_T", type=float, default=1.0)
    p.add_argument("--c-t", dest="c_t", type=float, default=None)
    p.add_argument("--c-taylor", dest="c_taylor", type=float, default=1.0)
    p.add_argument("--C-BH", dest="C_BH", type=float, default=2.0)
    p.add_argument("--max-shots", dest="max_shots", type=float, default=1e15)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamprobe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in TESTER_COMMANDS:
        p = sub.add_parser(name, help=f"run {name} on one instance")
        _common(p, channel=name == "test-channel-sparsity")
        if name == "test-support":
            p.add_argument(
                "--support",
                action="append",
                default=None,
                help="comma-separated labels of one candidate support; repeat for several",
            )
    for name in LEARNER_COMMANDS:
        p = sub.add_parser(name, help=f"run {name} on one instance")
        _common(p)
        p.add_argument("--report", help="write the JSON report here instead of stdout")
    p = sub.add_parser("verify-lemmas", help="run a named verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("config", help="experiment config utilities")
    p.add_argument("--defaults", action="store_true", help="print the default experiment config")
    p = sub.add_parser("run", help="run a seeded experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="override the output path prefix")
    p.add_argument("--workers", type=int, default=None)
    return parser


def _protocol_config(args) -> ProtocolConfig:
    return ProtocolConfig(
        c_T=args.c_T, c_t=args.c_t, c_taylor=args.c_taylor, C_BH=args.C_BH, max_shots=int(args.max_shots)
    )


def _instance_eps(args, kind: str) -> float:
    if args.instance_eps is not None:
        return args.instance_eps
    return args.eps2 if kind.startswith("far") else args.eps1


def _hamiltonian(args, default_kind: str) -> Hamiltonian:
    if args.hamiltonian:
        return Hamiltonian.load(args.hamiltonian)
    kind = args.instance or default_kind
    rng = np.random.default_rng([args.seed, 1])
    return generate_instance(kind, args.n, k=args.k, s=args.s, eps=_instance_eps(args, kind), rng=rng)


def _channel(args) -> PauliChannel:
    if args.channel:
        return PauliChannel.load(args.channel)
    kind = args.instance or "close_to_s_sparse"
    return generate_channel(kind, args.n, args.s, _instance_eps(args, kind), np.random.default_rng([args.seed, 1]))


def _supports(args, n: int) -> list[list[PauliString]]:
    if not args.support:
        return [[PauliString.from_index(n, int(i)) for i in np.nonzero(weights(n) <= args.k)[0]]]
    out = []
    for group in args.support:
        labels = [lab.strip() for lab in group.split(",") if lab.strip()]
        strings = [PauliString.from_label(lab) for lab in labels]
        if any(x.n != n for x in strings):
            raise ValidationError(f"support {group!r} has labels of the wrong length for n={n}")
        out.append(strings)
    return out


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, default=_jsonable))


def _jsonable(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if hasattr(obj, "label"):
        return obj.label
    return str(obj)


def _run_tester(args) -> int:
    cfg = _protocol_config(args)
    cmd = args.command
    if cmd == "test-channel-sparsity":
        ch = _channel(args)
        oracle = ChannelOracle(ch, seed=args.seed, mode=args.mode)
        dec = hashing.test_channel_sparsity(oracle, args.s, args.eps1, args.eps2, delta=args.delta, config=cfg)
        exact = {"distance_to_sparse": distance_to_sparse_channel(ch, args.s)}
        _print_json({**dec.to_dict(), "instance": {"rates": {x.label: v for x, v in ch.items()}, **exact}})
        return 0
    h = _hamiltonian(args, TESTER_COMMANDS[cmd])
    oracle = EvolutionOracle(h, seed=args.seed, mode=args.mode)
    if cmd == "test-locality":
        decs = [testers.test_locality(oracle, args.k, args.eps1, args.eps2, args.delta, config=cfg)]
    elif cmd == "test-support":
        decs = testers.test_support(oracle, _supports(args, h.n), args.eps1, args.eps2, args.delta, config=cfg)
    elif cmd == "test-sparsity":
        decs = [testers.test_sparsity(oracle, args.s, args.eps1, args.eps2, args.delta, config=cfg)]
    elif cmd == "test-junta":
        decs = [
            testers.test_junta(oracle, args.k, args.eps1, args.eps2, args.memory, delta=args.delta, config=cfg)
        ]
    else:
        decs = [
            hashing.test_hamiltonian_sparsity_memoryless(
                oracle, args.s, args.eps1, args.eps2, delta=args.delta, config=cfg
            )
        ]
    instance = {
        "terms": {x.label: v for x, v in h.items()},
        "distance_to_local": distance_to_local(h, min(args.k, h.n)),
        "distance_to_sparse": distance_to_sparse(h, args.s),
    }
    payload = [d.to_dict() for d in decs]
    _print_json({"decisions": payload, "instance": instance} if len(payload) > 1 else {**payload[0], "instance": instance})
    return 0


def _run_learner(args) -> int:
    cfg = _protocol_config(args)
    h = _hamiltonian(args, LEARNER_COMMANDS[args.command])
    oracle = EvolutionOracle(h, seed=args.seed, mode=args.mode)
    if args.command == "learn-local":
        rep = learners.learn_local(oracle, args.k, args.eps, args.delta, args.memory, config=cfg)
    elif args.command == "learn-sparse":
        rep = learners.learn_sparse(oracle, args.s, args.eps, args.delta, args.memory, config=cfg)
    else:
        rep = learners.learn_local_sparse(oracle, args.k, args.s, args.eps, args.delta, args.memory, config=cfg)
    rep.verify(h)
    sys.stdout.write(rep.hamiltonian.to_text())
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(rep.to_json())
    else:
        print(rep.to_json())
    return 0


def _run_lemmas(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in suites:
        rep = verify_lemmas(name, seed=args.seed)
        print(rep.summary())
        ok &= rep.passed
    return 0 if ok else 1


def _run_experiment(args) -> int:
    config = ExperimentConfig.load(args.config)
    if args.output is not None:
        config.output = args.output
    if args.workers is not None:
        config.workers = args.workers
    report = run_experiment(config)
    summary = report.summary()
    summary.pop("rows")
    _print_json(summary)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in TESTER_COMMANDS:
            return _run_tester(args)
        if args.command in LEARNER_COMMANDS:
            return _run_learner(args)
        if args.command == "verify-lemmas":
            return _run_lemmas(args)
        if args.command == "config":
            if not args.defaults:
                parser.error("config: pass --defaults")
            sys.stdout.write(ExperimentConfig().to_ini())
            return 0
        return _run_experiment(args)
    except (ValueError, OSError, GenerationError, CapacityError) as exc:
        print(f"hamprobe: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
