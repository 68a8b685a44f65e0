import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from enum import IntEnum
from typing import Any, Iterator, Mapping

import numpy as np

from .blanket import greedy_blanket, pad_blanket, theorem1_certificate
from .channels import ChoiState, choi_of_channel
from .error import BlanketErrno, BlanketError, InvariantViolation
from .experiments import (
    SpinChainConfig,
    SweepConfig,
    alpha_monotonicity_warnings,
    appendix_b_check,
    constant_channel,
    empirical_contiguity,
    figure3_sweep,
    ghz_isometry_channel,
    haar_isometry_channel,
    identity_to_first_channel,
    spin_chain_channel,
)
from .optimizer import OptimizerConfig
from .serialize import (
    build_meta,
    load_state,
    sidecar_path,
    write_json,
    write_sweep_csv,
)
from .state import MultipartiteState, Region
from .verify import SUITES, run_suite

log = logging.getLogger(__name__)

EXAMPLES = ("constant", "ghz", "identity", "haar", "spinchain")
SHARED_KEYS = ("seed", "workers", "out", "restarts", "opt_iters")

# bad input rather than a failed computation
INPUT_ERRNOS = frozenset({
    BlanketErrno.NOT_SQUARE,
    BlanketErrno.DIM_MISMATCH,
    BlanketErrno.EMPTY_REGION,
    BlanketErrno.REGION_OUT_OF_RANGE,
    BlanketErrno.REGION_OVERLAP,
    BlanketErrno.INSUFFICIENT_SUBSYSTEMS,
    BlanketErrno.INVALID_ARGUMENT,
    BlanketErrno.TOO_LARGE,
})


class ExitCode(IntEnum):
    OK = 0
    VERIFY_FAILED = 1
    USAGE = 2
    INVARIANT = 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    out: str | None = None
    restarts: int = 8
    opt_iters: int = 2000
    params: Mapping[str, Any] = field(default_factory=dict)

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(
            restarts=self.restarts, max_iters=self.opt_iters, seed=self.seed,
        )

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["params"] = dict(self.params)
        # worker count never changes results
        doc.pop("workers")
        return doc


def _q_values(value) -> tuple[int, ...]:
    try:
        if isinstance(value, (list, tuple)):
            return tuple(int(q) for q in value)
        if isinstance(value, int):
            return (value,)
        text = str(value)
        if ".." in text:
            lo, hi = text.split("..", 1)
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(part) for part in text.split(","))
    except (TypeError, ValueError):
        raise UsageError(f"cannot parse q values from {value!r}")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON file with defaults; flags win")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--workers", type=int)
    shared.add_argument("--out", help="output file (default: stdout)")
    shared.add_argument("--restarts", type=int)
    shared.add_argument("--opt-iters", dest="opt_iters", type=int)
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="pyblanket",
        description="Quantum Markov blankets of multipartite states and channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("blanket", parents=[shared], help="greedy blanket of one state")
    p.add_argument("--example", choices=EXAMPLES)
    p.add_argument("--state", help="state file (JSON)")
    p.add_argument("--n", type=int)
    p.add_argument("--g", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--r", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--a", help="comma-separated subsystem indices of A")
    p.add_argument(
        "--certify", action="store_true", default=None,
        help="pad Q to q and certify the measure-and-prepare approximation",
    )

    p = sub.add_parser("spinchain", parents=[shared], help="t x q sweep on the Ising chain")
    p.add_argument("--n", type=int)
    p.add_argument("--g", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--q", help="q values: 1..8 or 1,2,4")
    p.add_argument("--r", type=int)

    p = sub.add_parser("verify", parents=[shared], help="run property suites")
    p.add_argument("suite", choices=[*SUITES, "all"])

    p = sub.add_parser("appendixb", parents=[shared], help="compatible channels check")
    p.add_argument("--grid", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                file_cfg = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}")
        if not isinstance(file_cfg, dict):
            raise UsageError(f"config {args.config} is not a JSON object")

    flags = {
        k: v for k, v in vars(args).items()
        if v is not None and k not in ("config", "verbose", "command")
    }
    merged = {**file_cfg, **flags}
    shared = {k: merged.pop(k) for k in SHARED_KEYS if k in merged}
    try:
        return RunConfig(command=args.command, params=merged, **shared)
    except TypeError as e:
        raise UsageError(str(e))


@contextmanager
def _output(path: str | None) -> Iterator:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def _load_choi(path: str, certify: bool) -> tuple[MultipartiteState, ChoiState | None]:
    try:
        state = load_state(path)
        return state, ChoiState(state) if certify else None
    except OSError as e:
        raise UsageError(f"cannot read state {path}: {e}")
    except BlanketError as e:
        raise UsageError(f"{path}: {e}")


def _blanket_source(
    cfg: RunConfig,
) -> tuple[MultipartiteState, Region, ChoiState | None]:
    params = cfg.params
    certify = bool(params.get("certify"))
    a = Region(tuple(int(i) for i in str(params.get("a", "0")).split(",")))
    if params.get("state"):
        state, choi = _load_choi(params["state"], certify)
        if choi is not None and a != choi.reference:
            raise UsageError("--certify treats the state as a Choi state; A must be 0")
        return state, a, choi

    example = params.get("example")
    if example is None and any(k in params for k in ("n", "g", "h", "t")):
        example = "spinchain"
    if example is None:
        raise UsageError("blanket needs --example, --state or spin-chain parameters")

    if example == "spinchain":
        spin = SpinChainConfig(
            n_total=params.get("n", 8),
            g=params.get("g", -1.05),
            h=params.get("h", 0.5),
            t=params.get("t", 1.0),
        )
        channel = spin_chain_channel(spin)
    elif example == "haar":
        rng = np.random.default_rng(cfg.seed)
        channel = haar_isometry_channel(5, rng)
    else:
        channel = {
            "constant": constant_channel,
            "ghz": ghz_isometry_channel,
            "identity": identity_to_first_channel,
        }[example](3)
    choi = choi_of_channel(channel)
    return choi.state, choi.reference, choi


def cmd_blanket(cfg: RunConfig) -> ExitCode:
    state, a, choi = _blanket_source(cfg)
    r = int(cfg.params.get("r", 1))
    q = int(cfg.params.get("q", 1))
    optimizer = cfg.optimizer()
    report = greedy_blanket(state, a, r, q, optimizer, cfg.workers)

    doc = report.to_dict()
    cert = None
    if cfg.params.get("certify"):
        padded = pad_blanket(report)
        cert = theorem1_certificate(
            choi, padded.blanket, padded.measurement, r, optimizer,
            workers=cfg.workers, q_size=q,
        )
        doc["certificate"] = cert.to_dict()
        doc["certificate"]["passed"] = cert.passed(optimizer.slack)
    doc["meta"] = build_meta(cfg.seed, cfg.to_dict())
    with _output(cfg.out) as f:
        write_json(doc, f)

    print(f"{'step':>4}  {'region':<12} {'CMI bits':>12}", file=sys.stderr)
    for i, step in enumerate(report.steps, 1):
        mark = " *" if i == report.bottleneck_index else ""
        print(f"{i:>4}  {str(step.region):<12} {step.cmi_bits:>12.6f}{mark}", file=sys.stderr)
    print(
        f"Q={report.blanket} alpha_Q={report.alpha_q_bits:.6f} "
        f"bound={report.bound_bits:.6f}",
        file=sys.stderr,
    )
    report.check_invariants(optimizer.slack)
    if cert is not None:
        print(
            f"certificate: max distance {cert.max_distance:.6f}, "
            f"bound {cert.theorem_bound:.6f}",
            file=sys.stderr,
        )
        if not cert.passed(optimizer.slack):
            log.error("certificate failed for Q=%s", cert.blanket)
            return ExitCode.INVARIANT
    return ExitCode.OK


def cmd_spinchain(cfg: RunConfig) -> ExitCode:
    params = cfg.params
    steps = int(params.get("steps", 13))
    tmax = float(params.get("tmax", 3.0))
    if steps < 1:
        raise UsageError(f"--steps must be >= 1, got {steps}")
    sweep = SweepConfig(
        times=tuple(float(t) for t in np.linspace(0.0, tmax, steps)),
        q_values=_q_values(params.get("q", "1..8")),
        spin=SpinChainConfig(
            n_total=params.get("n", 8),
            g=params.get("g", -1.05),
            h=params.get("h", 0.5),
        ),
        r_size=int(params.get("r", 1)),
    )
    rows = figure3_sweep(sweep, cfg.optimizer(), cfg.workers)

    with _output(cfg.out) as f:
        write_sweep_csv(rows, f)
    meta = build_meta(cfg.seed, cfg.to_dict())
    meta["errors"] = [
        {"t": row.t, "q": row.q, "message": row.error} for row in rows if row.error
    ]
    meta["monotonicity_warnings"] = alpha_monotonicity_warnings(rows)
    contiguity = empirical_contiguity(rows)
    meta["contiguous_blankets"] = sum(contiguity.values())
    meta["cells"] = len(contiguity)
    if cfg.out is not None:
        with open(sidecar_path(cfg.out), "w", encoding="utf-8") as f:
            write_json(meta, f)
    else:
        log.info("meta: %s", json.dumps(meta, default=str))

    if any(row.violation for row in rows):
        return ExitCode.INVARIANT
    return ExitCode.OK


def cmd_verify(cfg: RunConfig) -> ExitCode:
    results = run_suite(cfg.params["suite"], cfg.seed)
    for res in results:
        print(res.line())
    return ExitCode.OK if all(res.passed for res in results) else ExitCode.VERIFY_FAILED


def cmd_appendixb(cfg: RunConfig) -> ExitCode:
    report = appendix_b_check(int(cfg.params.get("grid", 201)))
    doc = report.to_dict()
    doc["meta"] = build_meta(cfg.seed, cfg.to_dict())
    with _output(cfg.out) as f:
        write_json(doc, f)
    return ExitCode.OK if report.passed else ExitCode.VERIFY_FAILED


COMMANDS = {
    "blanket": cmd_blanket,
    "spinchain": cmd_spinchain,
    "verify": cmd_verify,
    "appendixb": cmd_appendixb,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args)
        return int(COMMANDS[cfg.command](cfg))
    except InvariantViolation as e:
        log.error("invariant violated: %s", e.message)
        return int(ExitCode.INVARIANT)
    except UsageError as e:
        log.error("%s", e)
        return int(ExitCode.USAGE)
    except BlanketError as e:
        log.error("%s", e)
        if e.errcode in INPUT_ERRNOS:
            return int(ExitCode.USAGE)
        return int(ExitCode.INVARIANT)
