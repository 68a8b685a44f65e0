"""JSON and CSV artifacts.

Every artifact carries ``{seed, version, config_hash}``: JSON documents under
a ``meta`` key, CSV files in a ``<path>.meta.json`` sidecar so the CSV header
stays fixed.
"""

import csv
import hashlib
import json
import math
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import IO, Any, Iterable, Mapping

import numpy as np

from .error import BlanketErrno, BlanketError
from .state import MultipartiteState

CSV_HEADER = ("t", "q", "alpha_q_bits", "bound_bits", "Q_indices", "runtime_s")


def package_version() -> str:
    try:
        return version("pyblanket")
    except PackageNotFoundError:
        return "0.1.0"


def canonical_json(config: Mapping[str, Any]) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(config: Mapping[str, Any]) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def build_meta(seed: int, config: Mapping[str, Any]) -> dict:
    return {
        "seed": seed,
        "version": package_version(),
        "config_hash": config_hash(config),
        "config": dict(config),
    }


def state_to_dict(s: MultipartiteState) -> dict:
    return {
        "dims": list(s.dims),
        "labels": list(s.labels),
        "rho_real": s.rho.real.tolist(),
        "rho_imag": s.rho.imag.tolist(),
    }


def state_from_dict(doc: Mapping[str, Any]) -> MultipartiteState:
    try:
        dims = tuple(int(d) for d in doc["dims"])
        rho = np.asarray(doc["rho_real"], dtype=float)
        if "rho_imag" in doc:
            rho = rho + 1j * np.asarray(doc["rho_imag"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT, f"malformed state document: {e}",
        ) from e
    return MultipartiteState(rho, dims, tuple(doc.get("labels", ())))


def load_state(path: str | Path) -> MultipartiteState:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise BlanketError(
                BlanketErrno.INVALID_ARGUMENT, f"{path}: not JSON: {e}",
            ) from e
    return state_from_dict(doc)


def dump_state(s: MultipartiteState, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(state_to_dict(s), f)


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    return value


def write_json(doc: Mapping[str, Any], stream: IO[str]) -> None:
    json.dump(_finite(dict(doc)), stream, indent=2)
    stream.write("\n")


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def sweep_csv_rows(rows: Iterable) -> list[list[str]]:
    return [
        [
            _fmt(row.t),
            str(row.q),
            _fmt(row.alpha_q_bits),
            _fmt(row.bound_bits),
            ";".join(map(str, row.blanket)),
            _fmt(row.runtime_s),
        ]
        for row in rows
    ]


def write_sweep_csv(rows: Iterable, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(sweep_csv_rows(rows))


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")
