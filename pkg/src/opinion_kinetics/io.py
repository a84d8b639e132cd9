"""Artifact file schemas.

Every file starts with a comment block: the package banner line and one JSON
line holding the full run configuration (version, command, parameters, seed),
enough to reproduce the file byte for byte. Floats are written with repr
(shortest round-trip form).
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from . import __version__
from .core import DomainError, SampleSet

BANNER = f"# opinion-kinetics v{__version__}"


def _meta_lines(meta: Dict) -> List[str]:
    payload = json.dumps(meta, sort_keys=True, default=str)
    return [BANNER, f"# {payload}"]


def _write_lines(path, lines: Sequence[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n")


def write_samples_csv(path, samples: SampleSet, meta: Dict) -> None:
    lines = _meta_lines(meta) + ["x"] + [repr(float(v)) for v in samples.values]
    _write_lines(path, lines)


def write_density_csv(path, x: np.ndarray, rho: np.ndarray, meta: Dict) -> None:
    write_xy_csv(path, "x,rho", x, rho, meta)


def write_xy_csv(path, header: str, x: np.ndarray, y: np.ndarray, meta: Dict) -> None:
    lines = _meta_lines(meta) + [header]
    lines += [f"{xv!r},{yv!r}" for xv, yv in zip(map(float, x), map(float, y))]
    _write_lines(path, lines)


def write_spectral_csv(path, xi: np.ndarray, values: np.ndarray, meta: Dict) -> None:
    lines = _meta_lines(meta) + ["xi,re,im"]
    lines += [f"{float(x)!r},{v.real!r},{v.imag!r}" for x, v in zip(xi, values)]
    _write_lines(path, lines)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def _scalar_repr(v: Union[float, Fraction]):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def cantor_payload(mu, level: int, intervals, total_length, hausdorff_dim: float) -> Dict:
    """JSON payload for a fractal-support construction level; exact rational
    endpoints are encoded as 'p/q' strings."""
    return {
        "mu": _scalar_repr(mu),
        "level": level,
        "intervals": [[_scalar_repr(a), _scalar_repr(b)] for a, b in intervals],
        "total_length": _scalar_repr(total_length),
        "hausdorff_dim": hausdorff_dim,
    }


def _data_lines(path) -> List[str]:
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise DomainError(f"{path}: no data rows")
    return body


def read_samples_csv(path) -> SampleSet:
    body = _data_lines(path)
    if body[0].strip() != "x":
        raise DomainError(f"{path}: expected sample CSV with header 'x'")
    return SampleSet(np.array([float(v) for v in body[1:]]))


def read_density_csv(path) -> Tuple[np.ndarray, np.ndarray]:
    body = _data_lines(path)
    if body[0].strip() != "x,rho":
        raise DomainError(f"{path}: expected density CSV with header 'x,rho'")
    rows = [ln.split(",") for ln in body[1:]]
    x = np.array([float(r[0]) for r in rows])
    rho = np.array([float(r[1]) for r in rows])
    return x, rho


def read_table(path) -> Union[SampleSet, Tuple[np.ndarray, np.ndarray]]:
    """Read either schema, deciding by header row."""
    body = _data_lines(path)
    header = body[0].strip()
    if header == "x":
        return read_samples_csv(path)
    if header == "x,rho":
        return read_density_csv(path)
    raise DomainError(f"{path}: unrecognized header {header!r}")
