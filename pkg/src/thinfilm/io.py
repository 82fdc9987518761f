"""Snapshots, CSV output and INI configuration files.

Snapshot layout (little-endian)::

    b"LLGF" | uint32 version | uint32 n1 | uint32 n2 | f64 delta | f64 eps | f64 t
    | n1*n2*3 f64 values, row-major (x2 fastest), components (m1, m2, m3)
"""
import configparser
import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAGIC = b"LLGF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


@dataclass(frozen=True)
class Snapshot:
    m: np.ndarray
    delta: float
    eps: float
    t: float
    version: int = VERSION


def save_snapshot(path, m, delta, eps, t):
    m = np.asarray(m, dtype="<f8")
    if m.ndim != 3 or m.shape[2] != 3:
        raise ValidationError(f"save_snapshot: expected (n1, n2, 3) values, got {m.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1], float(delta), float(eps), float(t)))
        fh.write(np.ascontiguousarray(m).tobytes())


def load_snapshot(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated snapshot header")
    magic, version, n1, n2, delta, eps, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValidationError(f"{path}: unsupported snapshot version {version}")
    payload = raw[_HEADER.size:]
    if len(payload) != n1 * n2 * 3 * 8:
        raise ValidationError(f"{path}: payload of {len(payload)} bytes does not match {n1}x{n2}x3 float64")
    m = np.frombuffer(payload, dtype="<f8").reshape(n1, n2, 3).astype(float)
    return Snapshot(m, delta, eps, t, version)


def sidecar_path(path):
    return str(path) + ".json"


def save_sidecar(path, **state):
    with open(sidecar_path(path), "w") as fh:
        json.dump({k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in state.items()},
                  fh, indent=2, sort_keys=True)


def load_sidecar(path):
    p = sidecar_path(path)
    if not os.path.exists(p):
        return {}
    with open(p) as fh:
        return json.load(fh)


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows):
    """Comma-separated values with floats written to 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def read_csv(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


# ---------------------------------------------------------------------------
# configuration

def _encode(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_encode(x) for x in v)
    return "" if v is None else str(v)


def write_config(path, section, values):
    """Write one ``[section]`` of ``key = value`` pairs; floats use ``repr``."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp[section] = {k: _encode(v) for k, v in values.items()}
    with open(path, "w") as fh:
        cp.write(fh)


def read_config(path, section):
    """Raw string values of ``[section]`` (empty dict when absent)."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if not cp.read(path):
        raise ValidationError(f"config file {path!r} not found")
    if section not in cp:
        return {}
    return dict(cp[section])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")
