"""
Utility functions for the CSATN uplink analysis toolkit
Includes logging, unit conversion, hashing, grid parsing, and file helpers
"""

import contextlib
import datetime
import hashlib
import json
import math
import os
import re
import sys
from typing import Any, Iterator, List

import numpy as np

from . import config
from .errors import DomainError, OutputPathError

# ============================ TIMESTAMP & LOGGING UTILITIES ============================

def now_ts() -> str:
    """Timestamp prefix shared by every artifact of one CLI run"""
    return datetime.datetime.now().strftime("%Y%m%d_%H%M%S")

def run_log_name(ts: str, command: str, config_hash: str) -> str:
    """<ts>_<command>_<hash8>_run.log, so a log can be matched to the CSV rows of its scenario"""
    return f"{ts}_{command}_{config_hash[:8]}_run.log"

class Tee:
    """Console stream mirrored into the run log"""
    def __init__(self, stream, log_file):
        self.stream = stream
        self.log_file = log_file

    def write(self, data):
        self.stream.write(data)
        if not self.log_file.closed:
            self.log_file.write(data)
        return len(data)

    def flush(self):
        self.stream.flush()
        if not self.log_file.closed:
            self.log_file.flush()

@contextlib.contextmanager
def tee_logging(save_dir: str, ts: str, command: str, config_hash: str) -> Iterator[str]:
    """Mirror stdout/stderr into the run log for the duration of a CLI command"""
    ensure_directory(save_dir)
    log_path = os.path.join(save_dir, run_log_name(ts, command, config_hash))
    out, err = sys.stdout, sys.stderr
    with open(log_path, "a", encoding="utf-8") as log_file:
        sys.stdout, sys.stderr = Tee(out, log_file), Tee(err, log_file)
        try:
            print(f"[log] tee to: {log_path}")
            print(f"[log] config_hash={config_hash}")
            yield log_path
        finally:
            sys.stdout, sys.stderr = out, err

# ============================ UNIT CONVERSION UTILITIES ============================

def db_to_linear(x_db: float) -> float:
    """dB (or dBW) to linear ratio (or watts)"""
    return 10.0 ** (x_db / 10.0)

def linear_to_db(x: Any) -> Any:
    """Linear ratio to dB; +inf for +inf, -inf for 0"""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)

_QUANTITY_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")

# unit -> converter to SI / linear
_UNIT_CONVERTERS = {
    "": lambda v: v,
    "m": lambda v: v,
    "km": lambda v: v * 1e3,
    "w": lambda v: v,
    "db": db_to_linear,
    "dbw": db_to_linear,
    "dbi": db_to_linear,
    "dbm": lambda v: db_to_linear(v) * 1e-3,
    "rad": lambda v: v,
    "deg": math.radians,
}

def parse_quantity(value: Any) -> Any:
    """Convert '9.5 km', '20 dBW', '-10 dB', '30 deg' to SI/linear floats; other values pass through"""
    if not isinstance(value, str):
        return value
    m = _QUANTITY_RE.match(value)
    if not m:
        raise DomainError(f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2).lower()
    if unit not in _UNIT_CONVERTERS:
        raise DomainError(f"unknown unit {m.group(2)!r} in {value!r}")
    return _UNIT_CONVERTERS[unit](number)

# ============================ HASHING & GRID UTILITIES ============================

def stable_hash(payload: Any, length: int = 12) -> str:
    """Short SHA-256 fingerprint of a JSON-serializable payload"""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:length]

def parse_grid(spec: str) -> List[float]:
    """Parse 'start:stop:step' (stop inclusive) or a comma list into floats"""
    spec = (spec or "").strip()
    if not spec:
        raise DomainError("empty grid specification")
    if ":" in spec:
        parts = [float(p) for p in spec.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise DomainError(f"grid must be start:stop:step, got {spec!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise DomainError(f"grid {spec!r} is empty")
        return [round(start + i * step, 10) for i in range(n)]
    return [float(p) for p in spec.split(",") if p.strip()]

# ============================ FILE SYSTEM UTILITIES ============================

def ensure_directory(path: str) -> bool:
    """Ensure directory exists, create if needed"""
    if not path:
        return True
    try:
        os.makedirs(path, exist_ok=True)
        return True
    except OSError as e:
        raise OutputPathError(f"cannot create directory {path}: {e}") from e

def ensure_parent(path: str) -> str:
    """Ensure the parent directory of a file path exists and return the path"""
    ensure_directory(os.path.dirname(os.path.abspath(path)))
    return path

def clamp_probability(value: float, slack: float, label: str = "value") -> float:
    """Clamp to [0, 1]; excursions beyond slack are reported"""
    if value < -slack or value > 1.0 + slack:
        if config.VERBOSE:
            print(f"[clamp] {label}={value!r} left [0, 1] by more than {slack:g}")
    return float(min(1.0, max(0.0, value)))
