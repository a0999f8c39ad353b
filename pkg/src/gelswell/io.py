"""Byte-stable CSV/JSON writers and the run manifest."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ConfigError


def fmt(x) -> str:
    """Shortest round-trip decimal for floats, plain str otherwise."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, int)) and not isinstance(x, float):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")
    return path


def load_json(path) -> dict:
    """Parse a JSON file; syntax errors become ConfigError with a line number."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object", line=1)
    return data


def sha256_inputs(items) -> str:
    """Hash of input documents given as paths or raw bytes, in order."""
    h = hashlib.sha256()
    for item in items:
        data = item if isinstance(item, bytes) else Path(item).read_bytes()
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    param_id: str
    out_dir: str
    version: str
    input_sha256: str
    status: str = "ok"
    termination: str | None = None
    detail: str | None = None
    outputs: tuple = ()

    def write(self, out_dir) -> Path:
        data = asdict(self)
        data["outputs"] = list(self.outputs)
        return write_json(Path(out_dir) / "manifest.json", data)


# column layouts


def snapshot_rows(record):
    for s in record.snapshots:
        for y, psi, u in zip(s.y, s.psi, s.u):
            yield s.t, y, psi, u


def diagnostic_rows(record):
    d = record.diagnostics
    yield from zip(d.t, d.mass, d.energy, d.sup_eta, d.sup_u, d.sup_eta_x, d.sup_u_x)


def interface_rows(record):
    tr = record.interfaces
    yield from zip(tr.times, tr.s1, tr.s2, tr.length)


SNAPSHOT_HEADER = ("t", "y", "psi", "u")
DIAGNOSTIC_HEADER = ("t", "mass", "energy", "sup_eta", "sup_u", "sup_eta_x", "sup_u_x")
INTERFACE_HEADER = ("t", "S1", "S2", "domain_length_check")
CURVES_HEADER = ("phi", "G", "dG")
MAP_HEADER = ("phi", "u", "hyp_margin", "nc_margin", "ukl_gamma")
LIFETIME_HEADER = ("eps", "T_exit", "reason")
TRACE_HEADER = ("tau", "xi", "family")
