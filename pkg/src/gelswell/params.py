"""Model constants and their JSON form."""
from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

# JSON key -> attribute name
_JSON_KEYS = {
    "N1": "n1",
    "N2": "n2",
    "q": "q",
    "s": "s",
    "r": "r",
    "alpha0": "alpha0",
    "beta0": "beta0",
    "beta1": "beta1",
    "phiI": "phi_i",
    "chi0": "chi0",
    "chi1": "chi1",
    "chi2": "chi2",
    "betaDrag": "beta_drag",
    "kT": "kt",
    "phiClampMin": "phi_clamp_min",
}
_OPTIONAL = {"beta0", "betaDrag", "kT", "phiClampMin"}


@dataclass(frozen=True)
class ParameterSet:
    """Nondimensional constants of the gel model.

    ``beta0`` and ``beta_drag`` have no tabulated value and default to 1.
    ``kt`` is the thermal scale K_B T / V_m.
    """

    n1: float
    n2: float
    q: float
    s: float
    r: float
    alpha0: float
    beta1: float
    phi_i: float
    chi0: float
    chi1: float
    chi2: float
    beta0: float = 1.0
    beta_drag: float = 1.0
    kt: float = 1.0
    phi_clamp_min: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{f.name} must be a number, got {value!r}", field=f.name)
            object.__setattr__(self, f.name, float(value))
        checks = [
            (self.n1 >= 1, "N1", "N1 >= 1"),
            (self.n2 >= 1, "N2", "N2 >= 1"),
            (self.alpha0 > 0, "alpha0", "alpha0 > 0"),
            (self.beta0 > 0, "beta0", "beta0 > 0"),
            (self.beta1 > 0, "beta1", "beta1 > 0"),
            (self.r >= 1, "r", "r >= 1"),
            (self.s > 0, "s", "s > 0"),
            (self.q > 1 or self.q == self.n1, "q", "q > 1 or q == N1"),
            (0 < self.phi_i < 1, "phiI", "0 < phiI < 1"),
            (self.beta_drag >= 0, "betaDrag", "betaDrag >= 0"),
            (self.kt > 0, "kT", "kT > 0"),
            (0 < self.phi_clamp_min < 0.01, "phiClampMin", "0 < phiClampMin < 0.01"),
        ]
        for ok, key, rule in checks:
            if not ok:
                raise ConfigError(f"invalid parameter {key}: requires {rule}", field=key)

    @property
    def polysaccharide_regime(self) -> bool:
        """True when the I1 exponent s lies in (0, 1]."""
        return self.s <= 1.0

    def with_(self, **changes) -> "ParameterSet":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for key, attr in _JSON_KEYS.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSet":
        if not isinstance(data, dict):
            raise ConfigError("parameter document must be a JSON object")
        unknown = sorted(set(data) - set(_JSON_KEYS))
        if unknown:
            raise ConfigError(f"unknown parameter field(s): {', '.join(unknown)}", field=unknown[0])
        missing = [k for k in _JSON_KEYS if k not in data and k not in _OPTIONAL]
        if missing:
            raise ConfigError(f"missing parameter field(s): {', '.join(missing)}", field=missing[0])
        return cls(**{_JSON_KEYS[k]: v for k, v in data.items()})

    @classmethod
    def from_json(cls, path) -> "ParameterSet":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc.msg}", line=exc.lineno) from exc
        return cls.from_dict(data)

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


# Table rows.  kT for the polysaccharide row is not tabulated; 0.02 is the
# value at which G' has the two interior zeros shown for that data.
POLYMER = ParameterSet(
    n1=1000, n2=1, q=1000, s=6, r=1.25, alpha0=0.001, beta1=20, phi_i=0.05,
    chi0=0.467, chi1=0.593, chi2=-0.42, beta0=1.0, beta_drag=1.0, kt=1.0,
)
POLYSACCHARIDE = ParameterSet(
    n1=1000, n2=1, q=2, s=0.6, r=1.25, alpha0=0.001, beta1=0.002, phi_i=0.05,
    chi0=0.446, chi1=0.106, chi2=-0.02, beta0=1.0, beta_drag=1.0, kt=0.02,
)
PRESETS = {"polymer": POLYMER, "polysaccharide": POLYSACCHARIDE}


def load_params(spec) -> ParameterSet:
    """Load a ParameterSet from a preset name or a JSON path."""
    if isinstance(spec, ParameterSet):
        return spec
    if str(spec) in PRESETS:
        return PRESETS[str(spec)]
    return ParameterSet.from_json(spec)
