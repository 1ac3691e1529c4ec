"""Experiment configuration: flat TOML files plus command-line overrides.

Every key is a top-level ``name = value`` pair; tables are not allowed and
unknown keys are rejected, so a misspelt physics parameter never silently
falls back to its default.  Example::

    # convergence.toml
    order = 3
    chi = [0.1, 0.2, 0.3]
    rounds = [10, 20, 40, 80]
    ratio = 1.0
    dim = 80
    out = "runs/convergence"
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError
from .synthesis import CORRECTIONS, VARIANTS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCENARIOS = ("convergence", "wigner_cuts", "region_map", "quartic_study", "verify")

# field -> (kind, description)
SCHEMA: dict[str, tuple[str, str]] = {
    "order": ("int", "gate order, 3 (cubic) or 4 (quartic)"),
    "chi": ("float_list", "target strengths"),
    "rounds": ("int_list", "repetition counts R"),
    "alpha": ("float_list", "real coherent amplitudes of the input states (0 = vacuum)"),
    "ratio": ("float", "pulse split |t2/t1|"),
    "variant": ("str", "round construction: " + ", ".join(VARIANTS)),
    "k": ("int", "blocks per ancilla preparation for the k_block variant"),
    "correction": ("str", "correction placement: " + ", ".join(CORRECTIONS)),
    "zeta": ("float", "quartic squeezing-correction weight when not optimised"),
    "optimize_zeta": ("bool", "golden-section search for the quartic zeta"),
    "dim": ("int", "Fock cutoff"),
    "guard": ("int", "guard-band width for the leakage monitor"),
    "leak_tol": ("float", "maximum trusted guard-band population"),
    "cut_x": ("float", "x coordinate of the Wigner cross section"),
    "p_min": ("float", "lower end of the Wigner p axis"),
    "p_max": ("float", "upper end of the Wigner p axis"),
    "n_p": ("int", "points on the Wigner p axis"),
    "f_threshold": ("float", "fidelity threshold for region maps"),
    "fperp_threshold": ("float", "fidelity-of-change threshold for region maps"),
    "ground_is_plus_z": ("bool", "ancilla ground state is the +1 eigenvector of sigma_z"),
    "allow_strong": ("bool", "permit pulse strengths above 0.5"),
    "out": ("str", "output directory"),
    "seed": ("int", "seed for randomised invariant checks"),
    "trials": ("int", "randomised draws per invariant in verify"),
    "manifest": ("str", "stored manifest to cross-check the qubit convention against (verify)"),
}

_SCENARIO_DEFAULTS: dict[str, dict[str, Any]] = {
    "convergence": {"chi": [0.1, 0.2, 0.3], "rounds": list(range(5, 81, 5)), "alpha": [0.0], "dim": 80},
    "wigner_cuts": {"chi": [0.2, 0.4, 0.6, 0.8], "rounds": [18, 36, 54, 72], "alpha": [0.0], "dim": 120},
    "region_map": {
        "alpha": [float(a) for a in np.round(np.linspace(0.0, 2.0, 21), 12)],
        "chi": [float(c) for c in np.round(np.linspace(0.8 / 21, 0.8, 21), 12)],
        "rounds": [25, 50, 100],
        "dim": 80,
    },
    "quartic_study": {"order": 4, "chi": [0.2, 0.4], "rounds": [40, 80], "alpha": [0.0], "dim": 120},
    "verify": {"chi": [0.2], "rounds": [18], "alpha": [0.0, 1.0], "dim": 40},
}

_QUARTIC_CUT_DEFAULTS = {"chi": [0.2, 0.4], "rounds": [40, 80]}


@dataclass
class ExperimentConfig:
    scenario: str
    order: int = 3
    chi: list[float] = field(default_factory=list)
    rounds: list[int] = field(default_factory=list)
    alpha: list[float] = field(default_factory=list)
    ratio: float = 1.0
    variant: str = "five_query"
    k: int = 2
    correction: str = "per_round"
    zeta: float = 1.0
    optimize_zeta: bool = True
    dim: int = 80
    guard: int = 8
    leak_tol: float = 1e-6
    cut_x: float | None = None
    p_min: float = -5.0
    p_max: float = 5.0
    n_p: int = 201
    f_threshold: float = 0.99
    fperp_threshold: float = 0.95
    ground_is_plus_z: bool = True
    allow_strong: bool = False
    out: str = "runs"
    seed: int = 0
    trials: int = 100
    manifest: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if self.order not in (3, 4):
            raise ConfigError(f"order must be 3 or 4, got {self.order}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.correction not in CORRECTIONS:
            raise ConfigError(f"unknown correction placement {self.correction!r}")
        for name in ("chi", "rounds", "alpha"):
            if not getattr(self, name):
                raise ConfigError(f"{name} list must not be empty")
        if any(r < 1 for r in self.rounds):
            raise ConfigError("rounds must all be >= 1")
        if any(c == 0 for c in self.chi):
            raise ConfigError("chi values must be non-zero")
        if self.ratio == 0:
            raise ConfigError("ratio must be non-zero")
        if self.scenario == "wigner_cuts" and len(self.chi) != len(self.rounds):
            raise ConfigError("wigner_cuts pairs chi and rounds element-wise; the lists must have equal length")
        if self.scenario == "quartic_study" and self.order != 4:
            raise ConfigError("quartic_study requires order = 4")
        if not 0 <= self.guard < self.dim:
            raise ConfigError(f"guard must satisfy 0 <= guard < dim (guard={self.guard}, dim={self.dim})")
        if self.leak_tol <= 0:
            raise ConfigError("leak_tol must be positive")
        if self.n_p < 2 or self.p_max <= self.p_min:
            raise ConfigError("Wigner p axis needs p_max > p_min and n_p >= 2")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        return self

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _coerce(name: str, value: Any) -> Any:
    kind = SCHEMA[name][0]
    bad = ConfigError(f"{name}: expected {kind.replace('_', ' ')}, got {value!r}")
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise bad
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise bad
        return value
    if kind in ("float_list", "int_list"):
        if not isinstance(value, list):
            value = [value]
        elem = "int" if kind == "int_list" else "float"
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or (elem == "int" and not isinstance(v, int)):
                raise bad
            out.append(int(v) if elem == "int" else float(v))
        return out
    raise AssertionError(kind)


def parse_list(text: str, kind: str) -> list:
    """Parse ``"0.1,0.2"`` style command-line lists."""
    conv = int if kind == "int_list" else float
    try:
        return [conv(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}: {exc}") from None


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return data


def build_config(scenario: str, values: dict[str, Any] | None = None) -> ExperimentConfig:
    """Scenario defaults, then ``values`` (file contents and overrides), validated."""
    values = dict(values or {})
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    unknown = sorted(set(values) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    merged: dict[str, Any] = dict(_SCENARIO_DEFAULTS[scenario])
    if scenario == "wigner_cuts" and values.get("order") == 4:
        merged.update(_QUARTIC_CUT_DEFAULTS)
    for name, value in values.items():
        merged[name] = _coerce(name, value)
    if "guard" not in values and merged.get("dim", 80) <= 2 * 8:
        # keep the default guard band usable for deliberately tiny cutoffs
        merged["guard"] = max(1, merged["dim"] // 4)
    if merged.get("cut_x") is None:
        merged["cut_x"] = 1.0 if merged.get("order", 3) == 4 else 0.0
    return ExperimentConfig(scenario=scenario, **merged).validate()
