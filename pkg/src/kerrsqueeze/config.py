"""Strict JSON experiment configuration.

Unknown keys are rejected with their dotted path; values are type-checked.
Complex parameters are written as a plain number (real) or a two-element
[re, im] list.
"""

from __future__ import annotations

import json

from .errors import ConfigError
from .fockcore import QuantumState, make_state
from .hamiltonian import DriveParams, JcParams, OscillatorParams

__all__ = ["load_config", "validate_config", "parse_complex",
           "oscillator_from_config", "drive_from_config", "jc_from_config",
           "state_from_config", "SUPPORTED_SCHEMA_VERSIONS"]

SUPPORTED_SCHEMA_VERSIONS = (1,)

_NUM = (int, float)


def parse_complex(value, path: str) -> complex:
    if isinstance(value, _NUM):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, _NUM) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"{path}: expected number or [re, im], got {value!r}")


_STATE_SCHEMA = {"kind": str, "n": _NUM, "beta": "complex", "xi": "complex"}

_SCHEMA = {
    "schema_version": int,
    "seed": int,
    "oscillator": {
        "kerr_mhz": _NUM, "kerr2_mhz": _NUM, "kerr3_mhz": _NUM,
        "kappa_mhz": _NUM,
    },
    "drive": {"detuning_mhz": _NUM, "amplitude_mhz": _NUM, "phase_rad": _NUM},
    "evolution": {
        "dim": int, "t_total_us": _NUM, "sample_dt_us": _NUM,
        "initial_state": _STATE_SCHEMA,
        "observables": list,
    },
    "protocol": {
        "name": str, "dim": int, "beta": "complex", "cycles": int,
        "cycle_period_us": _NUM, "rotation": str, "lindblad": bool,
        "refine_ends": bool, "dt_max_us": _NUM,
        "initial_state": _STATE_SCHEMA,
        "snapshot_wigner": {"every": int, "n": int, "n_sigma": _NUM},
        "fit": {"method": str, "n_fock_hint": int},
    },
    "trotter": {
        "beta": "complex", "delta_t_us": _NUM, "steps": int, "order": int,
        "detuning_mhz": _NUM, "displacement_duration_us": _NUM, "dim": int,
    },
    "sweep": {
        "kind": str,
        "delta_grid_mhz": list, "omega_grid_mhz": list,
        "ratio_grid": list, "dt_grid_us": list, "beta_sq_grid": list,
        "beta": "complex", "cycles": int, "dim": int,
        "period_us": _NUM, "dt_max_us": _NUM,
        "total_time_us": _NUM, "detuning_mhz": _NUM,
        "displacement_duration_us": _NUM,
        "delta_t_us": _NUM, "steps": int, "cavity_dim": int,
        "jc": {
            "cavity_freq_mhz": _NUM, "qubit_freq_mhz": _NUM,
            "anharmonicity_mhz": _NUM, "coupling_mhz": _NUM,
            "qubit_levels": int,
        },
    },
    "reconstruct": {
        "input_csv": str, "dim": int, "iters": int, "tol": _NUM,
        "noise_sigma": _NUM, "reference": _STATE_SCHEMA,
    },
    "output": {"directory": str, "formats": list},
}


def _check_node(node, schema, path: str) -> None:
    if not isinstance(node, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    for key, value in node.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown key {where!r}")
        expected = schema[key]
        if isinstance(expected, dict):
            _check_node(value, expected, where)
        elif expected == "complex":
            parse_complex(value, where)
        elif expected is int:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{where}: expected integer, got {value!r}")
        elif expected is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"{where}: expected boolean, got {value!r}")
        elif expected is str:
            if not isinstance(value, str):
                raise ConfigError(f"{where}: expected string, got {value!r}")
        elif expected is list:
            if not isinstance(value, list):
                raise ConfigError(f"{where}: expected list, got {value!r}")
        else:
            if isinstance(value, bool) or not isinstance(value, expected):
                raise ConfigError(f"{where}: expected number, got {value!r}")


def validate_config(cfg: dict) -> dict:
    _check_node(cfg, _SCHEMA, "")
    version = cfg.get("schema_version")
    if version is None:
        raise ConfigError("missing schema_version")
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise ConfigError(
            f"schema_version {version} unsupported "
            f"(supported: {SUPPORTED_SCHEMA_VERSIONS})")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(raw)


def oscillator_from_config(block: dict) -> OscillatorParams:
    if "kerr_mhz" not in block:
        raise ConfigError("oscillator.kerr_mhz is required")
    return OscillatorParams(kerr=float(block["kerr_mhz"]),
                            kerr2=float(block.get("kerr2_mhz", 0.0)),
                            kerr3=float(block.get("kerr3_mhz", 0.0)),
                            kappa=float(block.get("kappa_mhz", 0.0)))


def drive_from_config(block: dict) -> DriveParams:
    return DriveParams(detuning=float(block.get("detuning_mhz", 0.0)),
                       amplitude=float(block.get("amplitude_mhz", 0.0)),
                       phase=float(block.get("phase_rad", 0.0)))


def jc_from_config(block: dict) -> JcParams:
    for key in ("cavity_freq_mhz", "qubit_freq_mhz", "anharmonicity_mhz",
                "coupling_mhz"):
        if key not in block:
            raise ConfigError(f"sweep.jc.{key} is required")
    return JcParams(cavity_freq=float(block["cavity_freq_mhz"]),
                    qubit_freq=float(block["qubit_freq_mhz"]),
                    anharmonicity=float(block["anharmonicity_mhz"]),
                    coupling=float(block["coupling_mhz"]),
                    qubit_levels=int(block.get("qubit_levels", 2)))


def state_from_config(block: dict, dim: int, path: str = "initial_state"
                      ) -> QuantumState:
    kind = block.get("kind", "vacuum")
    kwargs = {}
    if "n" in block:
        kwargs["n"] = int(block["n"])
    if "beta" in block:
        kwargs["beta"] = parse_complex(block["beta"], f"{path}.beta")
    if "xi" in block:
        kwargs["xi"] = parse_complex(block["xi"], f"{path}.xi")
    return make_state(kind, dim, **kwargs)
