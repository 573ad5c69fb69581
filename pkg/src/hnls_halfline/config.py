"""JSON run configuration: PDE coefficients, regularity, numerics and data profiles."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .cauchy import SolverConfig
from .errors import ConfigError, ParameterError
from .spectral import PdeParams
from .transforms import GridFunction, GridKind

DEFAULT_CONFIG = {
    "params": {"alpha": 1.0, "beta": 1.0, "delta": 0.0, "kappa_re": 0.0, "kappa_im": 0.0, "p": 2.0},
    "sobolev": {"s": 1.0},
    "numerics": {
        "T": 1.0,
        "Tprime": None,
        "L": 30.0,
        "Nx": 256,
        "Nt": 256,
        "contour_density": 1.0,
        "truncation_M": None,
        "fft_padding": 4,
        "tolerances": {"fixed_point_tol": 1e-10, "quad_tol": 1e-6, "max_picard": 30, "extension_cutoff": 1.5},
    },
    "scenario": {
        "u0": {"profile": "gaussian", "amplitude": 1.0, "center": 10.0, "width": 1.5},
        "g": {"profile": "gaussian", "amplitude": 0.5, "center": 0.5, "width": 0.08},
    },
    "seed": 20240601,
}

_TOLERANCE_KEYS = {"fixed_point_tol", "quad_tol", "max_picard", "extension_cutoff"}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "scenario":
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _bump(s, lo, hi):
    s = np.asarray(s, dtype=float)
    z = (2 * s - (lo + hi)) / (hi - lo)
    out = np.zeros_like(s)
    inside = np.abs(z) < 1
    out[inside] = np.exp(1 - 1 / (1 - z[inside] ** 2))
    return out


def profile_function(spec: dict, base_dir: Path, initial: Callable | None = None) -> Callable:
    """Callable of the grid for a named profile or a CSV sample file.

    Profiles: ``gaussian`` (amplitude, center, width), ``bump`` (compact support
    ``center +- width``), ``mode`` (Gaussian envelope times ``exp(i frequency s)``) and,
    for boundary data, ``constant`` (``value``; defaults to the initial value at x = 0).
    CSV files hold columns ``coordinate, re[, im]`` and are linearly interpolated.
    """
    if not isinstance(spec, dict):
        raise ConfigError("data specifications must be JSON objects")
    if "csv" in spec:
        path = Path(spec["csv"])
        path = path if path.is_absolute() else base_dir / path
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read data file {path}: {exc}") from exc
        if data.shape[1] < 2:
            raise ConfigError(f"{path}: need at least two columns")
        im = data[:, 2] if data.shape[1] > 2 else np.zeros(data.shape[0])
        return lambda s: np.interp(s, data[:, 0], data[:, 1]) + 1j * np.interp(s, data[:, 0], im)
    kind = spec.get("profile")
    amp = complex(spec.get("amplitude", 1.0))
    center = float(spec.get("center", 0.0))
    width = float(spec.get("width", 1.0))
    if kind in ("gaussian", "mode", "bump") and width <= 0:
        raise ConfigError("profile width must be positive")
    if kind == "gaussian":
        return lambda s: amp * np.exp(-((np.asarray(s) - center) ** 2) / (2 * width**2)) + 0j
    if kind == "bump":
        return lambda s: amp * _bump(s, center - width, center + width) + 0j
    if kind == "mode":
        freq = float(spec.get("frequency", 1.0))
        return lambda s: amp * np.exp(1j * freq * np.asarray(s) - (np.asarray(s) - center) ** 2 / (2 * width**2))
    if kind == "constant":
        if "value" in spec:
            value = complex(spec["value"])
        elif initial is not None:
            value = complex(np.asarray(initial(np.array([0.0])))[0])
        else:
            raise ConfigError("constant profile needs a value")
        return lambda s: np.full(np.shape(s), value, dtype=complex)
    raise ConfigError(f"unknown profile {kind!r}")


@dataclass
class Scenario:
    u0: Callable
    g: Callable

    def sample(self, config: SolverConfig) -> tuple[GridFunction, GridFunction]:
        u0 = GridFunction(0.0, config.L, np.asarray(self.u0(config.x), dtype=complex))
        g = GridFunction(0.0, config.T, np.asarray(self.g(config.t), dtype=complex), GridKind.TEMPORAL)
        return u0, g


@dataclass
class RunConfig:
    params: PdeParams
    s: float
    solver: SolverConfig
    scenario: Scenario
    seed: int
    raw: dict


def build_run_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a (possibly partial) configuration dictionary merged over the defaults."""
    base_dir = Path(".") if base_dir is None else base_dir
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    cfg = _merge(DEFAULT_CONFIG, raw)
    pp = cfg["params"]
    try:
        beta = float(pp["beta"])
        if beta <= 0:
            raise ConfigError(
                f"beta = {beta} is not positive: the solver covers the regime with a single boundary "
                "condition at x = 0, which requires beta > 0"
            )
        params = PdeParams(
            float(pp["alpha"]),
            beta,
            float(pp["delta"]),
            complex(float(pp.get("kappa_re", 0.0)), float(pp.get("kappa_im", 0.0))),
            float(pp["p"]),
        )
        num = cfg["numerics"]
        tol = num.get("tolerances", {})
        bad = set(tol) - _TOLERANCE_KEYS
        if bad:
            raise ConfigError(f"unknown tolerance keys: {sorted(bad)}")
        solver = SolverConfig(
            T=float(num["T"]),
            Tprime=None if num.get("Tprime") is None else float(num["Tprime"]),
            L=float(num["L"]),
            Nx=int(num["Nx"]),
            Nt=int(num["Nt"]),
            contour_density=float(num["contour_density"]),
            truncation_M=None if num.get("truncation_M") is None else float(num["truncation_M"]),
            fixed_point_tol=float(tol.get("fixed_point_tol", 1e-10)),
            max_picard=int(tol.get("max_picard", 30)),
            quad_tol=float(tol.get("quad_tol", 1e-6)),
            extension_cutoff=None if tol.get("extension_cutoff") is None else float(tol["extension_cutoff"]),
            fft_padding=int(num.get("fft_padding", 4)),
        )
        s = float(cfg["sobolev"]["s"])
        seed = int(cfg["seed"])
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed configuration: {exc}") from exc
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    sc = cfg["scenario"]
    if "u0" not in sc or "g" not in sc:
        raise ConfigError("scenario needs both u0 and g")
    u0 = profile_function(sc["u0"], base_dir)
    g = profile_function(sc["g"], base_dir, initial=u0)
    return RunConfig(params, s, solver, Scenario(u0, g), seed, cfg)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return build_run_config({})
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    return build_run_config(raw, path.parent)
