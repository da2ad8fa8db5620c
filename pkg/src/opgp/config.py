"""Experiment configuration: TOML or JSON, validated against a JSON schema."""
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
from scipy.interpolate import CubicSpline

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .functionals import DEFAULT_QUAD_ORDER, LinearFunctional, apply, fourier_functionals
from .kernels import FAMILIES, Kernel, MeanFunction

_NUM = {"type": "number"}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_VALUE = {"oneOf": [{"const": "from_true"}, _NUM, {"type": "array", "items": _NUM}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kernel", "batches"],
    "properties": {
        "seed": {"type": "integer"},
        "domain": _PAIR,
        "kernel": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family", "lengthscale"],
            "properties": {
                "family": {"enum": sorted(FAMILIES)},
                "lengthscale": {"type": "number", "exclusiveMinimum": 0},
                "variance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "mean": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["zero", "constant", "tabulated"]},
                "value": _NUM,
                "grid": {"type": "array", "items": _NUM},
                "values": {"type": "array", "items": _NUM},
            },
        },
        "true_function": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["named", "tabulated"]},
                "name": {"type": "string"},
                "grid": {"type": "array", "items": _NUM},
                "values": {"type": "array", "items": _NUM},
            },
        },
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"n": {"type": "integer", "minimum": 2}}},
        "oracle": {"type": "object", "additionalProperties": False,
                   "properties": {"n": {"type": "integer", "minimum": 2}}},
        "quadrature": {"type": "object", "additionalProperties": False,
                       "properties": {"order": {"type": "integer", "minimum": 1}}},
        "spectrum": {"type": "object", "additionalProperties": False,
                     "properties": {"n": {"type": "integer", "minimum": 16}}},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "batches": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string"},
                    "observations": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["kind"],
                            "properties": {
                                "kind": {"enum": ["point", "deriv", "integral", "fourier"]},
                                "site": _NUM,
                                "weight": {"type": "string"},
                                "support": _PAIR,
                                "count": {"type": "integer", "minimum": 1},
                                "label": {"type": "string"},
                                "noise": {"type": "number", "minimum": 0},
                                "value": _VALUE,
                            },
                        },
                    },
                },
            },
        },
    },
}


class AnalyticFunction:
    def __init__(self, f, df):
        self._f, self._df = f, df

    def __call__(self, x):
        return self._f(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self._df(np.asarray(x, dtype=float))


class SplineFunction:
    def __init__(self, grid, values):
        self._spline = CubicSpline(np.asarray(grid, float), np.asarray(values, float))

    def __call__(self, x):
        return self._spline(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self._spline(np.asarray(x, dtype=float), 1)


TRUE_FUNCTIONS = {
    "demo": AnalyticFunction(
        lambda x: np.sin(3 * x) + 0.5 * np.cos(5 * x + 1) + 0.3 * x,
        lambda x: 3 * np.cos(3 * x) - 2.5 * np.sin(5 * x + 1) + 0.3,
    ),
    "zero": AnalyticFunction(np.zeros_like, np.zeros_like),
    "sin_pi": AnalyticFunction(lambda x: np.sin(np.pi * x),
                               lambda x: np.pi * np.cos(np.pi * x)),
}


@dataclass
class Batch:
    label: str
    functionals: tuple
    values: np.ndarray


@dataclass
class ExperimentConfig:
    domain: tuple
    kernel: Kernel
    mean: MeanFunction
    true_function: object
    batches: list
    output_n: int = 401
    oracle_n: int = 4001
    quad_order: int = DEFAULT_QUAD_ORDER
    spectrum_n: int = 256
    tolerance: float = 1e-8
    seed: int = 0
    source: str = ""

    @property
    def functionals(self):
        return tuple(f for b in self.batches for f in b.functionals)

    @property
    def values(self):
        if not self.batches:
            return np.zeros(0)
        return np.concatenate([b.values for b in self.batches])

    def output_grid(self):
        return np.linspace(self.domain[0], self.domain[1], self.output_n)


def read_config_data(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def load_config(path, quad_order=None, oracle_n=None, tolerance=None):
    """Read, validate and materialize a config file.

    Keyword overrides take precedence over values in the file.
    """
    data = read_config_data(path)
    cfg = build_config(data, quad_order=quad_order, oracle_n=oracle_n, tolerance=tolerance)
    cfg.source = str(path)
    return cfg


def build_config(data, quad_order=None, oracle_n=None, tolerance=None):
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc

    domain = tuple(float(v) for v in data.get("domain", (-1.0, 1.0)))
    if not domain[1] > domain[0]:
        raise ConfigError("domain must satisfy a < b")
    kd = data["kernel"]
    kernel = Kernel(kd["family"], float(kd["lengthscale"]), float(kd.get("variance", 1.0)))
    mean = _build_mean(data.get("mean", {"kind": "zero"}))
    truth = _build_truth(data.get("true_function", {"kind": "named", "name": "demo"}))
    order = quad_order or data.get("quadrature", {}).get("order", DEFAULT_QUAD_ORDER)

    batches = []
    for t, bd in enumerate(data["batches"], 1):
        fs, vals = [], []
        for obs in bd.get("observations", []):
            new = _build_functionals(obs, domain, order)
            fs.extend(new)
            vals.extend(_observation_values(obs, new, truth))
        batches.append(Batch(bd.get("label", f"batch{t}"), tuple(fs), np.array(vals, dtype=float)))

    return ExperimentConfig(
        domain=domain,
        kernel=kernel,
        mean=mean,
        true_function=truth,
        batches=batches,
        output_n=data.get("output", {}).get("n", 401),
        oracle_n=oracle_n or data.get("oracle", {}).get("n", 4001),
        quad_order=order,
        spectrum_n=data.get("spectrum", {}).get("n", 256),
        tolerance=tolerance or data.get("tolerance", 1e-8),
        seed=data.get("seed", 0),
    )


def _build_mean(md):
    kind = md.get("kind", "zero")
    try:
        if kind == "constant":
            return MeanFunction.constant(md.get("value", 0.0))
        if kind == "tabulated":
            return MeanFunction.tabulated(md.get("grid", ()), md.get("values", ()))
        return MeanFunction.zero()
    except ValueError as exc:
        raise ConfigError(f"mean: {exc}") from exc


def _build_truth(td):
    if td.get("kind", "named") == "tabulated":
        try:
            return SplineFunction(td["grid"], td["values"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"true_function: {exc}") from exc
    name = td.get("name", "demo")
    if name not in TRUE_FUNCTIONS:
        raise ConfigError(f"unknown true function {name!r}; known: {sorted(TRUE_FUNCTIONS)}")
    return TRUE_FUNCTIONS[name]


def _build_functionals(obs, domain, order):
    kind = obs["kind"]
    noise = float(obs.get("noise", 0.0))
    try:
        if kind in ("point", "deriv"):
            if "site" not in obs:
                raise ConfigError(f"{kind} observation needs a site")
            f = LinearFunctional(kind, site=obs["site"], label=obs.get("label", ""), noise=noise)
            fs = [f]
        elif kind == "integral":
            fs = [LinearFunctional.integral(obs.get("weight", "one"),
                                            tuple(obs.get("support", domain)),
                                            label=obs.get("label", ""), quad_order=order,
                                            noise=noise)]
        else:
            fs = fourier_functionals(obs.get("count", 2), tuple(obs.get("support", domain)),
                                     quad_order=order)
            if noise:
                fs = [LinearFunctional.integral(f.weight, f.support, label=f.label,
                                                quad_order=order, noise=noise) for f in fs]
    except ValueError as exc:
        raise ConfigError(f"observation {obs}: {exc}") from exc
    for f in fs:
        if not f.in_domain(domain):
            raise ConfigError(f"observation {f.label} lies outside the domain {domain}")
    return fs


def _observation_values(obs, fs, truth):
    value = obs.get("value", "from_true")
    if value == "from_true":
        return [apply(f, truth) for f in fs]
    vals = np.atleast_1d(np.asarray(value, dtype=float))
    if vals.size != len(fs):
        raise ConfigError(f"observation {obs.get('kind')} expects {len(fs)} values, got {vals.size}")
    return list(vals)
