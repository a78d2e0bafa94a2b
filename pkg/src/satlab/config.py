"""JSON experiment configuration.

A config is a flat JSON object with five blocks: model, instance, rule,
grid, and output, plus a schema version tag. Parsing expands geometric
generators into explicit grids and normalizes everything into frozen
dataclasses, so parse(serialize(parse(text))) == parse(text) holds
exactly. Constraint validation is delegated to the same constructors the
library uses, so a config cannot smuggle in a state the API would
reject.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .models import (
    ProblemInstance,
    SourcePrior,
    default_ground_truth,
    make_composition_model,
    make_diagonal_linear,
    synthesize_instance,
)
from .rules import SelectorConfig

__all__ = [
    "SCHEMA_VERSION",
    "ModelConfig",
    "InstanceConfig",
    "GridConfig",
    "OutputConfig",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "serialize_config",
    "build_instance",
]

SCHEMA_VERSION = 1

_RULE_NAMES = ("discrepancy", "sequential", "apriori")
_FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "linear"
    n: int = 200
    s: float = 2.0
    scale: float = 1.0
    beta: float = 0.1
    rho: float = 1.0


@dataclass(frozen=True)
class InstanceConfig:
    x_true: object = "default"  # "default" or a tuple of floats
    source_nu: Optional[float] = None
    source_norm: Optional[float] = None
    source_norm_key: str = "norm_u"
    source_profile: str = "flat"
    require_small_source: bool = False


@dataclass(frozen=True)
class GridConfig:
    deltas: tuple = ()
    alphas: Optional[tuple] = None
    k_range: tuple = (2, 8)
    n_random: int = 8
    seed: int = 0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = _FORMATS


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    rule_name: str = "discrepancy"
    rule: SelectorConfig = field(default_factory=SelectorConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def _require_mapping(value, name):
    if not isinstance(value, dict):
        raise ConfigError(f"config block {name!r} must be a JSON object")
    return value


def _check_keys(block, name, allowed):
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}")


def _expand_grid(value, name, descending=True):
    """A grid is either an explicit list or {num, lo, hi} (geometric)."""
    if isinstance(value, dict):
        _check_keys(value, name, ("num", "lo", "hi"))
        try:
            num = int(value["num"])
            lo = float(value["lo"])
            hi = float(value["hi"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name} generator needs numeric num, lo, hi") from exc
        if num < 2 or lo <= 0 or hi <= lo:
            raise ConfigError(f"{name} generator needs num >= 2 and 0 < lo < hi")
        points = np.geomspace(hi, lo, num)
        return tuple(float(p) for p in points)
    if isinstance(value, (list, tuple)):
        try:
            points = tuple(float(p) for p in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} entries must be numbers") from exc
        if not points:
            raise ConfigError(f"{name} must not be empty")
        if any(p <= 0 for p in points):
            raise ConfigError(f"{name} entries must be positive")
        if descending and any(b >= a for a, b in zip(points, points[1:])):
            raise ConfigError(f"{name} must be strictly decreasing")
        return points
    raise ConfigError(f"{name} must be a list or a {{num, lo, hi}} object")


def _parse_model(block) -> ModelConfig:
    block = _require_mapping(block, "model")
    _check_keys(block, "model", ("kind", "n", "s", "scale", "beta", "rho"))
    kind = block.get("kind", "linear")
    if kind not in ("linear", "composition"):
        raise ConfigError(f"model.kind must be 'linear' or 'composition', got {kind!r}")
    try:
        return ModelConfig(
            kind=kind,
            n=int(block.get("n", 200)),
            s=float(block.get("s", 2.0)),
            scale=float(block.get("scale", 1.0)),
            beta=float(block.get("beta", 0.1)),
            rho=float(block.get("rho", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model block: {exc}") from exc


def _parse_instance(block) -> InstanceConfig:
    block = _require_mapping(block, "instance")
    _check_keys(block, "instance", ("x_true", "source", "require_small_source"))
    x_true = block.get("x_true", "default")
    if x_true != "default":
        if not isinstance(x_true, (list, tuple)):
            raise ConfigError("instance.x_true must be 'default' or a list of numbers")
        try:
            x_true = tuple(float(v) for v in x_true)
        except (TypeError, ValueError) as exc:
            raise ConfigError("instance.x_true entries must be numbers") from exc

    nu = norm_value = None
    norm_key = "norm_u"
    profile = "flat"
    source = block.get("source")
    if source is not None:
        source = _require_mapping(source, "instance.source")
        _check_keys(source, "instance.source", ("nu", "norm_u", "norm_w", "profile"))
        if "nu" not in source:
            raise ConfigError("instance.source needs a nu")
        nu = float(source["nu"])
        has_u = "norm_u" in source
        has_w = "norm_w" in source
        if has_u == has_w:
            raise ConfigError("instance.source needs exactly one of norm_u, norm_w")
        norm_key = "norm_u" if has_u else "norm_w"
        norm_value = float(source[norm_key])
        if norm_value <= 0:
            raise ConfigError(f"instance.source.{norm_key} must be positive")
        if norm_key == "norm_u" and nu != 0.5:
            raise ConfigError("norm_u is for nu = 0.5 sources; use norm_w for nu >= 1")
        if norm_key == "norm_w" and nu == 0.5:
            raise ConfigError("norm_w is for nu >= 1 sources; use norm_u for nu = 0.5")
        profile = source.get("profile", "flat")
        _parse_profile(profile)  # fail early on an unknown shape

    return InstanceConfig(
        x_true=x_true,
        source_nu=nu,
        source_norm=norm_value,
        source_norm_key=norm_key,
        source_profile=profile,
        require_small_source=bool(block.get("require_small_source", False)),
    )


def _parse_profile(profile: str):
    if not isinstance(profile, str):
        raise ConfigError("source profile must be a string")
    if profile == "flat":
        return ("flat", None)
    if profile.startswith("power:"):
        try:
            exponent = float(profile.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad source profile {profile!r}") from exc
        return ("power", exponent)
    raise ConfigError(f"unknown source profile {profile!r}; use 'flat' or 'power:<p>'")


_RULE_KEYS = (
    "name", "tau", "gamma", "alpha0", "alpha_min", "alpha_max",
    "root_tolerance", "max_bisections", "grid_cap", "fallback_ratio",
    "apriori_exponent", "apriori_constant", "multistart",
)


def _parse_rule(block, seed: int):
    block = _require_mapping(block, "rule")
    _check_keys(block, "rule", _RULE_KEYS)
    name = block.get("name", "discrepancy")
    if name not in _RULE_NAMES:
        raise ConfigError(f"rule.name must be one of {_RULE_NAMES}, got {name!r}")
    kwargs = {k: v for k, v in block.items() if k != "name"}
    for key in ("max_bisections", "grid_cap", "multistart"):
        if key in kwargs:
            kwargs[key] = int(kwargs[key])
    for key in kwargs:
        if key not in ("max_bisections", "grid_cap", "multistart"):
            kwargs[key] = float(kwargs[key])
    try:
        cfg = SelectorConfig(seed=seed, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad rule block: {exc}") from exc
    return name, cfg


def _parse_grid(block) -> GridConfig:
    block = _require_mapping(block, "grid")
    _check_keys(block, "grid", ("deltas", "alphas", "k_range", "n_random", "seed"))
    if "seed" in block:
        seed = int(block["seed"])
    else:
        warnings.warn("config has no grid.seed; defaulting to 0", stacklevel=3)
        seed = 0
    deltas = _expand_grid(block.get("deltas", {"num": 8, "lo": 1e-5, "hi": 1e-2}), "grid.deltas")
    alphas = block.get("alphas")
    if alphas is not None:
        alphas = _expand_grid(alphas, "grid.alphas")
    k_range = block.get("k_range", [2, 8])
    if (not isinstance(k_range, (list, tuple))) or len(k_range) != 2:
        raise ConfigError("grid.k_range must be a [lo, hi] pair")
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    if k_lo < 1 or k_hi < k_lo:
        raise ConfigError("grid.k_range needs 1 <= lo <= hi")
    n_random = int(block.get("n_random", 8))
    if n_random < 0:
        raise ConfigError("grid.n_random must be nonnegative")
    return GridConfig(deltas=deltas, alphas=alphas, k_range=(k_lo, k_hi),
                      n_random=n_random, seed=seed)


def _parse_output(block) -> OutputConfig:
    block = _require_mapping(block, "output")
    _check_keys(block, "output", ("directory", "formats"))
    directory = block.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory must be a nonempty string")
    formats = block.get("formats", list(_FORMATS))
    if not isinstance(formats, (list, tuple)) or not formats:
        raise ConfigError("output.formats must be a nonempty list")
    for fmt in formats:
        if fmt not in _FORMATS:
            raise ConfigError(f"unknown output format {fmt!r}; use {_FORMATS}")
    return OutputConfig(directory=directory, formats=tuple(formats))


def parse_config(data) -> ExperimentConfig:
    """Normalize a JSON string or already-decoded object into a config."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    data = _require_mapping(data, "config")
    _check_keys(data, "config",
                ("satlab_schema", "model", "instance", "rule", "grid", "output"))
    version = data.get("satlab_schema")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"config must declare \"satlab_schema\": {SCHEMA_VERSION}, got {version!r}"
        )
    grid = _parse_grid(data.get("grid", {}))
    rule_name, rule = _parse_rule(data.get("rule", {}), grid.seed)
    return ExperimentConfig(
        model=_parse_model(data.get("model", {})),
        instance=_parse_instance(data.get("instance", {})),
        rule_name=rule_name,
        rule=rule,
        grid=grid,
        output=_parse_output(data.get("output", {})),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def serialize_config(config: ExperimentConfig) -> dict:
    """Explicit-form JSON object; parse() of it reproduces the config."""
    instance: dict = {"x_true": (
        "default" if config.instance.x_true == "default" else list(config.instance.x_true)
    )}
    if config.instance.source_nu is not None:
        instance["source"] = {
            "nu": config.instance.source_nu,
            config.instance.source_norm_key: config.instance.source_norm,
            "profile": config.instance.source_profile,
        }
    instance["require_small_source"] = config.instance.require_small_source

    rule = {
        "name": config.rule_name,
        "tau": config.rule.tau,
        "gamma": config.rule.gamma,
        "alpha0": config.rule.alpha0,
        "alpha_min": config.rule.alpha_min,
        "alpha_max": config.rule.alpha_max,
        "root_tolerance": config.rule.root_tolerance,
        "max_bisections": config.rule.max_bisections,
        "grid_cap": config.rule.grid_cap,
        "fallback_ratio": config.rule.fallback_ratio,
        "apriori_exponent": config.rule.apriori_exponent,
        "apriori_constant": config.rule.apriori_constant,
        "multistart": config.rule.multistart,
    }
    grid: dict = {
        "deltas": list(config.grid.deltas),
        "k_range": list(config.grid.k_range),
        "n_random": config.grid.n_random,
        "seed": config.grid.seed,
    }
    if config.grid.alphas is not None:
        grid["alphas"] = list(config.grid.alphas)
    return {
        "satlab_schema": SCHEMA_VERSION,
        "model": {
            "kind": config.model.kind,
            "n": config.model.n,
            "s": config.model.s,
            "scale": config.model.scale,
            "beta": config.model.beta,
            "rho": config.model.rho,
        },
        "instance": instance,
        "rule": rule,
        "grid": grid,
        "output": {
            "directory": config.output.directory,
            "formats": list(config.output.formats),
        },
    }


def _profile_vector(profile: str, dim: int) -> np.ndarray:
    kind, exponent = _parse_profile(profile)
    if kind == "flat":
        raw = np.ones(dim)
    else:
        raw = np.arange(1, dim + 1, dtype=float) ** (-exponent)
    return raw / np.linalg.norm(raw)


def build_instance(config: ExperimentConfig) -> ProblemInstance:
    """Materialize the configured model, truth, source, and exact data."""
    mc = config.model
    if mc.kind == "linear":
        model = make_diagonal_linear(mc.n, mc.s, scale=mc.scale, rho=mc.rho)
    else:
        base = make_diagonal_linear(mc.n, mc.s, scale=mc.scale, rho=mc.rho)
        model = make_composition_model(base.matrix, mc.beta, rho=mc.rho)

    ic = config.instance
    if ic.x_true == "default":
        x_true = default_ground_truth(mc.n)
    else:
        x_true = np.array(ic.x_true, dtype=float)
        if x_true.shape != (mc.n,):
            raise ConfigError(
                f"instance.x_true has length {x_true.size}, model needs {mc.n}"
            )

    source = None
    if ic.source_nu is not None:
        # nu = 1/2 elements live in data space, nu >= 1 elements in domain
        dim = model.dim_y if ic.source_nu == 0.5 else model.dim_x
        element = ic.source_norm * _profile_vector(ic.source_profile, dim)
        source = SourcePrior(nu=ic.source_nu, element=element)

    return synthesize_instance(
        model, x_true, source, require_small_source=ic.require_small_source
    )
