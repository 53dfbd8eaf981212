"""Method registry and strict INI-style experiment configuration.

Example::

    [experiment]
    replications = 1
    seed = 7
    methods = FIN, SIN, SINA_FT, SINA_FT_Dk, SIN_cg5
    output = runs/desk

    [dataset]
    source = synthetic
    train_size = 2000
    dim = 100
    separability = 0.9

    [method.SIN]
    hessian_fraction = 0.3

Every :class:`SolverConfig` field may appear in a ``[method.NAME]`` section.
Unknown sections or keys raise :class:`ConfigError`.
"""

from __future__ import annotations

import configparser
import dataclasses
import typing
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..solver import SolverConfig

__all__ = ["METHOD_PRESETS", "DatasetSpec", "ExperimentConfig", "load_config", "method_config",
           "parse_config"]

# shared by every preset: stop at ||g|| <= 1e-4 or after 50 outer iterations,
# nonmonotone Armijo with c = 1e-4 and nu_k = max(1, f0) / k**1.1
_COMMON = dict(method="GIN", tol=1e-4, max_iters=50, c=1e-4, nu="power", nu_exponent=1.1)

METHOD_PRESETS = {
    "FIN": dict(forcing="fixed", eta=1e-4, hessian_rule="full"),
    "SIN": dict(forcing="fixed", eta=1e-4, hessian_rule="fixed-fraction", hessian_fraction=0.3),
    "SINA_FT": dict(forcing="adaptive", eta_cap=0.1, eta_floor=1e-3, eta0=0.1,
                    hessian_rule="fixed-fraction", hessian_fraction=0.3),
    "SINA_FT_Dk": dict(forcing="adaptive", eta_cap=0.1, eta_floor=1e-3, eta0=0.1,
                       hessian_rule="adaptive-feedback", d0_fraction=0.1, cg_threshold=20),
    "SIN_cg5": dict(forcing="fixed", eta=1e-4, hessian_rule="fixed-fraction",
                    hessian_fraction=0.3, cg_max_iters=5),
    "GINR-M": dict(method="GINR-M", forcing="adaptive", alpha=0.1, mu=0.1),
    "custom": dict(),
}


def method_config(name, **overrides) -> SolverConfig:
    """SolverConfig for a registered method name with field overrides."""
    if name not in METHOD_PRESETS:
        raise ConfigError(f"unknown method {name!r}; registered: {sorted(METHOD_PRESETS)}")
    kwargs = {**_COMMON, **METHOD_PRESETS[name], **overrides}
    unknown = set(kwargs) - {f.name for f in dataclasses.fields(SolverConfig)}
    if unknown:
        raise ConfigError(f"unknown solver option(s): {sorted(unknown)}")
    return SolverConfig(**kwargs)


@dataclass
class DatasetSpec:
    source: str = "synthetic"  # "synthetic" or a LIBSVM path
    test_path: str | None = None
    train_size: int = 2000
    dim: int = 100
    separability: float = 0.9
    test_size: int | None = None
    cluster_shift: float = 1.0
    feature_scale: float | None = None
    anisotropy: float = 1.0
    seed: int = 0
    lam: float | None = None  # defaults to 1/N


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    methods: dict = field(default_factory=dict)  # name -> SolverConfig
    replications: int = 1
    seed: int = 0
    output: str = "runs"
    workers: int = 1


_EXPERIMENT_KEYS = {"replications": int, "seed": int, "output": str, "workers": int,
                    "methods": str}


def _coerce(raw, typ, where):
    raw = raw.strip()
    origin = typing.get_origin(typ)
    args = typing.get_args(typ)
    if args and type(None) in args:
        if raw.lower() in ("", "none"):
            return None
        typ = next(a for a in args if a is not type(None))
    elif origin is not None:
        typ = origin
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {typ.__name__}") from None


def _field_types(cls):
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


def parse_config(text, source="<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive (C vs c)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    cfg = ExperimentConfig()
    names = None
    overrides = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "experiment":
            for key, raw in items.items():
                if key not in _EXPERIMENT_KEYS:
                    raise ConfigError(f"[experiment]: unknown key {key!r}")
                if key == "methods":
                    names = [m.strip() for m in raw.split(",") if m.strip()]
                else:
                    setattr(cfg, key, _coerce(raw, _EXPERIMENT_KEYS[key], f"[experiment] {key}"))
        elif section == "dataset":
            types = _field_types(DatasetSpec)
            kw = {}
            for key, raw in items.items():
                if key not in types:
                    raise ConfigError(f"[dataset]: unknown key {key!r}")
                kw[key] = _coerce(raw, types[key], f"[dataset] {key}")
            cfg.dataset = DatasetSpec(**kw)
        elif section.startswith("method."):
            name = section[len("method."):]
            if name not in METHOD_PRESETS:
                raise ConfigError(f"[{section}]: unknown method {name!r}")
            types = _field_types(SolverConfig)
            kw = {}
            for key, raw in items.items():
                if key not in types:
                    raise ConfigError(f"[{section}]: unknown key {key!r}")
                kw[key] = _coerce(raw, types[key], f"[{section}] {key}")
            overrides[name] = kw
        else:
            raise ConfigError(f"unknown section [{section}]")

    if names is None:
        names = list(overrides) or ["FIN", "SIN", "SINA_FT", "SINA_FT_Dk", "SIN_cg5"]
    for name in names:
        cfg.methods[name] = method_config(name, **overrides.get(name, {}))
    extra = set(overrides) - set(names)
    if extra:
        raise ConfigError(f"method sections not listed in [experiment] methods: {sorted(extra)}")
    if cfg.replications < 1:
        raise ConfigError("replications must be at least 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))
