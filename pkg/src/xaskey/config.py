"""Suite configuration: INI sections whose values are JSON literals.

Example::

    [suite]
    seed = 7
    samples = 20
    tolerances = {"difeqP": 1e-10}

    [instance.W-real]
    family = "W"
    params = [0.3, 0.5, 1.1, 1.7]
    ells = [1, 2]

Complex parameters are written as ``[re, im]`` pairs. Unknown sections or
keys are rejected.
"""

import configparser
import json
import os
from dataclasses import dataclass, field
from importlib import resources

from .families import Family, InvalidParameters, ParamSet

ENV_VAR = "XASKEY_CONFIG"

_SUITE_KEYS = {"seed", "samples", "ids", "tolerances", "faults"}
_INSTANCE_KEYS = {"family", "params", "q", "ells"}
_FAULT_KEYS = {"quantity", "rel", "n", "instance"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InstanceSpec:
    name: str
    params: ParamSet
    ells: tuple = ()


@dataclass(frozen=True)
class FaultSpec:
    quantity: str
    rel: float
    n: int | None = None
    instance: str | None = None


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    samples: int = 20
    ids: tuple | None = None
    tolerances: dict = field(default_factory=dict)
    faults: tuple = ()
    instances: tuple = ()

    def instance(self, name) -> InstanceSpec:
        for inst in self.instances:
            if inst.name == name:
                return inst
        raise ConfigError(f"no instance named {name!r}")


def parse_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2 or not all(isinstance(t, (int, float)) for t in v):
            raise ConfigError(f"complex values are [re, im] pairs, got {v!r}")
        return complex(v[0], v[1])
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise ConfigError(f"not a number: {v!r}")


def _json(section, key, raw):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError(f"[{section}] {key}: invalid JSON value {raw!r}") from e


def _int(v, what):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{what} must be an integer")
    return v


def _instance(name, sec):
    vals = {k: _json(f"instance.{name}", k, v) for k, v in sec.items()}
    unknown = set(vals) - _INSTANCE_KEYS
    if unknown:
        raise ConfigError(f"[instance.{name}] unknown keys: {sorted(unknown)}")
    for k in ("family", "params"):
        if k not in vals:
            raise ConfigError(f"[instance.{name}] missing {k}")
    try:
        fam = Family(vals["family"])
    except ValueError as e:
        raise ConfigError(f"[instance.{name}] unknown family {vals['family']!r}") from e
    if not isinstance(vals["params"], list):
        raise ConfigError(f"[instance.{name}] params must be a list")
    a = tuple(parse_complex(v) for v in vals["params"])
    try:
        p = ParamSet(fam, a, vals.get("q"))
    except InvalidParameters as e:
        raise ConfigError(f"[instance.{name}] {e}") from e
    if not p.is_valid:
        raise ConfigError(f"[instance.{name}] parameters outside the allowed range")
    ells = vals.get("ells", [])
    if not isinstance(ells, list):
        raise ConfigError(f"[instance.{name}] ells must be a list")
    ells = tuple(_int(e, "ell") for e in ells)
    if any(e < 1 for e in ells):
        raise ConfigError(f"[instance.{name}] ells must be positive")
    if fam is Family.CH and any(e % 2 for e in ells):
        raise ConfigError(f"[instance.{name}] cH deformations need even ell")
    return InstanceSpec(name, p, ells)


def parse_config(text: str) -> SuiteConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e)) from e
    suite = {}
    instances = []
    for section in cp.sections():
        if section == "suite":
            suite = {k: _json("suite", k, v) for k, v in cp[section].items()}
        elif section.startswith("instance."):
            name = section.split(".", 1)[1]
            if not name:
                raise ConfigError("empty instance name")
            instances.append(_instance(name, cp[section]))
        else:
            raise ConfigError(f"unknown section [{section}]")
    unknown = set(suite) - _SUITE_KEYS
    if unknown:
        raise ConfigError(f"[suite] unknown keys: {sorted(unknown)}")
    seed = _int(suite.get("seed", 0), "seed")
    samples = _int(suite.get("samples", 20), "samples")
    if samples < 1:
        raise ConfigError("samples must be positive")
    ids = suite.get("ids")
    if ids is not None:
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise ConfigError("ids must be a list of strings")
        ids = tuple(ids)
    tols = suite.get("tolerances", {})
    if not isinstance(tols, dict) or not all(isinstance(v, (int, float)) for v in tols.values()):
        raise ConfigError("tolerances must map ids to numbers")
    faults = []
    for f in suite.get("faults", []):
        if not isinstance(f, dict) or set(f) - _FAULT_KEYS or not {"quantity", "rel"} <= set(f):
            raise ConfigError(f"bad fault entry {f!r}")
        faults.append(FaultSpec(f["quantity"], float(f["rel"]), f.get("n"), f.get("instance")))
    cfg = SuiteConfig(seed, samples, ids, dict(tols), tuple(faults), tuple(instances))
    names = [i.name for i in instances]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate instance names")
    for f in faults:
        if f.instance is not None:
            cfg.instance(f.instance)
    return cfg


def load_config(path=None) -> SuiteConfig:
    """Read a config file; ``None`` means $XASKEY_CONFIG, then the bundled default."""
    path = path or os.environ.get(ENV_VAR)
    if path is None:
        text = resources.files("xaskey").joinpath("data/default_suite.ini").read_text()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)
