"""Configuration tree for the CLI: JSON with embedded defaults.

Power-like quantities accept either a linear key (watts / linear SNR) or the
same key with a ``_db`` suffix; internally everything is linear, and the
canonical serialized form emits linear values only.  ``gamma`` additionally
accepts the string ``"inf"`` for interference-limited operating points.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, replace

from .allocator import AllocationProblem, CostModel, ResourceBounds
from .amc import ModulationTable, db_to_linear, default_table, table_from_dict, table_to_dict
from .simulator import LinkConfig, QueueSimConfig
from .traffic import TrafficSpec


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending field path."""


DEFAULT_CONFIG = {
    "traffic": {
        # rho_hat is calibrated so the full feedback range 0..b_max is
        # feasible under the default link (the conservative rho_hat=1 makes
        # every (P,B) pair miss a 1% violation target; see README).
        "lambda": 300.0,
        "packet_bits": 1080,
        "d_max": 0.002,
        "epsilon0": 0.01,
        "rho_hat": 0.01005,
    },
    "modulation": {"builtin": True},
    "sinr": {"n_t": 4, "sigma2": 1.0},
    "cost": {"phi": 0.01, "psi": 0.8},
    "bounds": {"p_max": 1e4, "b_max": 10, "p_min": 1.0},
    "link": {
        "b": 8,
        "gamma": 10.0,
        "trials": 100000,
        "seed": 12345,
        "sampler": "auto",
        "codebook_file": None,
    },
    "queue": {"slot": 0.001, "horizon": 100000, "rho_hat_variant": "nonempty_slots"},
    "sweep": {
        "lambda": [1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0, 4000.0, 4500.0, 5000.0],
        "d_max": [0.002, 0.004, 0.008],
        "xi": [80.0, 120.0, 160.0, 200.0, 240.0],
        "regime": ["general"],
    },
    "validate": {
        "ks_threshold": 0.05,
        "points": [{"b": 8, "gamma": 10.0, "trials": 100000, "regime": "general"}],
    },
    "output": {"path": None, "format": "csv"},
}

_DB_KEYS = {"p_max", "p_min", "gamma", "p"}
_REGIMES = ("general", "interference_limited", "noise_limited")


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _merge(base, override, path="config"):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value, f"{path}.{key}")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _resolve_db_keys(tree, path="config"):
    """Replace every `<k>_db` entry by its linear `<k>`; reject duplicates."""
    if not isinstance(tree, dict):
        return tree
    out = {}
    for key, value in tree.items():
        if isinstance(value, dict):
            out[key] = _resolve_db_keys(value, f"{path}.{key}")
        elif isinstance(value, list):
            out[key] = [_resolve_db_keys(v, f"{path}.{key}") for v in value]
        else:
            out[key] = value
    for key in list(out):
        if key.endswith("_db") and key[:-3] in _DB_KEYS:
            base = key[:-3]
            if base in out and out[base] is not None:
                _fail(f"{path}.{key}", f"give either {base} or {key}, not both")
            out[base] = db_to_linear(_number(out.pop(key), f"{path}.{key}"))
    return out


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _gamma_value(value, path):
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        _fail(path, f"expected a number or 'inf', got {value!r}")
    return _number(value, path)


def _regime(value, path):
    name = str(value).replace("-", "_")
    if name not in _REGIMES:
        _fail(path, f"unknown regime {value!r}; expected one of {_REGIMES}")
    return name


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with typed views of every section."""

    tree: dict  # canonical (linear-unit) form

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        merged = _merge(DEFAULT_CONFIG, _resolve_db_keys(data))
        cfg = cls(tree=merged)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def validate(self):
        self.traffic_spec()
        self.modulation_table()
        self.cost_model()
        self.resource_bounds()
        self.link_config()
        self.queue_config()
        self.sweep_axes()
        self.validate_points()
        fmt = self.tree["output"].get("format")
        if fmt not in ("csv", "json"):
            _fail("output.format", f"expected 'csv' or 'json', got {fmt!r}")

    def canonical_dict(self) -> dict:
        tree = copy.deepcopy(self.tree)
        if tree["modulation"].get("builtin"):
            tree["modulation"] = {"builtin": True, **table_to_dict(self.modulation_table())}
        return tree

    def to_json(self) -> str:
        return json.dumps(self.canonical_dict(), indent=2, sort_keys=True, allow_nan=True)

    # -- typed section views -------------------------------------------------

    def traffic_spec(self) -> TrafficSpec:
        t = self.tree["traffic"]
        try:
            return TrafficSpec(
                arrival_rate=_number(t["lambda"], "traffic.lambda"),
                packet_bits=_integer(t["packet_bits"], "traffic.packet_bits"),
                d_max=_number(t["d_max"], "traffic.d_max"),
                epsilon0=_number(t["epsilon0"], "traffic.epsilon0"),
                rho_hat=_number(t["rho_hat"], "traffic.rho_hat"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail("traffic", str(exc))

    def modulation_table(self) -> ModulationTable:
        m = self.tree["modulation"]
        try:
            if "file" in m and m["file"]:
                from .amc import load_table

                return load_table(m["file"])
            if m.get("modes"):
                return table_from_dict(m)
            p_obj = _number(m.get("p_obj", 1e-4), "modulation.p_obj")
            rate = _number(m.get("symbol_rate", 1e6), "modulation.symbol_rate")
            return default_table(p_obj=p_obj, symbol_rate=rate)
        except (KeyError, ValueError, OSError) as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail("modulation", str(exc))

    def cost_model(self) -> CostModel:
        c = self.tree["cost"]
        try:
            return CostModel(
                phi=_number(c["phi"], "cost.phi"), psi=_number(c["psi"], "cost.psi")
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail("cost", str(exc))

    def resource_bounds(self) -> ResourceBounds:
        b = self.tree["bounds"]
        try:
            return ResourceBounds(
                p_max=_number(b["p_max"], "bounds.p_max"),
                b_max=_integer(b["b_max"], "bounds.b_max"),
                p_min=_number(b["p_min"], "bounds.p_min"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail("bounds", str(exc))

    def link_config(self, seed: int | None = None, **overrides) -> LinkConfig:
        l = self.tree["link"]
        s = self.tree["sinr"]
        kwargs = dict(
            n_t=_integer(s["n_t"], "sinr.n_t"),
            sigma2=_number(s["sigma2"], "sinr.sigma2"),
            b=_integer(l["b"], "link.b"),
            gamma=_gamma_value(l["gamma"], "link.gamma"),
            trials=_integer(l["trials"], "link.trials"),
            seed=_integer(l["seed"], "link.seed") if seed is None else seed,
            sampler=str(l.get("sampler", "auto")),
            codebook_file=l.get("codebook_file"),
        )
        kwargs.update(overrides)
        try:
            return LinkConfig(**kwargs)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail("link", str(exc))

    def queue_config(self, seed: int | None = None) -> QueueSimConfig:
        q = self.tree["queue"]
        try:
            return QueueSimConfig(
                slot=_number(q["slot"], "queue.slot"),
                horizon=_integer(q["horizon"], "queue.horizon"),
                spec=self.traffic_spec(),
                link=self.link_config(seed=seed),
                table=self.modulation_table(),
                rho_hat_variant=str(q.get("rho_hat_variant", "nonempty_slots")),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail("queue", str(exc))

    def sweep_axes(self) -> dict:
        s = self.tree["sweep"]
        axes = {}
        for key, conv in (
            ("lambda", _number),
            ("d_max", _number),
            ("xi", _number),
        ):
            values = s.get(key)
            if not isinstance(values, list) or not values:
                _fail(f"sweep.{key}", "must be a nonempty list")
            axes[key] = [conv(v, f"sweep.{key}") for v in values]
        regimes = s.get("regime")
        if not isinstance(regimes, list) or not regimes:
            _fail("sweep.regime", "must be a nonempty list")
        axes["regime"] = [_regime(r, "sweep.regime") for r in regimes]
        return axes

    def validate_points(self) -> list[dict]:
        v = self.tree["validate"]
        default_thr = _number(v.get("ks_threshold", 0.05), "validate.ks_threshold")
        points = v.get("points")
        if not isinstance(points, list) or not points:
            _fail("validate.points", "must be a nonempty list")
        out = []
        for i, pt in enumerate(points):
            path = f"validate.points[{i}]"
            if not isinstance(pt, dict):
                _fail(path, "must be an object")
            out.append(
                {
                    "b": _integer(pt["b"], f"{path}.b"),
                    "gamma": _gamma_value(pt["gamma"], f"{path}.gamma"),
                    "trials": _integer(pt.get("trials", 100000), f"{path}.trials"),
                    "regime": _regime(pt.get("regime", "general"), f"{path}.regime"),
                    "threshold": _number(pt.get("threshold", default_thr), f"{path}.threshold"),
                }
            )
        return out

    def allocation_problem(self, d_max=None, xi=None, regime=None) -> AllocationProblem:
        spec = self.traffic_spec()
        if d_max is not None:
            spec = replace(spec, d_max=d_max)
        cost = self.cost_model()
        if xi is not None:
            cost = CostModel(phi=cost.phi, psi=xi * cost.phi)
        s = self.tree["sinr"]
        return AllocationProblem(
            n_t=_integer(s["n_t"], "sinr.n_t"),
            sigma2=_number(s["sigma2"], "sinr.sigma2"),
            table=self.modulation_table(),
            spec=spec,
            cost=cost,
            bounds=self.resource_bounds(),
            regime=regime or "general",
        )
