"""JSON scenario configuration: one scenario per file."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

from .coeffspec import CoefficientError, PiecewisePower, _encode_real
from .measures import LocalSignedMeasure, MeasureError, drift_function_from_measure
from .simulate.scenario import Scenario, ScenarioError

ENGINES = ("walk", "timechange")
_TOP = {"name", "drift_function", "diffusion", "skewness", "initial", "simulation", "outputs"}
_SIM = {"T", "dt", "h", "n_paths", "engine", "seed"}
_OUT = {"paths", "stats", "localtime"}
_LT = {"levels", "eps", "t"}


class ConfigError(ValueError):
    """Configuration problem, anchored at a field path or a source line."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    scenario: Scenario
    drift_source: dict
    n_paths: int = 1000
    engine: str = "walk"
    outputs: dict = field(default_factory=dict)

    @property
    def f(self):
        return self.scenario.f

    @property
    def b(self):
        return self.scenario.b

    @property
    def nu(self):
        return self.scenario.nu


def _unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(where, f"expected an object, got {type(d).__name__}")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(where, f"unknown field(s) {extra}")


def _number(d: dict, key: str, where: str, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {v!r}")
    if kind is int:
        if int(v) != v:
            raise ConfigError(f"{where}.{key}", f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _drift(d, where="drift_function") -> PiecewisePower:
    try:
        if isinstance(d, dict) and "from_measure" in d:
            _unknown(d, {"from_measure"}, where)
            return drift_function_from_measure(LocalSignedMeasure.from_dict(d["from_measure"]))
        return PiecewisePower.from_dict(d)
    except (CoefficientError, MeasureError) as exc:
        raise ConfigError(where, str(exc)) from None


def from_dict(d: dict) -> ScenarioConfig:
    _unknown(d, _TOP, "config")
    name = d.get("name", "")
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")
    if "drift_function" not in d:
        raise ConfigError("drift_function", "missing")
    f = _drift(d["drift_function"])
    try:
        b = PiecewisePower.from_dict(d.get("diffusion", 1.0))
    except CoefficientError as exc:
        raise ConfigError("diffusion", str(exc)) from None
    try:
        nu = LocalSignedMeasure.from_dict(d.get("skewness", {}))
    except (MeasureError, CoefficientError) as exc:
        raise ConfigError("skewness", str(exc)) from None

    init = d.get("initial", {"point": 0.0})
    _unknown(init, {"point", "uniform"}, "initial")
    if ("point" in init) == ("uniform" in init):
        raise ConfigError("initial", "give exactly one of 'point' or 'uniform'")
    x0, x0u = 0.0, None
    if "point" in init:
        x0 = _number(init, "point", "initial")
    else:
        u = init["uniform"]
        if not (isinstance(u, list) and len(u) == 2):
            raise ConfigError("initial.uniform", "expected [lo, hi]")
        x0u = (float(u[0]), float(u[1]))

    sim = d.get("simulation", {})
    _unknown(sim, _SIM, "simulation")
    T = _number(sim, "T", "simulation", 1.0)
    dt = _number(sim, "dt", "simulation", 1e-3)
    h = _number(sim, "h", "simulation", 0.01)
    n_paths = _number(sim, "n_paths", "simulation", 1000, int)
    seed = _number(sim, "seed", "simulation", 0, int)
    engine = sim.get("engine", "walk")
    if engine not in ENGINES:
        raise ConfigError("simulation.engine", f"expected one of {ENGINES}, got {engine!r}")
    if n_paths < 1:
        raise ConfigError("simulation.n_paths", "must be at least 1")

    out = d.get("outputs", {})
    _unknown(out, _OUT, "outputs")
    if "localtime" in out:
        _unknown(out["localtime"], _LT, "outputs.localtime")

    try:
        s = Scenario(f, b, nu, x0=x0, x0_uniform=x0u, T=T, dt=dt, h=h, seed=seed, name=name)
    except ScenarioError as exc:
        raise ConfigError("simulation", str(exc)) from None
    except MeasureError as exc:
        raise ConfigError("skewness", str(exc)) from None
    return ScenarioConfig(name, s, d["drift_function"], n_paths, engine, dict(out))


def parse_config(text: str) -> ScenarioConfig:
    """Parse JSON text; every failure names the offending line or field."""
    if not text.strip():
        raise ConfigError("line 1", "empty configuration")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return from_dict(d)


def to_dict(cfg: ScenarioConfig) -> dict:
    s = cfg.scenario
    init = {"uniform": list(s.x0_uniform)} if s.x0_uniform is not None else {"point": s.x0}
    d = {"name": cfg.name, "drift_function": cfg.drift_source, "diffusion": s.b.to_dict(),
         "skewness": s.nu.to_dict(), "initial": init,
         "simulation": {"T": s.T, "dt": s.dt, "h": s.h, "n_paths": cfg.n_paths,
                        "engine": cfg.engine, "seed": s.seed}}
    if cfg.outputs:
        d["outputs"] = cfg.outputs
    return d


def emit_config(cfg: ScenarioConfig) -> str:
    return dumps(to_dict(cfg)) + "\n"


# -- output formatting ------------------------------------------------------------

def fmt(x: float) -> str:
    """Full-precision decimal (17 significant digits)."""
    return "%.17g" % x


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else json.dumps(_encode_real(obj) if not math.isnan(obj) else "nan")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item(), indent, level)
    if hasattr(obj, "tolist"):
        return _encode(obj.tolist(), indent, level)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj, indent, 0)


# -- shipped catalog ------------------------------------------------------------------

CATALOG_VERSION = "v1"


def catalog_names() -> list[str]:
    root = resources.files("singdrift") / "catalog" / CATALOG_VERSION
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def catalog_text(name: str) -> str:
    root = resources.files("singdrift") / "catalog" / CATALOG_VERSION
    p = root / f"{name}.json"
    if not p.is_file():
        raise ConfigError("catalog", f"no shipped scenario {name!r}; have {catalog_names()}")
    return p.read_text()


def load_catalog(name: str) -> ScenarioConfig:
    return parse_config(catalog_text(name))


__all__ = ["ConfigError", "ScenarioConfig", "parse_config", "from_dict", "to_dict", "emit_config",
           "dumps", "fmt", "catalog_names", "load_catalog", "catalog_text", "ENGINES"]
