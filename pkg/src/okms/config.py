"""Run configuration: strict TOML ingestion with full validation.

Every key is checked before anything runs: unknown keys are errors (no
silent typos), and every invariant violation is reported with the dotted
key path that caused it, e.g. ``params.eps: must be positive``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import sharp
from .core import BoxGrid, RadialGrid, SimParams
from .errors import ConfigError

EXPERIMENTS = ("ok-run", "ms-run", "sweep", "check-all", "profile")


@dataclass
class Geometry:
    """Initial interface description: concentric spheres on the radial mesh,
    or plane crossings on a 1D box."""

    kind: str = "radial"
    positions: tuple = (0.4, 0.7)
    innermost_sign: int = -1
    space_dim: int = 3
    nodes: int = 257
    length: float = 1.0

    def family(self) -> sharp.SphereFamily:
        if self.kind != "radial":
            raise ConfigError("geometry.kind", "sphere family requires kind='radial'")
        return sharp.SphereFamily(self.positions, self.innermost_sign, self.space_dim)

    def grid(self):
        if self.kind == "radial":
            return RadialGrid(self.space_dim, self.nodes)
        return BoxGrid((self.length,), (self.nodes,))


@dataclass
class Config:
    """Validated contents of one experiment configuration file."""

    experiment: str
    params: SimParams
    geometry: Geometry
    eps_list: tuple = (0.08, 0.04, 0.02, 0.01)
    output_dir: str | None = None
    seed: int = 0
    record_every: int = 1

    def resolved_output_dir(self) -> str:
        """Explicit output_dir, else the OKMS_OUT root, else the cwd."""
        if self.output_dir is not None:
            return self.output_dir
        return os.environ.get("OKMS_OUT", ".")


def _section(data: dict, name: str) -> dict:
    sec = data.pop(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a table")
    return sec


class _Table:
    """One config table; tracks consumed keys so leftovers can be rejected."""

    def __init__(self, path: str, data: dict):
        self.path = path
        self.data = dict(data)

    def key(self, name: str) -> str:
        return f"{self.path}.{name}" if self.path else name

    def take(self, name: str, kinds, default=None, required=False):
        if name not in self.data:
            if required:
                raise ConfigError(self.key(name), "missing required key")
            return default
        val = self.data.pop(name)
        if not isinstance(val, kinds) or isinstance(val, bool):
            want = kinds[0].__name__ if isinstance(kinds, tuple) else kinds.__name__
            raise ConfigError(self.key(name), f"expected {want}, got {type(val).__name__}")
        return val

    def finish(self):
        for leftover in self.data:
            raise ConfigError(self.key(leftover), "unknown key")


def _positive(key: str, val: float) -> float:
    if val <= 0:
        raise ConfigError(key, "must be positive")
    return float(val)


def _float_list(key: str, val) -> tuple:
    if not isinstance(val, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in val
    ):
        raise ConfigError(key, "must be a list of numbers")
    return tuple(float(x) for x in val)


def _parse_geometry(data: dict) -> Geometry:
    tab = _Table("geometry", data)
    kind = tab.take("kind", str, default="radial")
    if kind not in ("radial", "box"):
        raise ConfigError("geometry.kind", f"must be 'radial' or 'box', got {kind!r}")
    length = _positive("geometry.length", tab.take("length", (int, float), default=1.0))
    if kind == "radial" and length != 1.0:
        raise ConfigError("geometry.length", "radial geometry supports only the unit ball")
    raw = tab.take("radii" if kind == "radial" else "crossings", list)
    pos_key = "geometry.radii" if kind == "radial" else "geometry.crossings"
    positions = (0.4, 0.7) if raw is None else _float_list(pos_key, raw)
    if not positions:
        raise ConfigError(pos_key, "need at least one interface position")
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise ConfigError(pos_key, "positions must be strictly increasing")
    hi = 1.0 if kind == "radial" else length
    if positions[0] <= 0.0 or positions[-1] >= hi:
        raise ConfigError(pos_key, f"positions must lie strictly inside (0, {hi:g})")
    sign = tab.take("innermost_sign", int, default=-1)
    if sign not in (-1, 1):
        raise ConfigError("geometry.innermost_sign", "must be -1 or +1")
    space_dim = tab.take("space_dim", int, default=3 if kind == "radial" else 1)
    if kind == "radial" and space_dim < 2:
        raise ConfigError("geometry.space_dim", "radial geometry needs space_dim >= 2")
    if kind == "box" and space_dim != 1:
        raise ConfigError("geometry.space_dim", "box geometry is one-dimensional")
    nodes = tab.take("nodes", int, default=257 if kind == "radial" else 256)
    if nodes < 64:
        raise ConfigError("geometry.nodes", "need at least 64 nodes")
    tab.finish()
    return Geometry(
        kind=kind,
        positions=positions,
        innermost_sign=sign,
        space_dim=space_dim,
        nodes=nodes,
        length=length,
    )


def _parse_params(data: dict) -> SimParams:
    tab = _Table("params", data)
    eps = _positive("params.eps", tab.take("eps", (int, float), default=0.04))
    lam = float(tab.take("lam", (int, float), default=0.0))
    if lam < 0:
        raise ConfigError("params.lam", "must be nonnegative")
    dt = tab.take("dt", (int, float))
    if dt is not None:
        dt = _positive("params.dt", dt)
    t_end = _positive("params.t_end", tab.take("t_end", (int, float), default=1.0e-3))
    stab = tab.take("stabilization", (int, float))
    if stab is not None and stab < 0:
        raise ConfigError("params.stabilization", "must be nonnegative")
    tab.finish()
    return SimParams(
        eps=eps,
        lam=lam,
        dt=None if dt is None else float(dt),
        t_end=t_end,
        stabilization=None if stab is None else float(stab),
    )


def parse_config(path: str) -> Config:
    """Read and fully validate a TOML experiment configuration."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(path, "configuration file not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(path, f"TOML syntax error: {exc}") from None

    params = _parse_params(_section(data, "params"))
    geometry = _parse_geometry(_section(data, "geometry"))
    sweep_sec = _Table("sweep", _section(data, "sweep"))
    raw_eps = sweep_sec.take("eps_list", list)
    eps_list = (
        (0.08, 0.04, 0.02, 0.01)
        if raw_eps is None
        else _float_list("sweep.eps_list", raw_eps)
    )
    if any(e <= 0 for e in eps_list):
        raise ConfigError("sweep.eps_list", "all entries must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("sweep.eps_list", "entries must be strictly descending")
    sweep_sec.finish()

    top = _Table("", data)
    experiment = top.take("experiment", str, required=True)
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            "experiment", f"must be one of {', '.join(EXPERIMENTS)}; got {experiment!r}"
        )
    output_dir = top.take("output_dir", str)
    seed = top.take("seed", int, default=0)
    if seed < 0:
        raise ConfigError("seed", "must be nonnegative")
    record_every = top.take("record_every", int, default=1)
    if record_every < 1:
        raise ConfigError("record_every", "must be >= 1")
    top.finish()

    cfg = Config(
        experiment=experiment,
        params=params,
        geometry=geometry,
        eps_list=eps_list,
        output_dir=output_dir,
        seed=seed,
        record_every=record_every,
    )
    # cross-field invariants that only make sense once everything is parsed
    if geometry.kind == "radial":
        try:
            geometry.family()
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError("geometry.radii", str(exc)) from None
    return cfg
