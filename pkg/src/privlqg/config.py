"""Run configuration: a TOML file with a [model] table plus optional run settings.

Schema (every table except [model] is optional)::

    [model]
    A = [[0.19, 0.46], [0.31, 0.8]]   # n x n, rows as nested arrays
    B = [[2.0], [1.0]]                # n x m
    C = [[1.0, 0.0]]                  # q x n
    Q = [[1.9, 0.9], [0.9, 2.8]]      # n x n
    R = [[1.0]]                       # q x q (a bare number is accepted for 1 x 1)
    W = [[1.5, 0.5], [0.5, 1.5]]      # n x n
    U = [[1.0]]                       # m x m
    x0_mean = [0.0, 0.0]              # optional, default zeros
    x0_cov = [[1.0, 0.0], [0.0, 1.0]] # optional, default identity

    [sweep]
    t_min = 1
    t_max = 10

    [optimize]
    alpha = 10.0          # a number, a list of numbers, or use the grid keys:
    alpha_start = 7.0
    alpha_stop = 27.0
    alpha_step = 0.5
    scan = false          # true forces the exhaustive scan

    [simulate]
    T = 3
    horizon = 6000
    trials = 200
    seed = 12345
    burn_in = 1000        # optional, default max(100 T, 1000)

    [tolerances]
    fixed_point_tol = 1e-12
    rank_tol = 1e-9

    [output]
    dir = "out"
"""

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import DimensionError
from .model import RANK_TOL, SystemModel, paper_example_model
from .riccati import DEFAULT_TOL

MODEL_KEYS = ("A", "B", "C", "Q", "R", "W", "U")
DEFAULT_SEED = 12345
PAPER_ALPHA_GRID = (7.0, 27.0, 0.5)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimSettings:
    T: int = 3
    N: int = 6000
    trials: int = 200
    seed: int = DEFAULT_SEED
    burn_in: Optional[int] = None


@dataclass(frozen=True)
class RunConfig:
    model: SystemModel
    T_range: Tuple[int, int] = (1, 10)
    alpha: Tuple[float, ...] = ()
    sim: SimSettings = SimSettings()
    output_dir: Path = Path(".")
    fixed_point_tol: float = DEFAULT_TOL
    rank_tol: float = RANK_TOL
    scan: bool = False

    def canonical(self):
        """Everything that influences results, as plain JSON-able data."""
        return {
            "model": self.model.to_dict(),
            "T_range": list(self.T_range),
            "alpha": [float(a) for a in self.alpha],
            "sim": {
                "T": self.sim.T, "N": self.sim.N, "trials": self.sim.trials,
                "seed": self.sim.seed, "burn_in": self.sim.burn_in,
            },
            "fixed_point_tol": self.fixed_point_tol,
            "rank_tol": self.rank_tol,
            "scan": self.scan,
        }

    def config_hash(self):
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw):
        sim_keys = {"T", "N", "trials", "seed", "burn_in"}
        sim = {k: v for k, v in kw.items() if k in sim_keys and v is not None}
        top = {k: v for k, v in kw.items() if k not in sim_keys and v is not None}
        cfg = replace(self, **top)
        return replace(cfg, sim=replace(cfg.sim, **sim)) if sim else cfg


def alpha_grid(start, stop, step):
    if step <= 0 or stop < start:
        raise ConfigError(f"bad alpha grid start={start} stop={stop} step={step}")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def _get(table, key, kind, where, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{where}.{key}'")
        return default
    val = table[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ConfigError(f"key '{where}.{key}' must be {kind.__name__}, got {type(val).__name__}")
    return val


def parse_alpha(spec):
    """'7', '7,8.5,9' or 'start:stop:step'."""
    try:
        if ":" in spec:
            start, stop, step = (float(s) for s in spec.split(":"))
            return alpha_grid(start, stop, step)
        return tuple(float(s) for s in spec.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse alpha '{spec}': {exc}") from None


def config_from_dict(data, base_dir=Path(".")):
    if "model" not in data or not isinstance(data["model"], dict):
        raise ConfigError("missing required table [model]")
    mt = data["model"]
    fields = {}
    for key in MODEL_KEYS:
        if key not in mt:
            raise ConfigError(f"missing required key 'model.{key}'")
        fields[key] = mt[key]
    for key in ("x0_mean", "x0_cov"):
        if key in mt:
            fields[key] = mt[key]
    unknown = set(mt) - set(MODEL_KEYS) - {"x0_mean", "x0_cov"}
    if unknown:
        raise ConfigError(f"unknown key(s) in [model]: {', '.join(sorted(unknown))}")
    try:
        model = SystemModel(**fields)
    except DimensionError as exc:
        raise ConfigError(f"[model]: {exc}") from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[model]: {exc}") from None

    sw = data.get("sweep", {})
    t_range = (_get(sw, "t_min", int, "sweep", 1), _get(sw, "t_max", int, "sweep", 10))

    op = data.get("optimize", {})
    if "alpha" in op:
        a = op["alpha"]
        alphas = tuple(float(x) for x in a) if isinstance(a, list) else (float(a),)
    elif "alpha_start" in op:
        alphas = alpha_grid(
            _get(op, "alpha_start", float, "optimize", required=True),
            _get(op, "alpha_stop", float, "optimize", required=True),
            _get(op, "alpha_step", float, "optimize", required=True),
        )
    else:
        alphas = alpha_grid(*PAPER_ALPHA_GRID)
    scan = _get(op, "scan", bool, "optimize", False)

    sm = data.get("simulate", {})
    sim = SimSettings(
        T=_get(sm, "T", int, "simulate", 3),
        N=_get(sm, "horizon", int, "simulate", 6000),
        trials=_get(sm, "trials", int, "simulate", 200),
        seed=_get(sm, "seed", int, "simulate", DEFAULT_SEED),
        burn_in=_get(sm, "burn_in", int, "simulate", None),
    )
    tl = data.get("tolerances", {})
    out = data.get("output", {})
    out_dir = Path(_get(out, "dir", str, "output", "."))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    return RunConfig(
        model=model,
        T_range=t_range,
        alpha=alphas,
        sim=sim,
        output_dir=out_dir,
        fixed_point_tol=_get(tl, "fixed_point_tol", float, "tolerances", DEFAULT_TOL),
        rank_tol=_get(tl, "rank_tol", float, "tolerances", RANK_TOL),
        scan=scan,
    )


def load_config(path):
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, base_dir=path.parent)


def example_config(output_dir="."):
    """The built-in second-order example with the settings used for reproduction."""
    return RunConfig(
        model=paper_example_model(),
        T_range=(1, 10),
        alpha=alpha_grid(*PAPER_ALPHA_GRID),
        sim=SimSettings(T=3, N=6000, trials=200, seed=DEFAULT_SEED),
        output_dir=Path(output_dir),
    )
