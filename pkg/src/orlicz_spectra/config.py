"""Experiment configuration: JSON file -> dataclasses -> EnergyContext."""
from __future__ import annotations

import ast
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .discretization import Grid
from .errors import ConfigError, OrliczError
from .orlicz_core import (
    ExponentField,
    NonlinearitySpec,
    PowerLog,
    PowerOverLog,
    PurePower,
    Tabulated,
    YoungFunction,
)

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
          "abs": np.abs}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


class Expression:
    """Arithmetic expression in x, y with + - * / ^ and sin, cos, exp, log, sqrt, abs.

    Parsed once with :mod:`ast`; only whitelisted nodes are accepted.
    """

    def __init__(self, source: str):
        self.source = str(source)
        text = self.source.replace("^", "**")
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"exponent expression: syntax error at line {exc.lineno}, "
                              f"column {exc.offset}: {self.source!r}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _fail(self, node, msg):
        raise ConfigError(f"exponent expression: {msg} at line {node.lineno}, "
                          f"column {node.col_offset + 1}: {self.source!r}")

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                self._fail(node, "unsupported operator")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.UAdd, ast.USub)):
                self._fail(node, "unsupported unary operator")
            self._check(node.operand)
        elif isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                self._fail(node, "only numeric literals are allowed")
        elif isinstance(node, ast.Name):
            if node.id not in ("x", "y") and node.id not in _CONSTS:
                self._fail(node, f"unknown name {node.id!r}")
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                self._fail(node, "unknown function")
            if len(node.args) != 1 or node.keywords:
                self._fail(node, "functions take exactly one argument")
            self._check(node.args[0])
        else:
            self._fail(node, f"unsupported syntax {type(node).__name__}")

    def __call__(self, x, y=None):
        env = {"x": np.asarray(x, dtype=float)}
        env["y"] = np.zeros_like(env["x"]) if y is None else np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = self._eval(self._tree, env)
        return np.broadcast_to(np.asarray(out, dtype=float), env["x"].shape).copy()

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTS[node.id]
        return _FUNCS[node.func.id](self._eval(node.args[0], env))


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    stop: float = 1e-8
    max_iter: int = 50000
    c1_samples: int = 64
    rho: float | None = None


@dataclass(frozen=True)
class ProblemConfig:
    extents: tuple[float, ...]
    cells: tuple[int, ...]
    nonlinearity: dict
    exponent: str
    embedding_dimension: int = 3
    solver: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    name: str = ""
    lam: float | None = None
    lambdas: tuple[float, ...] = ()
    k_max: int = 3

    # ---- construction -------------------------------------------------
    def grid(self) -> Grid:
        return Grid(self.extents, self.cells)

    def spec(self) -> NonlinearitySpec:
        return build_spec(self.nonlinearity)

    def young(self) -> YoungFunction:
        return YoungFunction(self.spec())

    def exponent_field(self, grid: Grid | None = None) -> ExponentField:
        grid = grid or self.grid()
        coords = grid.node_coords
        vals = Expression(self.exponent)(*coords)
        if not np.all(np.isfinite(vals)) or vals.min() <= 1:
            raise ConfigError(f"exponent {self.exponent!r} must be finite and > 1 at every node "
                              f"(min found {np.nanmin(vals):.6g})")
        return ExponentField(grid, vals)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["extents"] = list(self.extents)
        d["cells"] = list(self.cells)
        d["lambdas"] = list(self.lambdas)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_FAMILIES = {
    "PurePower": (PurePower, ("p",)),
    "PowerLog": (PowerLog, ("p", "r")),
    "PowerOverLog": (PowerOverLog, ("p",)),
}


def build_spec(d: dict) -> NonlinearitySpec:
    if not isinstance(d, dict) or "family" not in d:
        raise ConfigError("nonlinearity: expected an object with a 'family' field")
    fam = d["family"]
    try:
        if fam == "Tabulated":
            return Tabulated(tuple(tuple(k) for k in d["knots"]))
        cls, names = _FAMILIES[fam]
    except KeyError as exc:
        raise ConfigError(f"nonlinearity: unknown family or missing field {exc}") from None
    except (OrliczError, TypeError, ValueError) as exc:
        raise ConfigError(f"nonlinearity: {exc}") from None
    extra = set(d) - {"family", *names}
    if extra:
        raise ConfigError(f"nonlinearity: unexpected fields {sorted(extra)} for {fam}")
    try:
        return cls(*(float(d[n]) for n in names))
    except KeyError as exc:
        raise ConfigError(f"nonlinearity: {fam} needs field {exc}") from None
    except (OrliczError, TypeError, ValueError) as exc:
        raise ConfigError(f"nonlinearity: {exc}") from None


_TOP_KEYS = {"name", "domain", "mesh", "nonlinearity", "exponent", "embedding_dimension",
             "solver", "seed", "lambda", "lambdas", "k_max"}


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def parse_config(text: str, source: str = "<config>") -> ProblemConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _require(isinstance(raw, dict), f"{source}: top level must be an object")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, f"{source}: unknown fields {sorted(unknown)}")
    for key in ("domain", "mesh", "nonlinearity", "exponent"):
        _require(key in raw, f"{source}: missing field {key!r}")
    extents = tuple(float(v) for v in raw["domain"].get("extents", ()))
    cells = tuple(int(v) for v in raw["mesh"].get("cells", ()))
    _require(len(extents) in (1, 2), f"{source}: domain.extents must have 1 or 2 entries")
    _require(len(cells) == len(extents), f"{source}: mesh.cells must match domain.extents")
    _require(all(e > 0 for e in extents), f"{source}: domain.extents must be positive")
    _require(all(c >= 2 for c in cells), f"{source}: mesh.cells must be >= 2")
    exponent = raw["exponent"]
    exponent = repr(float(exponent)) if isinstance(exponent, (int, float)) else str(exponent)
    Expression(exponent)
    solver_raw = raw.get("solver", {})
    bad = set(solver_raw) - set(SolverOptions.__dataclass_fields__)
    _require(not bad, f"{source}: unknown solver fields {sorted(bad)}")
    solver = SolverOptions(**solver_raw)
    _require(solver.tol > 0 and solver.stop > 0 and solver.max_iter > 0,
             f"{source}: solver tolerances must be positive")
    _require(solver.c1_samples >= 32, f"{source}: solver.c1_samples must be >= 32")
    lambdas = tuple(float(v) for v in raw.get("lambdas", ()))
    cfg = ProblemConfig(
        extents=extents,
        cells=cells,
        nonlinearity=dict(raw["nonlinearity"]),
        exponent=exponent,
        embedding_dimension=int(raw.get("embedding_dimension", 3)),
        solver=solver,
        seed=int(raw.get("seed", 0)),
        name=str(raw.get("name", "")),
        lam=None if raw.get("lambda") is None else float(raw["lambda"]),
        lambdas=lambdas,
        k_max=int(raw.get("k_max", 3)),
    )
    _require(cfg.embedding_dimension >= 1, f"{source}: embedding_dimension must be >= 1")
    cfg.spec()
    cfg.exponent_field()
    return cfg


def load_config(path) -> ProblemConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, str(p))
