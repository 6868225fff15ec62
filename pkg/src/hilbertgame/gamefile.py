"""Reading and writing game files.

Game files are JSON documents.  Complex numbers are written as ``[re, im]``
pairs and matrices as row-major nested lists; plain real numbers are
accepted wherever a complex entry is expected.  Three kinds exist::

    {"kind": "classical", "players": 2,
     "strategies": [["C", "D"], ["C", "D"]],
     "payoffs": [[[-2, -5], [0, -4]], [[-2, 0], [-5, -4]]]}

    {"kind": "quantum", "players": 2, "object_dim": 2,
     "rho0": M, "payoff_operators": [M, M],
     "strategy_bases": [{"labels": [...], "operators": [M, ...]}, ...],
     "acting_order": [1, 2]}

    {"kind": "raw-hermitian", "players": 2, "dims": [2, 2],
     "strategies": [...], "payoff_matrices": [M, M]}

Player numbers in files are 1-based.
"""

from __future__ import annotations

import json
import math
import re
from typing import Any

import numpy as np

from .games import ClassicalGame, Game, QuantumGameSpec, RawGame


class GameFileError(ValueError):
    """Malformed or invalid game file; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


class _Reader:
    def __init__(self, text: str, doc: dict):
        self.text = text
        self.doc = doc

    def fail(self, key: str, message: str):
        root = key.split("[")[0].split(".")[0]
        raise GameFileError(message, key, _line_of(self.text, root))

    def get(self, key: str, required: bool = True, default=None):
        if key not in self.doc:
            if required:
                raise GameFileError("missing required field", key)
            return default
        return self.doc[key]

    def number(self, value, key: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            self.fail(key, "non-finite number")
        return float(value)

    def complex_entry(self, value, key: str) -> complex:
        if isinstance(value, list):
            if len(value) != 2:
                self.fail(key, f"complex entries must be [re, im] pairs, got {value!r}")
            return complex(self.number(value[0], key), self.number(value[1], key))
        return complex(self.number(value, key), 0.0)

    def matrix(self, value, key: str) -> np.ndarray:
        if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
            self.fail(key, "expected a matrix as a list of rows")
        width = len(value[0])
        if width == 0 or any(len(r) != width for r in value):
            self.fail(key, "matrix rows are empty or ragged")
        return np.array([[self.complex_entry(x, key) for x in row] for row in value],
                        dtype=complex)

    def labels(self, value, key: str) -> list[list[str]]:
        if not isinstance(value, list) or not all(isinstance(ls, list) for ls in value):
            self.fail(key, "expected one list of labels per player")
        return [[str(x) for x in ls] for ls in value]


def _real_tensor(r: _Reader, value, key: str) -> np.ndarray:
    def walk(v):
        if isinstance(v, list):
            return [walk(x) for x in v]
        return r.number(v, key)
    arr = np.array(walk(value), dtype=float)
    if arr.dtype == object:
        r.fail(key, "ragged payoff table")
    return arr


def parse_game(text: str) -> Game:
    """Parse and validate a game file.

    Raises :class:`GameFileError` naming the line and field at fault.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFileError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise GameFileError("top level must be an object", line=1)
    r = _Reader(text, doc)
    kind = r.get("kind")
    players = r.get("players")
    if isinstance(players, bool) or not isinstance(players, int) or players < 2:
        r.fail("players", f"expected an integer >= 2, got {players!r}")
    name = str(doc.get("name", ""))
    try:
        if kind == "classical":
            game = _parse_classical(r, players, name)
        elif kind == "quantum":
            game = _parse_quantum(r, players, name)
        elif kind == "raw-hermitian":
            game = _parse_raw(r, players, name)
        else:
            r.fail("kind", f"unknown kind {kind!r}; expected classical, quantum or raw-hermitian")
    except GameFileError:
        raise
    except ValueError as exc:
        field = _field_for_message(str(exc), kind)
        raise GameFileError(str(exc), field, _line_of(text, field)) from None
    return game


def _field_for_message(msg: str, kind: str) -> str:
    for needle, field in (("rho0", "rho0"), ("payoff operator", "payoff_operators"),
                          ("strategy basis", "strategy_bases"), ("acting_order", "acting_order"),
                          ("payoff matrix", "payoff_matrices"), ("Hermitian", "payoff_matrices"),
                          ("labels", "strategies"), ("payoff tensor", "payoffs")):
        if needle in msg:
            return field
    return "payoffs" if kind == "classical" else "kind"


def _parse_classical(r: _Reader, players: int, name: str) -> ClassicalGame:
    tables = r.get("payoffs")
    if not isinstance(tables, list) or len(tables) != players:
        r.fail("payoffs", f"expected {players} payoff tables")
    tensors = [_real_tensor(r, t, f"payoffs[{i}]") for i, t in enumerate(tables)]
    labels = r.get("strategies", required=False)
    if labels is not None:
        labels = r.labels(labels, "strategies")
    return ClassicalGame(tuple(tensors), labels, name)


def _parse_quantum(r: _Reader, players: int, name: str) -> QuantumGameSpec:
    rho0 = r.matrix(r.get("rho0"), "rho0")
    d = r.get("object_dim", required=False)
    if d is not None and rho0.shape != (d, d):
        r.fail("rho0", f"rho0 has shape {rho0.shape}, object_dim is {d}")
    ops = r.get("payoff_operators")
    if not isinstance(ops, list) or len(ops) != players:
        r.fail("payoff_operators", f"expected {players} payoff operators")
    ops = [r.matrix(m, f"payoff_operators[{i}]") for i, m in enumerate(ops)]
    bases_doc = r.get("strategy_bases")
    if not isinstance(bases_doc, list) or len(bases_doc) != players:
        r.fail("strategy_bases", f"expected {players} strategy bases")
    bases, labels = [], []
    for i, b in enumerate(bases_doc):
        key = f"strategy_bases[{i}]"
        if not isinstance(b, dict) or not isinstance(b.get("operators"), list):
            r.fail(key, "each basis needs an 'operators' list")
        bases.append(tuple(r.matrix(m, key) for m in b["operators"]))
        labels.append(b.get("labels"))
    if all(ls is None for ls in labels):
        labels = None
    elif any(ls is None for ls in labels):
        r.fail("strategy_bases", "give labels for every basis or for none")
    order = r.get("acting_order", required=False)
    if order is not None:
        if not isinstance(order, list) or not all(isinstance(k, int) for k in order):
            r.fail("acting_order", "expected a list of 1-based player numbers")
        order = tuple(k - 1 for k in order)
    return QuantumGameSpec(rho0, tuple(ops), tuple(bases), labels, order, name)


def _parse_raw(r: _Reader, players: int, name: str) -> RawGame:
    mats = r.get("payoff_matrices")
    if not isinstance(mats, list) or len(mats) != players:
        r.fail("payoff_matrices", f"expected {players} payoff matrices")
    mats = [r.matrix(m, f"payoff_matrices[{i}]") for i, m in enumerate(mats)]
    labels = r.get("strategies", required=False)
    if labels is not None:
        labels = r.labels(labels, "strategies")
    dims = r.get("dims", required=False)
    if dims is None:
        if labels is None:
            r.fail("dims", "raw-hermitian games need 'dims' or 'strategies'")
        dims = [len(ls) for ls in labels]
    if not isinstance(dims, list) or len(dims) != players:
        r.fail("dims", f"expected {players} dimensions")
    return RawGame(tuple(mats), tuple(dims), labels, name)


def load_game(path) -> Game:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


# --------------------------------------------------------------------------
# Writing


def complex_entry(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_entry(z) for z in row] for row in np.asarray(m, dtype=complex)]


def dumps(doc: Any) -> str:
    """Serialize with one matrix row per line; floats use shortest
    round-trip repr, so re-parsing recovers identical binary64 values."""
    return _dump(doc, 0) + "\n"


def _is_row(v) -> bool:
    return isinstance(v, list) and all(
        isinstance(x, (int, float, str)) or (isinstance(x, list) and len(x) == 2
                                        and all(isinstance(y, (int, float)) for y in x))
        for x in v)


def _dump(v, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_dump(x, indent + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, list):
        if _is_row(v):
            return json.dumps(v, separators=(", ", ": "))
        items = [f"{inner}{_dump(x, indent + 1)}" for x in v]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(v)


def game_to_doc(game: Game) -> dict:
    """JSON-ready document for any game object."""
    if isinstance(game, ClassicalGame):
        return {"kind": "classical", "name": game.name, "players": game.n_players,
                "strategies": [list(ls) for ls in game.labels],
                "payoffs": [g.tolist() for g in game.payoffs]}
    if isinstance(game, QuantumGameSpec):
        return {"kind": "quantum", "name": game.name, "players": game.n_players,
                "object_dim": game.object_dim,
                "rho0": matrix_to_json(game.rho0),
                "payoff_operators": [matrix_to_json(p) for p in game.payoff_operators],
                "strategy_bases": [{"labels": list(ls), "operators": [matrix_to_json(b) for b in basis]}
                                   for ls, basis in zip(game.labels, game.strategy_bases)],
                "acting_order": [k + 1 for k in game.acting_order]}
    if isinstance(game, RawGame):
        return raw_doc(game.matrices, game.dims, game.labels, game.name)
    raise TypeError(f"not a game: {type(game).__name__}")


def raw_doc(matrices, dims, labels, name: str = "") -> dict:
    return {"kind": "raw-hermitian", "name": name, "players": len(dims),
            "dims": list(dims), "strategies": [list(ls) for ls in labels],
            "payoff_matrices": [matrix_to_json(m) for m in matrices]}
