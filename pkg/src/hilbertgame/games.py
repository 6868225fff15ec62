"""Games as Hermitian payoff matrices over a product strategy space.

A player's (mixed or pure) strategy is a density matrix over that player's
strategy basis; a system state lives on the Kronecker product of all the
players' spaces, ordered row-major with player 1 varying slowest.  Player
``i`` earns ``Tr(rho_s H_i)``.

Classical games give diagonal ``H_i``.  Quantum games, where the strategies
are operators acting one after another on a quantum object, give payoff
matrices with off-diagonal entries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from . import lina

STATE_ATOL = 1e-12
BASIS_ATOL = 1e-10

# Operator basis of a spin-1/2 penny.  |XY> is read as the operator taking
# |X> to |Y>, so F^q = -i|UD> + i|DU> is [[0, i], [-i, 0]].
N_C = np.eye(2, dtype=complex)
F_C = np.array([[0, 1], [1, 0]], dtype=complex)
N_Q = np.array([[1, 0], [0, -1]], dtype=complex)
F_Q = np.array([[0, 1j], [-1j, 0]], dtype=complex)
PENNY_BASIS = (N_C, F_C, N_Q, F_Q)
PENNY_LABELS = ("Nc", "Fc", "Nq", "Fq")


def penny_unitary(theta: float, phi: float) -> np.ndarray:
    """The general single-penny operator U(theta, phi)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s * np.exp(-1j * phi)],
                     [s * np.exp(1j * phi), -c]], dtype=complex)


def matrix_unit_basis(d: int) -> list[np.ndarray]:
    """``sqrt(d) |j><k|`` for all j, k, orthonormal under ``op_inner``."""
    out = []
    for j in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = math.sqrt(d)
            out.append(e)
    return out


def flat_index(dims: Sequence[int], multi: Sequence[int]) -> int:
    return int(np.ravel_multi_index(tuple(multi), tuple(dims)))


# --------------------------------------------------------------------------
# Game data


def _labels(labels, dims) -> tuple[tuple[str, ...], ...]:
    if labels is None:
        return tuple(tuple(f"s{k + 1}" for k in range(d)) for d in dims)
    labels = tuple(tuple(str(x) for x in ls) for ls in labels)
    if tuple(len(ls) for ls in labels) != tuple(dims):
        raise ValueError(f"strategy labels {labels} do not match dimensions {tuple(dims)}")
    return labels


@dataclass(frozen=True)
class ClassicalGame:
    """N-player normal-form game with one real payoff tensor per player."""

    payoffs: tuple[np.ndarray, ...]
    labels: tuple[tuple[str, ...], ...] = None
    name: str = ""

    def __post_init__(self):
        tensors = tuple(np.array(g, dtype=float) for g in self.payoffs)
        if len(tensors) < 2:
            raise ValueError("a game needs at least two players")
        n = len(tensors)
        shape = tensors[0].shape
        for i, g in enumerate(tensors):
            if g.ndim != n or g.shape != shape:
                raise ValueError(
                    f"payoff tensor of player {i + 1} has shape {g.shape}, "
                    f"expected {n} axes matching {shape}")
            if not np.all(np.isfinite(g)):
                raise ValueError(f"payoff tensor of player {i + 1} has non-finite entries")
            g.setflags(write=False)
        object.__setattr__(self, "payoffs", tensors)
        object.__setattr__(self, "labels", _labels(self.labels, shape))

    @property
    def n_players(self) -> int:
        return len(self.payoffs)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.payoffs[0].shape


@dataclass(frozen=True)
class QuantumGameSpec:
    """Operator-strategy game on a quantum object of dimension ``object_dim``.

    ``strategy_bases[i]`` lists player i's basis operators, which must be
    orthonormal under :func:`lina.op_inner`.  ``acting_order`` gives the
    order (0-based) in which the players' operators act on ``rho0``.
    """

    rho0: np.ndarray
    payoff_operators: tuple[np.ndarray, ...]
    strategy_bases: tuple[tuple[np.ndarray, ...], ...]
    labels: tuple[tuple[str, ...], ...] = None
    acting_order: tuple[int, ...] = None
    name: str = ""

    def __post_init__(self):
        rho0 = lina.as_square(self.rho0, "rho0")
        d = rho0.shape[0]
        if lina.asymmetry(rho0) > STATE_ATOL:
            raise ValueError("rho0 is not Hermitian")
        if abs(np.trace(rho0) - 1) > STATE_ATOL:
            raise ValueError(f"rho0 trace is {np.trace(rho0).real:.15g}, expected 1")
        if np.linalg.eigvalsh((rho0 + lina.dagger(rho0)) / 2).min() < -STATE_ATOL:
            raise ValueError("rho0 is not positive semidefinite")
        ops = tuple(lina.as_square(p, f"payoff operator {i + 1}")
                    for i, p in enumerate(self.payoff_operators))
        n = len(ops)
        if n < 2:
            raise ValueError("a game needs at least two players")
        for i, p in enumerate(ops):
            if p.shape != (d, d):
                raise ValueError(f"payoff operator {i + 1} has shape {p.shape}, expected {(d, d)}")
            if lina.asymmetry(p) > BASIS_ATOL * max(1.0, lina.max_abs(p)):
                raise ValueError(f"payoff operator {i + 1} is not Hermitian")
        if len(self.strategy_bases) != n:
            raise ValueError(f"{len(self.strategy_bases)} strategy bases for {n} players")
        bases = []
        for i, basis in enumerate(self.strategy_bases):
            basis = tuple(lina.as_square(b, f"strategy basis {i + 1} operator {k + 1}")
                          for k, b in enumerate(basis))
            if not basis:
                raise ValueError(f"strategy basis {i + 1} is empty")
            for k, b in enumerate(basis):
                if b.shape != (d, d):
                    raise ValueError(
                        f"strategy basis {i + 1} operator {k + 1} has shape {b.shape}")
            gram = np.array([[lina.op_inner(a, b) for b in basis] for a in basis])
            err = lina.max_abs(gram - np.eye(len(basis)))
            if err > BASIS_ATOL:
                raise ValueError(
                    f"strategy basis {i + 1} is not orthonormal (Gram error {err:.3e})")
            bases.append(basis)
        order = tuple(range(n)) if self.acting_order is None else tuple(int(k) for k in self.acting_order)
        if sorted(order) != list(range(n)):
            raise ValueError(f"acting_order {order} is not a permutation of the players")
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "payoff_operators", ops)
        object.__setattr__(self, "strategy_bases", tuple(bases))
        object.__setattr__(self, "acting_order", order)
        object.__setattr__(self, "labels", _labels(self.labels, [len(b) for b in bases]))

    @property
    def object_dim(self) -> int:
        return self.rho0.shape[0]

    @property
    def n_players(self) -> int:
        return len(self.payoff_operators)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.strategy_bases)


@dataclass(frozen=True)
class RawGame:
    """Payoff matrices supplied directly, with no underlying game."""

    matrices: tuple[np.ndarray, ...]
    dims: tuple[int, ...]
    labels: tuple[tuple[str, ...], ...] = None
    name: str = ""

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValueError(f"invalid dimensions {dims}")
        if len(self.matrices) != len(dims):
            raise ValueError(f"{len(self.matrices)} payoff matrices for {len(dims)} players")
        side = int(np.prod(dims))
        mats = []
        for i, m in enumerate(self.matrices):
            m = lina.as_square(m, f"payoff matrix {i + 1}")
            if m.shape != (side, side):
                raise ValueError(f"payoff matrix {i + 1} has shape {m.shape}, expected side {side}")
            lina.hermitize(m)
            m = m.copy()
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", _labels(self.labels, dims))

    @property
    def n_players(self) -> int:
        return len(self.dims)


Game = Union[ClassicalGame, QuantumGameSpec, RawGame]


@dataclass(frozen=True)
class PayoffMatrix:
    h: np.ndarray
    owner: int


@dataclass(frozen=True)
class PlayerState:
    """Density matrix over one player's strategy basis."""

    rho: np.ndarray

    def __post_init__(self):
        rho = lina.as_square(self.rho, "player state")
        if lina.asymmetry(rho) > STATE_ATOL:
            raise ValueError("player state is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1) > STATE_ATOL:
            raise ValueError(f"player state trace is {tr.real:.15g}, expected 1")
        if rho.shape[0] > 1 and np.linalg.eigvalsh((rho + lina.dagger(rho)) / 2).min() < -STATE_ATOL:
            raise ValueError("player state has a negative eigenvalue")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        """Diagonal entries: the weights on the basis strategies."""
        return self.rho.diagonal().real.copy()


@dataclass(frozen=True)
class SystemState:
    rho: np.ndarray
    dims: tuple[int, ...]
    is_product: bool = False

    def __post_init__(self):
        rho = lina.as_square(self.rho, "system state")
        dims = tuple(int(d) for d in self.dims)
        if rho.shape[0] != int(np.prod(dims)):
            raise ValueError(f"system state side {rho.shape[0]} does not match {dims}")
        if lina.asymmetry(rho) > STATE_ATOL:
            raise ValueError("system state is not Hermitian")
        if abs(np.trace(rho) - 1) > STATE_ATOL:
            raise ValueError("system state trace differs from 1")
        if np.linalg.eigvalsh((rho + lina.dagger(rho)) / 2).min() < -STATE_ATOL:
            raise ValueError("system state is not positive semidefinite")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "dims", dims)


# --------------------------------------------------------------------------
# Payoff matrices


def classical_payoff_matrix(game: ClassicalGame, player: int) -> PayoffMatrix:
    """Diagonal system payoff matrix; entry (S, S) is player's payoff G(S)."""
    if not 0 <= player < game.n_players:
        raise ValueError(f"player {player} out of range")
    return PayoffMatrix(np.diag(game.payoffs[player].ravel()).astype(complex), player)


def _acting_product(ops: Sequence[np.ndarray], order: Sequence[int]) -> np.ndarray:
    # operators act in `order`: the first to act sits rightmost
    u = np.eye(ops[0].shape[0], dtype=complex)
    for k in order:
        u = ops[k] @ u
    return u


def quantum_payoff_matrix(spec: QuantumGameSpec, player: int,
                          atol: float = BASIS_ATOL) -> PayoffMatrix:
    """System payoff matrix of a quantum game.

    Entry ``(S, S')`` is ``Tr(P U(S') rho0 U(S)^dag)`` where ``U(S)`` is the
    product of the basis operators picked in ``S``, applied in acting order.
    Diagonal entries are therefore the payoffs of the pure basis profiles.
    """
    if not 0 <= player < spec.n_players:
        raise ValueError(f"player {player} out of range")
    p = spec.payoff_operators[player]
    profiles = list(itertools.product(*(range(d) for d in spec.dims)))
    # U(S) rho0 U(S')^dag and its transpose are both needed; cache U(S)
    us = [_acting_product([spec.strategy_bases[i][s] for i, s in enumerate(prof)],
                          spec.acting_order) for prof in profiles]
    left = [p @ u @ spec.rho0 for u in us]
    size = len(profiles)
    h = np.empty((size, size), dtype=complex)
    for row in range(size):
        ud = lina.dagger(us[row])
        for col in range(size):
            h[row, col] = np.trace(left[col] @ ud)
    asym = lina.asymmetry(h)
    if asym > atol * max(1.0, lina.max_abs(h)):
        raise lina.HermiticityError(asym, atol)
    return PayoffMatrix((h + lina.dagger(h)) / 2, player)


def payoff_matrices(game: Game) -> list[np.ndarray]:
    """All players' payoff matrices as plain arrays."""
    if isinstance(game, ClassicalGame):
        return [classical_payoff_matrix(game, i).h for i in range(game.n_players)]
    if isinstance(game, QuantumGameSpec):
        return [quantum_payoff_matrix(game, i).h for i in range(game.n_players)]
    if isinstance(game, RawGame):
        return [np.array(m) for m in game.matrices]
    raise TypeError(f"not a game: {type(game).__name__}")


def classical_subblock(h, dims: Sequence[int], indices: Sequence[Sequence[int]]) -> np.ndarray:
    """Rows/columns of ``h`` whose product index uses only ``indices[i]``
    for each player ``i``."""
    h = _matrix_of(h)
    dims = tuple(dims)
    if len(indices) != len(dims):
        raise ValueError("need one index subset per player")
    for i, sub in enumerate(indices):
        if any(not 0 <= k < dims[i] for k in sub):
            raise ValueError(f"index subset {list(sub)} invalid for player {i + 1}")
    flat = [flat_index(dims, m) for m in itertools.product(*indices)]
    return h[np.ix_(flat, flat)]


# --------------------------------------------------------------------------
# States


def mixture_state(probs: Sequence[float]) -> PlayerState:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 1 or not np.all(np.isfinite(p)):
        raise ValueError(f"invalid probabilities {probs!r}")
    if np.any(p < 0):
        raise ValueError(f"negative probability in {list(p)}")
    if abs(p.sum() - 1) > STATE_ATOL:
        raise ValueError(f"probabilities sum to {p.sum():.15g}, expected 1")
    return PlayerState(np.diag(p).astype(complex))


def pure_state(amplitudes: Sequence[complex]) -> PlayerState:
    x = np.asarray(amplitudes, dtype=complex)
    if x.ndim != 1 or x.size < 1 or not np.all(np.isfinite(x)):
        raise ValueError(f"invalid amplitudes {amplitudes!r}")
    norm = np.linalg.norm(x)
    if abs(norm - 1) > STATE_ATOL:
        raise ValueError(f"amplitudes have norm {norm:.15g}, expected 1")
    return PlayerState(np.outer(x, x.conj()))


def uniform_state(dim: int) -> PlayerState:
    return PlayerState(np.eye(dim, dtype=complex) / dim)


def _rho_of(state) -> np.ndarray:
    return state.rho if isinstance(state, (PlayerState, SystemState)) else np.asarray(state, dtype=complex)


def _matrix_of(h) -> np.ndarray:
    return h.h if isinstance(h, PayoffMatrix) else lina.as_square(h)


def system_from_players(states: Sequence[PlayerState]) -> SystemState:
    if len(states) < 2:
        raise ValueError("need at least two player states")
    rhos = [_rho_of(s) for s in states]
    return SystemState(lina.kron_all(rhos), tuple(r.shape[0] for r in rhos), True)


def payoff(state: SystemState, h, atol: float = 1e-9) -> float:
    """Expected payoff ``Tr(rho_s H)``; real by Hermiticity."""
    rho = _rho_of(state)
    m = _matrix_of(h)
    if rho.shape != m.shape:
        raise ValueError(f"state shape {rho.shape} does not match payoff matrix {m.shape}")
    value = np.sum(rho * m.T)
    if abs(value.imag) > atol * max(1.0, abs(value.real)):
        raise ValueError(
            f"payoff has imaginary part {value.imag:.3e}: state or payoff matrix is not Hermitian")
    return float(value.real)


def strategy_probability(state: PlayerState, direction: Sequence[complex]) -> float:
    """Weight ``<s|rho|s>`` the state puts on the pure strategy ``s``."""
    s = np.asarray(direction, dtype=complex)
    if abs(np.linalg.norm(s) - 1) > STATE_ATOL:
        raise ValueError("direction must have unit norm")
    return float(np.vdot(s, _rho_of(state) @ s).real)


class Decomposition(NamedTuple):
    coefficients: np.ndarray
    residual: float


def decompose_operator(a, basis: Sequence) -> Decomposition:
    """Coefficients of ``a`` on an ``op_inner``-orthonormal operator basis.

    ``residual`` is the max-abs entry of ``a`` minus its reconstruction;
    zero (to rounding) when ``a`` lies in the span of ``basis``.
    """
    a = lina.as_square(a, "operator")
    coeffs = np.array([lina.op_inner(b, a) for b in basis], dtype=complex)
    recon = sum((c * lina.as_square(b) for c, b in zip(coeffs, basis)),
                np.zeros_like(a))
    return Decomposition(coeffs, lina.max_abs(a - recon))


# --------------------------------------------------------------------------
# Built-in games


def _prisoners_dilemma() -> ClassicalGame:
    g1 = [[-2, -5], [0, -4]]
    g2 = [[-2, 0], [-5, -4]]
    return ClassicalGame((g1, g2), (("C", "D"), ("C", "D")), "prisoners-dilemma")


def _hawk_dove() -> ClassicalGame:
    g1 = [[3, 1], [4, 0]]
    g2 = [[3, 4], [1, 0]]
    return ClassicalGame((g1, g2), (("H", "D"), ("H", "D")), "hawk-dove")


def _penny_classical() -> ClassicalGame:
    g1 = np.array([[1, -1], [-1, 1]])
    return ClassicalGame((g1, -g1), (("N", "F"), ("N", "F")), "penny-classical")


def _penny_quantum() -> QuantumGameSpec:
    p_a = np.diag([1.0, -1.0]).astype(complex)
    return QuantumGameSpec(
        rho0=np.diag([1.0, 0.0]).astype(complex),
        payoff_operators=(p_a, -p_a),
        strategy_bases=(PENNY_BASIS, PENNY_BASIS),
        labels=(PENNY_LABELS, PENNY_LABELS),
        acting_order=(0, 1),
        name="penny-quantum",
    )


BUILTINS = {
    "prisoners-dilemma": _prisoners_dilemma,
    "hawk-dove": _hawk_dove,
    "penny-classical": _penny_classical,
    "penny-quantum": _penny_quantum,
}


def builtin(name: str) -> Game:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ValueError(
            f"unknown builtin game {name!r}; choose from {', '.join(sorted(BUILTINS))}") from None
