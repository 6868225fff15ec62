"""Gibbs-state fixed-point iteration for game equilibria.

Each player repeatedly replaces their state with ``exp(beta H_R) / Z``, where
``H_R`` is their payoff matrix reduced against everyone else's current state.
``beta`` sets how sharply payoff differences are resolved: at ``beta = 0``
every player is uniform, at ``beta = inf`` each player takes the top
eigenvector of ``H_R`` (a best response).  Fixed points of the iteration are
the equilibrium states.
"""

from __future__ import annotations

import functools
import math
import string
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import lina
from .games import (ClassicalGame, Game, PlayerState, QuantumGameSpec,
                    payoff, payoff_matrices, system_from_players, uniform_state)

INF = math.inf
STABILITY_MARGIN = 1e-6
DEGENERACY_RTOL = 1e-9
TRAJECTORY_WINDOW = 8
QUANTUM_FINITE_BETA_WARNING = (
    "finite-beta iteration of a quantum game produces mixed operator "
    "strategies; treat the result as exploratory")


@dataclass(frozen=True)
class KineticsConfig:
    """``update_order`` is 0-based; ``parallel`` switches from sequential
    (each update sees the freshest states) to simultaneous updates."""

    beta: float = 1.0
    tolerance: float = 1e-10
    max_sweeps: int = 100_000
    update_order: Optional[tuple[int, ...]] = None
    parallel: bool = False
    record_trace: bool = False

    def __post_init__(self):
        beta = float(self.beta)
        if math.isnan(beta) or beta < 0:
            raise ValueError(f"beta must be >= 0 or inf, got {self.beta}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        object.__setattr__(self, "beta", beta)
        if self.update_order is not None:
            object.__setattr__(self, "update_order", tuple(int(k) for k in self.update_order))

    def order_for(self, n_players: int) -> tuple[int, ...]:
        if self.update_order is None:
            return tuple(range(n_players))
        if sorted(self.update_order) != list(range(n_players)):
            raise ValueError(
                f"update_order {self.update_order} is not a permutation of {n_players} players")
        return self.update_order


@dataclass
class StabilityReport:
    jacobian: np.ndarray
    spectral_radius: float
    classification: str


@dataclass
class FixedPointReport:
    states: list[PlayerState]
    payoffs: list[float]
    converged: bool
    sweeps_used: int
    residual: float
    stability: Optional[StabilityReport] = None
    window: list[list[np.ndarray]] = field(default_factory=list)
    trace: list[tuple[list[np.ndarray], float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def probabilities(self) -> list[np.ndarray]:
        return [s.probabilities for s in self.states]


def _rho(state) -> np.ndarray:
    return state.rho if isinstance(state, PlayerState) else np.asarray(state, dtype=complex)


def reduced_payoff(h, states: Sequence, dims: Sequence[int], owner: int) -> np.ndarray:
    """Owner's payoff matrix with every other player's state traced in.

    ``states[owner]`` is ignored (may be ``None``).  The result satisfies
    ``Tr(rho_owner H_R) == Tr(rho_1 x ... x rho_N  H)`` for any owner state.
    """
    h = h.h if hasattr(h, "h") else lina.as_square(h)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if not 0 <= owner < n:
        raise ValueError(f"owner {owner} out of range")
    if len(states) != n:
        raise ValueError(f"expected {n} player states, got {len(states)}")
    side = int(np.prod(dims))
    if h.shape != (side, side):
        raise ValueError(f"payoff matrix shape {h.shape} does not match {dims}")
    rhos = []
    for k in range(n):
        if k == owner:
            continue
        rho = _rho(states[k])
        if rho.shape != (dims[k], dims[k]):
            raise ValueError(f"state of player {k + 1} has shape {rho.shape}, expected {dims[k]}")
        rhos.append(rho)
    return np.einsum(_reduce_spec(n, owner), h.reshape(dims + dims), *rhos)


@functools.lru_cache(maxsize=None)
def _reduce_spec(n: int, owner: int) -> str:
    # H_R[a, b] = sum rho_k[x, y] H[.., y, .., x, ..] over each other player k
    if 2 * n > 52:
        raise ValueError("too many players")
    letters = string.ascii_letters
    rows, cols = letters[:n], letters[n:2 * n]
    others = [f"{cols[k]}{rows[k]}" for k in range(n) if k != owner]
    return ",".join([rows + cols] + others) + f"->{rows[owner]}{cols[owner]}"


def _top_projector(h: np.ndarray) -> np.ndarray:
    if lina.is_diagonal(h):
        w = h.diagonal().real
        top = w >= w.max() - DEGENERACY_RTOL * max(1.0, abs(w.max()))
        return np.diag(top / top.sum()).astype(complex)
    values, vectors = np.linalg.eigh(h)
    vmax = values[-1]
    top = values >= vmax - DEGENERACY_RTOL * max(1.0, abs(vmax))
    v = vectors[:, top]
    rho = v @ lina.dagger(v) / v.shape[1]
    return (rho + lina.dagger(rho)) / 2


def gibbs_update(h_r, beta: float) -> np.ndarray:
    """New player density matrix from a reduced payoff matrix.

    For ``beta = inf`` this is the projector onto the top eigenspace divided
    by its dimension, so tied best responses are mixed uniformly.
    """
    h = lina.hermitize(h_r)
    if math.isinf(beta):
        return _top_projector(h)
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    return lina.gibbs_hermitian(h, beta)


def _initial(game_dims: Sequence[int], initial) -> list[np.ndarray]:
    if initial is None:
        return [uniform_state(d).rho for d in game_dims]
    if len(initial) != len(game_dims):
        raise ValueError(f"expected {len(game_dims)} initial states, got {len(initial)}")
    rhos = []
    for k, (s, d) in enumerate(zip(initial, game_dims)):
        if not isinstance(s, PlayerState):
            s = PlayerState(s)
        if s.dim != d:
            raise ValueError(f"initial state of player {k + 1} has dimension {s.dim}, expected {d}")
        rhos.append(s.rho)
    return rhos


def sweep_once(states: Sequence, matrices: Sequence[np.ndarray], dims: Sequence[int],
               config: KineticsConfig) -> tuple[list[np.ndarray], float]:
    """Update every player once; return the new states and the largest
    entry change."""
    current = [_rho(s) for s in states]
    source = list(current)
    new = list(current)
    for i in config.order_for(len(dims)):
        basis = source if config.parallel else new
        new[i] = gibbs_update(reduced_payoff(matrices[i], basis, dims, i), config.beta)
    residual = max(lina.max_abs(a - b) for a, b in zip(new, current))
    return new, residual


def _dims_of(game: Game) -> tuple[int, ...]:
    return tuple(game.dims)


def _final_report(rhos, matrices, dims, converged, sweeps, residual, window, trace, warnings):
    states = [PlayerState(r) for r in rhos]
    system = system_from_players(states)
    payoffs = [payoff(system, m) for m in matrices]
    return FixedPointReport(states, payoffs, converged, sweeps, residual,
                            window=list(window), trace=trace, warnings=warnings)


def iterate(game: Game, initial=None, config: KineticsConfig = KineticsConfig(),
            matrices: Optional[Sequence[np.ndarray]] = None) -> FixedPointReport:
    """Sweep until the largest entry change is within tolerance.

    Running out of sweeps is a normal outcome (``converged=False``); the
    last few states are kept in ``report.window`` so cycles can be seen.
    """
    dims = _dims_of(game)
    mats = payoff_matrices(game) if matrices is None else list(matrices)
    rhos = _initial(dims, initial)
    warnings = []
    if isinstance(game, QuantumGameSpec) and not math.isinf(config.beta) and config.beta > 0:
        warnings.append(QUANTUM_FINITE_BETA_WARNING)
    window = deque(maxlen=TRAJECTORY_WINDOW)
    trace = [([r.copy() for r in rhos], math.nan)] if config.record_trace else []
    residual = math.inf
    sweeps = 0
    converged = False
    while sweeps < config.max_sweeps:
        rhos, residual = sweep_once(rhos, mats, dims, config)
        sweeps += 1
        window.append(rhos)
        if config.record_trace:
            trace.append((rhos, residual))
        if residual <= config.tolerance:
            converged = True
            break
    return _final_report(rhos, mats, dims, converged, sweeps, residual, window, trace, warnings)


# --------------------------------------------------------------------------
# Stability


def _classify(radius: float, margin: float = STABILITY_MARGIN) -> str:
    if radius < 1 - margin:
        return "stable"
    if radius > 1 + margin:
        return "unstable"
    return "marginal"


def _diag_probs(rhos) -> list[np.ndarray]:
    out = []
    for k, r in enumerate(rhos):
        r = _rho(r)
        if not lina.is_diagonal(r):
            raise ValueError(f"state of player {k + 1} is not diagonal; stability needs classical states")
        out.append(r.diagonal().real.copy())
    return out


def _coords_to_states(x: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    rhos = []
    pos = 0
    for d in dims:
        free = np.clip(x[pos:pos + d - 1], 0.0, 1.0)
        pos += d - 1
        total = free.sum()
        if total > 1:
            free = free / total
            total = 1.0
        p = np.append(free, 1.0 - total)
        rhos.append(np.diag(p).astype(complex))
    return rhos


def _states_to_coords(rhos, dims) -> np.ndarray:
    return np.concatenate([p[:d - 1] for p, d in zip(_diag_probs(rhos), dims)])


def _parallel_map(x: np.ndarray, mats, dims, beta: float) -> np.ndarray:
    rhos = _coords_to_states(x, dims)
    new = [gibbs_update(reduced_payoff(mats[i], rhos, dims, i), beta)
           for i in range(len(dims))]
    return _states_to_coords(new, dims)


def stability(states: Sequence, game: Game, config: KineticsConfig,
              fd_step: float = 1e-6) -> StabilityReport:
    """Linear stability of the one-step update map at ``states``.

    The Jacobian is taken over the independent probabilities (all but the
    last strategy of each player) of the simultaneous-update map, by central
    differences.  Only classical (diagonal) games and states are supported.
    """
    dims = _dims_of(game)
    mats = payoff_matrices(game)
    for i, m in enumerate(mats):
        if not lina.is_diagonal(m):
            raise ValueError(f"payoff matrix of player {i + 1} is not diagonal; "
                             "stability is only defined for classical games")
    x0 = _states_to_coords([_rho(s) for s in states], dims)
    n = x0.size
    jac = np.zeros((n, n))
    for k in range(n):
        up = x0.copy()
        dn = x0.copy()
        up[k] = min(1.0, x0[k] + fd_step)
        dn[k] = max(0.0, x0[k] - fd_step)
        span = up[k] - dn[k]
        if span <= 0:
            continue
        jac[:, k] = (_parallel_map(up, mats, dims, config.beta)
                     - _parallel_map(dn, mats, dims, config.beta)) / span
    radius = float(np.max(np.abs(np.linalg.eigvals(jac)))) if n else 0.0
    return StabilityReport(jac, radius, _classify(radius))


# --------------------------------------------------------------------------
# Beta sweeps


@dataclass
class SweepRow:
    beta: float
    report: FixedPointReport

    @property
    def spectral_radius(self) -> float:
        return self.report.stability.spectral_radius if self.report.stability else math.nan


def _is_classical(game: Game, mats) -> bool:
    return isinstance(game, ClassicalGame) or all(lina.is_diagonal(m) for m in mats)


def beta_sweep(game: Game, betas: Sequence[float], initial=None,
               config: KineticsConfig = KineticsConfig(),
               warm_start: bool = False) -> list[SweepRow]:
    """Iterate to a fixed point at each beta of an ascending grid.

    With ``warm_start`` each point starts from the previous point's final
    states instead of ``initial``.  Classical games also get a stability
    report per row.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("beta grid is empty")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("beta grid must be ascending")
    mats = payoff_matrices(game)
    classical = _is_classical(game, mats)
    rows = []
    start = initial
    for beta in betas:
        cfg = KineticsConfig(beta, config.tolerance, config.max_sweeps,
                             config.update_order, config.parallel, config.record_trace)
        report = iterate(game, start, cfg, matrices=mats)
        if classical:
            report.stability = stability(report.states, game, cfg)
        rows.append(SweepRow(beta, report))
        if warm_start:
            start = report.states
    return rows
