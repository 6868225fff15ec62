"""Games as Hermitian payoff matrices, with Gibbs fixed-point equilibria."""

from .games import (ClassicalGame, PayoffMatrix, PlayerState, QuantumGameSpec, RawGame,
                    SystemState, builtin, classical_payoff_matrix, classical_subblock,
                    decompose_operator, mixture_state, payoff, payoff_matrices,
                    pure_state, quantum_payoff_matrix, strategy_probability,
                    system_from_players)
from .kinetics import (INF, FixedPointReport, KineticsConfig, StabilityReport,
                       beta_sweep, gibbs_update, iterate, reduced_payoff, stability,
                       sweep_once)
from .lina import eig_hermitian, gibbs_exp, kron, op_inner, partial_trace

__version__ = "0.1.0"
