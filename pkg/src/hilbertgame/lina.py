"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
helpers here validate shapes and finiteness, build Kronecker products and
partial traces, and diagonalize / exponentiate Hermitian matrices.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

# Max-abs asymmetry accepted (relative to max(1, |H|_max)) before rejecting.
HERMITIAN_RTOL = 1e-9


class HermiticityError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""

    def __init__(self, asymmetry: float, limit: float):
        self.asymmetry = asymmetry
        self.limit = limit
        super().__init__(
            f"matrix is not Hermitian: max |H - H^dag| = {asymmetry:.3e} "
            f"exceeds {limit:.3e}")


class EigenSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array, or raise ``ValueError``."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


def asymmetry(h: np.ndarray) -> float:
    """Max-abs entry of ``h - h^dag``."""
    return max_abs(h - dagger(h))


def hermitize(h, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Check ``h`` is Hermitian to within ``rtol * max(1, |h|_max)`` and
    return the symmetrized matrix ``(h + h^dag) / 2``."""
    h = as_square(h)
    limit = rtol * max(1.0, max_abs(h))
    asym = asymmetry(h)
    if asym > limit:
        raise HermiticityError(asym, limit)
    return (h + dagger(h)) / 2


def is_diagonal(h: np.ndarray) -> bool:
    return np.count_nonzero(h) == np.count_nonzero(h.diagonal())


def kron(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def kron_all(factors: Sequence) -> np.ndarray:
    out = as_matrix(factors[0], "factor 0")
    for k, f in enumerate(factors[1:], start=1):
        out = np.kron(out, as_matrix(f, f"factor {k}"))
    return out


def _check_profile(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"invalid dimension profile {dims}")
    side = int(np.prod(dims))
    if m.shape != (side, side):
        raise ValueError(
            f"matrix of shape {m.shape} does not match profile {dims} (side {side})")
    return dims


def partial_trace(m, dims: Sequence[int], keep: int) -> np.ndarray:
    """Trace out every factor except ``keep`` from a matrix over ``dims``.

    The result is ``dims[keep] x dims[keep]`` with entries
    ``sum_nu m[(.., a, ..), (.., b, ..)]`` where the summation runs over the
    shared indices of all the other factors.
    """
    m = as_square(m)
    dims = _check_profile(m, dims)
    if not 0 <= keep < len(dims):
        raise ValueError(f"keep={keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError("too many factors")
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for k in range(n):
        if k != keep:
            cols[k] = rows[k]
    spec = "".join(rows) + "".join(cols) + "->" + rows[keep] + cols[keep]
    return np.einsum(spec, t)


def _canonical_phase(vectors: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of each column real positive
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        k = int(np.argmax(np.abs(col)))
        if col[k] != 0:
            out[:, j] = col * (abs(col[k]) / col[k])
    return out


def eig_hermitian(h) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Values come back ascending; each eigenvector is rotated so that its
    largest-magnitude component is real and positive.  Inputs whose
    asymmetry exceeds the acceptance tolerance raise
    :class:`HermiticityError`.
    """
    h = hermitize(h)
    values, vectors = np.linalg.eigh(h)
    return EigenSystem(values.astype(float), _canonical_phase(vectors))


def gibbs_exp(h, beta: float) -> np.ndarray:
    r"""Gibbs state :math:`e^{\beta h} / \mathrm{Tr}\, e^{\beta h}`.

    Uses the eigendecomposition of ``h`` and shifts the spectrum by its
    maximum before exponentiating, so large ``beta`` cannot overflow.
    """
    beta = float(beta)
    if not np.isfinite(beta):
        raise ValueError("beta must be finite; use kinetics.gibbs_update for beta=inf")
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    return gibbs_hermitian(hermitize(h), beta)


def gibbs_hermitian(h: np.ndarray, beta: float) -> np.ndarray:
    """:func:`gibbs_exp` for an already-symmetrized ``h``; no validation."""
    if is_diagonal(h):
        w = h.diagonal().real
        e = np.exp(beta * (w - w.max()))
        return np.diag(e / e.sum()).astype(complex)
    values, vectors = np.linalg.eigh(h)
    e = np.exp(beta * (values - values.max()))
    e /= e.sum()
    rho = (vectors * e) @ dagger(vectors)
    return (rho + dagger(rho)) / 2


def op_inner(a, b) -> complex:
    """Operator inner product ``Tr(a^dag b) / Tr(I)``.

    The ``1/Tr(I)`` factor gives unitary operators unit norm.
    """
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b) / a.shape[0])
