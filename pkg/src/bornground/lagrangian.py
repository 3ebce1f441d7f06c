"""Born-Infeld Lagrangian density ``W(t) = 1 - sqrt(1 - t^2)`` and its derivatives.

All evaluators accept scalars or arrays of gradient magnitudes ``t`` in
``[0, 1)`` and reject anything else; clamping would hide constraint
violations further up the stack.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class LagrangianEval:
    """Energy density, flux density and flux derivative at one gradient magnitude."""

    t: float
    W: float
    w: float
    wp: float


def _check(t):
    arr = np.asarray(t, dtype=float)
    bad = ~((arr >= 0.0) & (arr < 1.0))
    if np.any(bad):
        offender = arr[bad].flat[0] if arr.ndim else float(arr)
        raise DomainError(f"gradient magnitude must lie in [0, 1), got {offender!r}")
    return arr


def _out(t, arr):
    return float(arr) if np.ndim(t) == 0 else arr


def eval_W(t):
    """Energy density ``1 - sqrt(1 - t^2)``.

    Evaluated as ``t^2 / (1 + sqrt(1 - t^2))`` to avoid cancellation at small t.
    """
    a = _check(t)
    return _out(t, a * a / (1.0 + np.sqrt(1.0 - a * a)))


def eval_w(t):
    """Flux density ``t / sqrt(1 - t^2)``, the derivative of :func:`eval_W`."""
    a = _check(t)
    return _out(t, a / np.sqrt(1.0 - a * a))


def eval_wp(t):
    """Flux derivative ``(1 - t^2)^(-3/2)``."""
    a = _check(t)
    return _out(t, (1.0 - a * a) ** -1.5)


def evaluate(t):
    """Bundle :func:`eval_W`, :func:`eval_w` and :func:`eval_wp` at a scalar ``t``."""
    t = float(t)
    return LagrangianEval(t=t, W=eval_W(t), w=eval_w(t), wp=eval_wp(t))


def series_coeff(j):
    """Coefficient ``b_j`` of ``1 - sqrt(1 - t^2) = sum_j b_j t^(2j)``.

    Uses ``b_1 = 1/2`` and ``b_{j+1} = b_j (2j - 1) / (2j + 2)``.
    """
    if int(j) != j or j < 1:
        raise DomainError(f"series index must be a positive integer, got {j!r}")
    b = 0.5
    for k in range(1, int(j)):
        b *= (2 * k - 1) / (2 * k + 2)
    return b


def series_coeffs(K):
    """First ``K`` coefficients ``b_1..b_K`` as an array."""
    if int(K) != K or K < 1:
        raise DomainError(f"truncation order must be a positive integer, got {K!r}")
    b = np.empty(int(K))
    b[0] = 0.5
    for k in range(1, int(K)):
        b[k] = b[k - 1] * (2 * k - 1) / (2 * k + 2)
    return b


def eval_W_series(t, K):
    """Truncated series ``sum_{j=1..K} b_j t^(2j)``; increases to :func:`eval_W` as K grows."""
    a = _check(t)
    b = series_coeffs(K)
    x = a * a
    # Horner in t^2, then one factor of t^2 for the missing constant term.
    acc = np.zeros_like(x)
    for coeff in b[::-1]:
        acc = acc * x + coeff
    return _out(t, acc * x)
