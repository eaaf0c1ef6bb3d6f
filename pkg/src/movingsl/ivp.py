"""Initial value problems for ``-u'' + q(x) u = lam u`` on one subinterval.

The integrator is scipy's DOP853 (embedded 8(5,3) Runge-Kutta pair with
dense output).  Because the equation is linear in ``u``, many spectral
parameters can be advanced together in a single call; :func:`integrate_many`
does that and is what the scanning code uses.  Complex ``lam`` is handled by
integrating a complex state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NonFinitePotential, StepSizeUnderflow

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class StateVector(NamedTuple):
    u: complex | float | np.ndarray
    up: complex | float | np.ndarray


@dataclass(frozen=True)
class SolutionPath:
    """Samples of ``(u, u')`` along one integration plus a dense evaluator.

    ``u`` and ``up`` have shape ``(n_samples,)`` for a single ``lam`` and
    ``(n_samples, n_lam)`` for a batch.
    """

    x: np.ndarray
    u: np.ndarray
    up: np.ndarray
    lam: complex | float | np.ndarray
    _dense: Callable | None = None

    @property
    def x_from(self) -> float:
        return float(self.x[0])

    @property
    def x_to(self) -> float:
        return float(self.x[-1])

    @property
    def start(self) -> StateVector:
        return StateVector(self.u[0], self.up[0])

    @property
    def end(self) -> StateVector:
        return StateVector(self.u[-1], self.up[-1])

    def __call__(self, x) -> StateVector:
        """Evaluate ``(u, u')`` anywhere on the span (scalar or array ``x``)."""
        if self._dense is None:
            raise ValueError("path was integrated without dense output")
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = min(self.x_from, self.x_to), max(self.x_from, self.x_to)
        span = hi - lo
        if np.any(xs < lo - 1e-12 * span) or np.any(xs > hi + 1e-12 * span):
            raise ValueError(f"x outside integration span [{lo}, {hi}]")
        y = self._dense(np.clip(xs, lo, hi))
        n = y.shape[0] // 2
        u, up = y[:n].T, y[n:].T
        # stored samples are returned verbatim
        for k, xv in enumerate(xs):
            if xv == self.x[0]:
                u[k], up[k] = self.u[0], self.up[0]
            elif xv == self.x[-1]:
                u[k], up[k] = self.u[-1], self.up[-1]
        if np.ndim(self.lam) == 0:
            u, up = u[:, 0], up[:, 0]
        if np.ndim(x) == 0:
            return StateVector(u[0], up[0])
        return StateVector(u, up)


def _rhs(q: Callable, lam: np.ndarray) -> Callable:
    n = lam.shape[0]

    def f(x, y):
        out = np.empty_like(y)
        out[:n] = y[n:]
        out[n:] = (q(x) - lam) * y[:n]
        return out

    return f


def integrate_many(q: Callable, lam, x_from: float, x_to: float, u0, up0,
                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                   dense: bool = False, t_eval=None) -> SolutionPath:
    """Integrate the ODE for an array of spectral parameters at once.

    ``u0``/``up0`` broadcast against ``lam``.  The step size is shared across
    the batch, so accuracy is governed by the most oscillatory member.
    """
    lam_arr = np.atleast_1d(np.asarray(lam))
    scalar = np.ndim(lam) == 0
    complex_mode = np.iscomplexobj(lam_arr) or np.iscomplexobj(u0) or np.iscomplexobj(up0)
    dtype = complex if complex_mode else float
    lam_arr = lam_arr.astype(dtype)
    u0 = np.broadcast_to(np.asarray(u0, dtype=dtype), lam_arr.shape)
    up0 = np.broadcast_to(np.asarray(up0, dtype=dtype), lam_arr.shape)
    if x_from == x_to:
        raise ValueError("x_from and x_to must differ")
    for xv in (x_from, x_to, 0.5 * (x_from + x_to)):
        if not np.isfinite(q(xv)):
            raise NonFinitePotential(f"q({xv}) is not finite")
    y0 = np.concatenate([u0, up0])
    # solve_ivp controls the RMS error over all components; rescale so the
    # worst single member still meets the requested tolerance
    shrink = np.sqrt(y0.size)
    sol = solve_ivp(_rhs(q, lam_arr), (x_from, x_to), y0, method="DOP853",
                    rtol=max(rtol / shrink, 1e-14), atol=atol / shrink,
                    dense_output=dense, t_eval=t_eval)
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)
    if not np.all(np.isfinite(sol.y)):
        raise StepSizeUnderflow("solution overflowed")
    n = lam_arr.shape[0]
    ys = sol.y
    if t_eval is None:
        # solve_ivp copies y0; restore the exact initial state
        ys[:, 0] = y0
    u, up = ys[:n].T, ys[n:].T
    if scalar:
        u, up = u[:, 0], up[:, 0]
        lam_out = lam_arr[0]
    else:
        lam_out = lam_arr
    return SolutionPath(sol.t, u, up, lam_out, sol.sol if dense else None)


def integrate(q_piece: Callable, lam, x_from: float, x_to: float, init,
              tol: float = DEFAULT_RTOL, atol: float | None = None) -> SolutionPath:
    """Solve the IVP from ``x_from`` to ``x_to`` (either direction) with dense output.

    ``init`` is ``(u, u')`` at ``x_from``.  ``tol`` is the relative tolerance;
    the absolute tolerance defaults to ``tol / 100``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u0, up0 = init
    return integrate_many(q_piece, lam, x_from, x_to, u0, up0, rtol=tol,
                          atol=tol / 100 if atol is None else atol, dense=True)
