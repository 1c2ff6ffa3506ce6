"""Implicit-explicit stepping of du/dt = L u + N(u) with L diagonal in Fourier space.

The linear part is advanced by Crank-Nicolson. The explicit part uses second-order
Adams-Bashforth once a previous tendency is available and the Crank-Nicolson/Heun
predictor-corrector pair otherwise.
"""
from typing import Callable, Optional

import numpy as np

from core.models.model_enum import TimeScheme

ExplicitTerm = Callable[[np.ndarray], np.ndarray]
Constraint = Callable[[np.ndarray], np.ndarray]


class IMEXStepper:
    """Advance a stack of spectral fields by one step.

    Args:
        linear_symbol: Symbol of L, broadcastable to the stacked spectral state.
        dt: Time step.
        scheme: CNAB2 or CNHEUN.
    """

    __slots__ = ("dt", "scheme", "_explicit_gain", "_implicit_inverse")

    def __init__(self, linear_symbol: np.ndarray, dt: float, scheme: TimeScheme = TimeScheme.CNAB2):
        self.dt = dt
        self.scheme = scheme
        self._explicit_gain = 1.0 + 0.5 * dt * linear_symbol
        self._implicit_inverse = 1.0 / (1.0 - 0.5 * dt * linear_symbol)

    def crank_nicolson(self, state_hat: np.ndarray, explicit_hat: np.ndarray) -> np.ndarray:
        return (self._explicit_gain * state_hat + self.dt * explicit_hat) * self._implicit_inverse

    def advance(
        self,
        state_hat: np.ndarray,
        explicit: ExplicitTerm,
        explicit_now: np.ndarray,
        explicit_previous: Optional[np.ndarray] = None,
        constrain: Optional[Constraint] = None,
    ) -> np.ndarray:
        """Return the stepped spectral stack.

        Args:
            state_hat: Current spectral stack.
            explicit: Evaluates N on a spectral stack (used by the Heun corrector).
            explicit_now: N at the current state.
            explicit_previous: N at the previous state, enables Adams-Bashforth.
            constrain: Projection applied to the Heun predictor (Leray, mean removal).
        """
        if self.scheme is TimeScheme.CNAB2 and explicit_previous is not None:
            return self.crank_nicolson(state_hat, 1.5 * explicit_now - 0.5 * explicit_previous)
        predictor = self.crank_nicolson(state_hat, explicit_now)
        if constrain is not None:
            predictor = constrain(predictor)
        return self.crank_nicolson(state_hat, 0.5 * (explicit_now + explicit(predictor)))
