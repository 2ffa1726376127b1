"""Photon-loss channel solved exactly through its Kraus sum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DimensionMismatch
from .fock import DensityMatrix


@dataclass(frozen=True)
class ChannelParams:
    """Loss channel after dimensionless decay time ``gamma_t``.

    ``kraus_cutoff`` defaults to ``dim``: in a ``dim``-level truncation no
    more than ``dim - 1`` photons can be lost.
    """

    gamma_t: float
    dim: int
    kraus_cutoff: int | None = None

    def __post_init__(self):
        if not np.isfinite(self.gamma_t) or self.gamma_t < 0:
            raise ValueError(f"gamma_t must be finite and nonnegative, got {self.gamma_t}")
        if self.dim < 2:
            raise ValueError("Fock dimension must be at least 2")
        if self.kraus_cutoff is None:
            object.__setattr__(self, "kraus_cutoff", self.dim)
        if self.kraus_cutoff < 1:
            raise ValueError("kraus_cutoff must be positive")

    @property
    def transmissivity(self) -> float:
        """Surviving energy fraction ``exp(-gamma_t)``."""
        return math.exp(-self.gamma_t)


def kraus_operators(params: ChannelParams) -> list[np.ndarray]:
    """Kraus operators ``M_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k``.

    ``eta = exp(-gamma_t)`` and ``eta^{n/2}`` is the damping factor
    ``exp(-gamma_t a^+a / 2)``.  At ``gamma_t = 0`` only the identity is
    returned.
    """
    dim = params.dim
    if params.gamma_t == 0.0:
        return [np.eye(dim, dtype=complex)]
    log_eta = -params.gamma_t
    log_loss = math.log(-math.expm1(-params.gamma_t))
    ops = []
    for k in range(min(params.kraus_cutoff, dim)):
        # <n-k| M_k |n> = sqrt(C(n,k) (1-eta)^k eta^(n-k)), in log space
        n = np.arange(k, dim)
        log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        op = np.zeros((dim, dim), dtype=complex)
        op[n - k, n] = np.exp(0.5 * (log_binom + k * log_loss + (n - k) * log_eta))
        ops.append(op)
    return ops


def kraus_completeness(params: ChannelParams) -> np.ndarray:
    """``sum_k M_k^+ M_k``; the identity on levels ``n < kraus_cutoff``."""
    return sum(op.conj().T @ op for op in kraus_operators(params))


def evolve(rho: DensityMatrix, params: ChannelParams) -> DensityMatrix:
    """Apply the loss channel, ``rho -> sum_k M_k rho M_k^+``."""
    if rho.dim != params.dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, channel has dim {params.dim}")
    if params.gamma_t == 0.0:
        return rho
    out = np.zeros_like(rho.elements)
    for op in kraus_operators(params):
        out += op @ rho.elements @ op.conj().T
    # symmetrize away rounding so downstream Hermitian solvers see exact symmetry
    return DensityMatrix(0.5 * (out + out.conj().T))


def evolve_to(rho: DensityMatrix, gamma_t: float) -> DensityMatrix:
    return evolve(rho, ChannelParams(gamma_t=gamma_t, dim=rho.dim))


def mean_photon(rho: DensityMatrix) -> float:
    """``Tr(rho a^+a)``."""
    return float(np.dot(np.arange(rho.dim), rho.elements.diagonal().real))
