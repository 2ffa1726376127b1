"""Entanglement potential: log-negativity after a 50:50 beam splitter with vacuum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from ._parallel import pmap
from .channel import evolve_to
from .errors import TruncationTooSmall
from .fock import DensityMatrix, PacsSpec, build_pacs, density_from_state
from .negativity import _check_sorted, check_nonincreasing

EP_MONOTONE_SLACK = 1e-6
TRUNCATION_TOL = 1e-8


@dataclass(frozen=True)
class TwoModeDensityMatrix:
    """State on ``|n>_a |m>_b``; flat index ``n * dim_per_mode + m``."""

    elements: np.ndarray
    dim_per_mode: int

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        size = self.dim_per_mode**2
        if rho.shape != (size, size):
            raise ValueError(f"expected {size}x{size} elements, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.elements + self.elements.conj().T))[0])

    def tensor(self) -> np.ndarray:
        """Elements as ``[n, m, n', m']``."""
        d = self.dim_per_mode
        return self.elements.reshape(d, d, d, d)

    @classmethod
    def product(cls, rho_a: np.ndarray, rho_b: np.ndarray) -> TwoModeDensityMatrix:
        return cls(np.kron(rho_a, rho_b), rho_a.shape[0])


@dataclass(frozen=True)
class EntanglementReport:
    log_negativity: float
    trace_norm: float
    truncation_error: float

    def to_dict(self) -> dict:
        return {"log_negativity": self.log_negativity, "trace_norm": self.trace_norm,
                "truncation_error": self.truncation_error}


def _bs_block(total: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    # basis |n, total-n> restricted to both occupations below dim
    n = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
    size = n.size
    gen = np.zeros((size, size), dtype=complex)
    # a^+ b |n, N-n> = sqrt((n+1)(N-n)) |n+1, N-n-1>, and its adjoint
    for i in range(size - 1):
        amp = math.sqrt((n[i] + 1) * (total - n[i]))
        gen[i + 1, i] = amp
        gen[i, i + 1] = amp
    block = expm(1j * math.pi / 4 * gen)
    return n * dim + (total - n), block


@lru_cache(maxsize=8)
def _beam_splitter_cached(dim: int) -> np.ndarray:
    u = np.zeros((dim * dim, dim * dim), dtype=complex)
    for total in range(2 * dim - 1):
        idx, block = _bs_block(total, dim)
        u[np.ix_(idx, idx)] = block
    u.setflags(write=False)
    return u


def beam_splitter_unitary(dim: int) -> np.ndarray:
    """``exp(i pi/4 (a^+ b + a b^+))`` on two ``dim``-level modes.

    The generator conserves total photon number, so it is exponentiated one
    number block at a time.  Blocks with total ``<= dim - 1`` are exact; the
    higher ones are cut by the truncation.
    """
    if dim < 2:
        raise ValueError("Fock dimension must be at least 2")
    return _beam_splitter_cached(dim).copy()


def split_with_vacuum(rho: DensityMatrix) -> TwoModeDensityMatrix:
    """``U (rho x |0><0|) U^+`` for the 50:50 splitter.

    Only the columns ``|n, 0>`` of ``U`` are needed, and those lie in exact
    number blocks.
    """
    d = rho.dim
    cols = _beam_splitter_cached(d)[:, np.arange(d) * d]
    out = cols @ rho.elements @ cols.conj().T
    return TwoModeDensityMatrix(0.5 * (out + out.conj().T), d)


def partial_transpose(rho: TwoModeDensityMatrix) -> np.ndarray:
    """Transpose on mode ``b``: ``[(n,m),(n',m')] -> [(n,m'),(n',m)]``."""
    d = rho.dim_per_mode
    return rho.tensor().transpose(0, 3, 2, 1).reshape(d * d, d * d)


def trace_norm(mat: np.ndarray) -> float:
    """Sum of singular values; Hermitian input goes through ``eigvalsh``."""
    if np.allclose(mat, mat.conj().T, atol=1e-13, rtol=0):
        return float(np.abs(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))).sum())
    return float(np.linalg.svd(mat, compute_uv=False).sum())


def log_negativity(rho: TwoModeDensityMatrix) -> EntanglementReport:
    """``log2 ||rho^T_b||_1``, floored at zero."""
    tn = trace_norm(partial_transpose(rho))
    return EntanglementReport(
        log_negativity=math.log2(tn) if tn > 1.0 else 0.0,
        trace_norm=tn,
        truncation_error=abs(1.0 - rho.trace),
    )


def entanglement_potential(rho: DensityMatrix) -> EntanglementReport:
    """Log-negativity of ``rho`` split with vacuum on a 50:50 beam splitter.

    Raises
    ------
    TruncationTooSmall
        If more than ``1e-8`` of the state sits in the top Fock level or the
        two-mode output has lost that much trace.
    """
    top = rho.elements[-1, -1].real
    if top > TRUNCATION_TOL:
        raise TruncationTooSmall(f"population {top:.3e} in top Fock level {rho.dim - 1}")
    report = log_negativity(split_with_vacuum(rho))
    if report.truncation_error > TRUNCATION_TOL + abs(1.0 - rho.trace):
        raise TruncationTooSmall(f"two-mode output lost {report.truncation_error:.3e} of its trace")
    return report


def ep_at(spec: PacsSpec, gamma_t: float, dim: int | None = None) -> EntanglementReport:
    if dim is not None and dim != spec.dim:
        spec = PacsSpec(spec.alpha, spec.m, dim)
    rho = density_from_state(build_pacs(spec))
    return entanglement_potential(evolve_to(rho, gamma_t))


def ep_sweep(spec: PacsSpec, gamma_t_list: Sequence[float],
             check_monotone: bool = True) -> list[tuple[float, EntanglementReport]]:
    """Entanglement potential along sorted decay times."""
    ts = _check_sorted(gamma_t_list)
    results = pmap(lambda t: ep_at(spec, t), ts)
    if check_monotone:
        check_nonincreasing([r.log_negativity for r in results], EP_MONOTONE_SLACK,
                            f"EP sweep for {spec}")
    return list(zip(ts, results))
