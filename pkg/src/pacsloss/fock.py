"""Truncated Fock-space states, ladder operators and photon-added coherent states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import DimensionMismatch, TruncationTooSmall

TAIL_TOL = 1e-10
MIN_DIM = 16


def genlaguerre(n: int, k: float, x):
    """Generalized Laguerre polynomial ``L_n^{(k)}(x)`` by upward recurrence.

    Works elementwise on arrays.  Uses
    ``(j+1) L_{j+1} = (2j+1+k-x) L_j - (j+k) L_{j-1}``.
    """
    if n < 0:
        raise ValueError(f"Laguerre order must be nonnegative, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def laguerre(m: int, x):
    """Ordinary Laguerre polynomial ``L_m(x)``."""
    return genlaguerre(m, 0.0, x)


@dataclass(frozen=True)
class StateVector:
    """Pure state as Fock amplitudes ``|0>..|D-1>``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size < 2:
            raise ValueError("Fock dimension must be at least 2")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> StateVector:
        nrm = self.norm
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / nrm)

    def photon_distribution(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mean_photon(self) -> float:
        p = self.photon_distribution()
        return float(np.dot(np.arange(self.dim), p) / p.sum())


@dataclass(frozen=True)
class DensityMatrix:
    """Single-mode density matrix in a ``D``-level Fock truncation."""

    elements: np.ndarray

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        if rho.shape[0] < 2:
            raise ValueError("Fock dimension must be at least 2")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    @property
    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.elements, self.elements).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def populations(self) -> np.ndarray:
        return self.elements.diagonal().real.copy()


@dataclass(frozen=True)
class PacsSpec:
    """Photon-added coherent state ``a^{+m}|alpha>`` with a truncation.

    ``dim`` defaults to :func:`default_dim`.  Construction fails with
    :class:`TruncationTooSmall` when the photon-number tail beyond
    ``dim - 1`` exceeds ``1e-10``.
    """

    alpha: complex
    m: int = 1
    dim: int | None = field(default=None)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"photon-addition order must be a nonnegative integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.dim is None:
            object.__setattr__(self, "dim", default_dim(self.alpha, self.m))
        if self.dim < 2:
            raise ValueError("Fock dimension must be at least 2")
        tail = pacs_tail_mass(self.alpha, self.m, self.dim)
        if tail >= TAIL_TOL:
            raise TruncationTooSmall(
                f"PACS(alpha={self.alpha}, m={self.m}) loses {tail:.3e} beyond n={self.dim - 1}"
            )

    @property
    def norm_factor(self) -> float:
        """``m! L_m(-|alpha|^2)``, the squared norm of ``a^{+m}|alpha>``."""
        return math.factorial(self.m) * laguerre(self.m, -abs(self.alpha) ** 2)


def default_dim(alpha: complex, m: int = 0) -> int:
    """Truncation ``ceil(|a|^2 + m + 10 sqrt(|a|^2 + m + 1))``, never below 16."""
    n2 = abs(alpha) ** 2
    return max(MIN_DIM, math.ceil(n2 + m + 10.0 * math.sqrt(n2 + m + 1.0)))


def coherent_tail_mass(alpha: complex, dim: int) -> float:
    """Poisson probability of ``n >= dim`` for mean ``|alpha|^2``."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    return float(gammainc(dim, lam))


def _pacs_log_probs(alpha: complex, m: int, n: np.ndarray) -> np.ndarray:
    # log P_n for n >= m; the m! L_m(-|a|^2) normalization is applied here
    lam = abs(alpha) ** 2
    k = n - m
    log_norm = math.log(math.factorial(m) * laguerre(m, -lam))
    return -lam + 2 * k * math.log(abs(alpha)) + gammaln(n + 1) - 2 * gammaln(k + 1) - log_norm


def pacs_tail_mass(alpha: complex, m: int, dim: int) -> float:
    """Photon-number probability of a PACS beyond ``dim - 1``.

    The distribution is the Poisson one shifted by ``m`` and reweighted by
    ``n!/(n-m)!``; the tail is summed directly in log space.
    """
    if m == 0:
        return coherent_tail_mass(alpha, dim)
    if abs(alpha) ** 2 < 1e-300:
        # the shifted-Poisson weights beyond n = m are below double range
        return 0.0 if m < dim else 1.0
    start = max(dim, m)
    n = np.arange(start, start + 400 + 4 * dim, dtype=float)
    return float(np.exp(_pacs_log_probs(alpha, m, n)).sum())


def ladder_matrices(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowering and raising operators on ``|0>..|dim-1>``."""
    if dim < 2:
        raise ValueError("Fock dimension must be at least 2")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    # exact (unrenormalized) coefficients e^{-|a|^2/2} a^n / sqrt(n!)
    n = np.arange(dim)
    amps = np.zeros(dim, dtype=complex)
    r = abs(alpha)
    if r == 0.0:
        amps[0] = 1.0
        return amps
    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(alpha: complex, dim: int | None = None) -> StateVector:
    """Coherent state ``|alpha>``, renormalized after truncation.

    Raises
    ------
    TruncationTooSmall
        If the Poisson tail beyond ``dim - 1`` is at least ``1e-10``.
    """
    if dim is None:
        dim = default_dim(alpha)
    tail = coherent_tail_mass(alpha, dim)
    if tail >= TAIL_TOL:
        raise TruncationTooSmall(f"|alpha={alpha}> loses {tail:.3e} beyond n={dim - 1}")
    return StateVector(_coherent_amplitudes(alpha, dim)).normalize()


def pacs_norm_numeric(spec: PacsSpec) -> float:
    """Squared norm of ``a^{+m}|alpha>`` obtained by applying the raising matrix."""
    _, adag = ladder_matrices(spec.dim)
    vec = _coherent_amplitudes(spec.alpha, spec.dim)
    for _ in range(spec.m):
        vec = adag @ vec
    return float(np.vdot(vec, vec).real)


def build_pacs(spec: PacsSpec, check_norm: bool = True) -> StateVector:
    """Normalized ``a^{+m}|alpha> / sqrt(m! L_m(-|alpha|^2))``.

    The raising matrix is applied to the untruncated coherent amplitudes and
    the resulting norm is compared with the Laguerre expression; a relative
    mismatch above ``1e-8`` means the truncation is inconsistent.
    """
    _, adag = ladder_matrices(spec.dim)
    vec = _coherent_amplitudes(spec.alpha, spec.dim)
    for _ in range(spec.m):
        vec = adag @ vec
    numeric = float(np.vdot(vec, vec).real)
    analytic = spec.norm_factor
    if check_norm and abs(numeric - analytic) > 1e-8 * analytic:
        raise TruncationTooSmall(
            f"numeric PACS norm {numeric!r} disagrees with m!L_m(-|a|^2)={analytic!r}"
        )
    return StateVector(vec / math.sqrt(numeric))


def fock_state(n: int, dim: int) -> StateVector:
    if not 0 <= n < dim:
        raise ValueError(f"|{n}> not representable with dim={dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return StateVector(amps)


def density_from_state(psi: StateVector) -> DensityMatrix:
    """Projector ``|psi><psi|``."""
    return DensityMatrix(np.outer(psi.amplitudes, psi.amplitudes.conj()))


def expectation(rho: DensityMatrix, op: np.ndarray) -> complex:
    if op.shape != rho.elements.shape:
        raise DimensionMismatch(f"operator {op.shape} vs state {rho.elements.shape}")
    return complex(np.einsum("ij,ji->", rho.elements, op))
