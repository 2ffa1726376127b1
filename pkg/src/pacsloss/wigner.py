"""Wigner functions on phase-space grids.

Convention: ``beta = q + i p`` and the vacuum is ``(2/pi) exp(-2|beta|^2)``,
so every Wigner function lies in ``[-2/pi, 2/pi]``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from ._files import open_for_write
from .errors import GridTooSmall, OutOfGrid, TruncationTooSmall
from .fock import DensityMatrix, ladder_matrices, laguerre

WIGNER_BOUND = 2.0 / math.pi
NORM_TOL = 5e-3
MIN_QUADRATURE_POINTS = 64
DEFAULT_POINTS = 257
DEFAULT_HALF_WIDTH = 5.0

Source = Literal["parity-formula", "closed-form", "propagated"]


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Rectangular ``(q, p)`` lattice, endpoints included."""

    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int = DEFAULT_POINTS
    n_p: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.n_q < 2 or self.n_p < 2:
            raise ValueError("grid needs at least two points per axis")
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise ValueError("grid extent must be positive along both axes")

    @classmethod
    def centered(cls, center: complex = 0.0, half_width: float = DEFAULT_HALF_WIDTH,
                 n: int = DEFAULT_POINTS) -> PhaseSpaceGrid:
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width,
                   c.imag - half_width, c.imag + half_width, n, n)

    @classmethod
    def for_state(cls, alpha: complex, gamma_t: float = 0.0,
                  half_width: float = DEFAULT_HALF_WIDTH, n: int = DEFAULT_POINTS) -> PhaseSpaceGrid:
        """Square grid around the damped amplitude ``alpha exp(-gamma_t/2)``.

        The half width must be at least five phase-space units so the
        Gaussian envelope has decayed below ``exp(-50)`` at the edges.
        """
        if half_width < DEFAULT_HALF_WIDTH:
            raise GridTooSmall(f"half width {half_width} < {DEFAULT_HALF_WIDTH} phase-space units")
        return cls.centered(complex(alpha) * math.exp(-gamma_t / 2.0), half_width, n)

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def cell_area(self) -> float:
        return self.dq * self.dp

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Q, P)`` arrays of shape ``(n_q, n_p)``."""
        return np.meshgrid(self.q, self.p, indexing="ij")

    def trapezoid_weights(self) -> tuple[np.ndarray, np.ndarray]:
        wq = np.full(self.n_q, self.dq)
        wq[[0, -1]] *= 0.5
        wp = np.full(self.n_p, self.dp)
        wp[[0, -1]] *= 0.5
        return wq, wp

    def coarsened(self) -> PhaseSpaceGrid:
        """Every other point; same extent when ``n`` is odd."""
        return PhaseSpaceGrid(self.q_min, self.q_min + 2 * self.dq * ((self.n_q - 1) // 2),
                              self.p_min, self.p_min + 2 * self.dp * ((self.n_p - 1) // 2),
                              (self.n_q + 1) // 2, (self.n_p + 1) // 2)

    def require_quadrature(self):
        if min(self.n_q, self.n_p) < MIN_QUADRATURE_POINTS:
            raise GridTooSmall(
                f"quadrature needs >= {MIN_QUADRATURE_POINTS} points per axis, got {self.n_q}x{self.n_p}"
            )


@dataclass(frozen=True)
class WignerField:
    """Samples ``W(q_i, p_j)`` on a grid; ``values[i, j]`` pairs ``q[i]`` with ``p[j]``."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    source: Source

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_q, self.grid.n_p):
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.n_q}x{self.grid.n_p}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("Wigner values must be finite")
        if np.max(np.abs(vals)) > WIGNER_BOUND + 1e-9:
            raise ValueError(f"|W| exceeds 2/pi: max {np.max(np.abs(vals))!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def integral(self) -> float:
        wq, wp = self.grid.trapezoid_weights()
        return float(wq @ self.values @ wp)

    def normalization_error(self) -> float:
        return abs(self.integral() - 1.0)

    def check_normalized(self, tol: float = NORM_TOL) -> WignerField:
        err = self.normalization_error()
        if err > tol:
            raise GridTooSmall(f"field integrates to {self.integral():.6f}; grid misses part of the state")
        return self

    def mean(self) -> complex:
        """First moment ``<q> + i<p>`` of the quasiprobability."""
        wq, wp = self.grid.trapezoid_weights()
        total = wq @ self.values @ wp
        mq = (wq * self.grid.q) @ self.values @ wp / total
        mp = wq @ self.values @ (wp * self.grid.p) / total
        return complex(mq, mp)

    def min(self) -> tuple[float, complex]:
        idx = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.values[idx]), complex(self.grid.q[idx[0]], self.grid.p[idx[1]])

    def to_csv(self, path) -> None:
        write_field_csv(self, path)

    def to_gnuplot_matrix(self, path) -> None:
        write_field_gnuplot(self, path)


# -- closed forms -----------------------------------------------------------

def wigner_pacs_closed(alpha: complex, m: int, q, p):
    """Wigner function of the pure PACS ``a^{+m}|alpha>``.

    ``(-1)^m (2/pi) L_m(|2 beta - alpha|^2) exp(-2|beta - alpha|^2) / L_m(-|alpha|^2)``
    """
    beta = np.asarray(q, dtype=float) + 1j * np.asarray(p, dtype=float)
    alpha = complex(alpha)
    lag = laguerre(m, np.abs(2 * beta - alpha) ** 2)
    env = np.exp(-2.0 * np.abs(beta - alpha) ** 2)
    return (-1) ** m * WIGNER_BOUND * lag * env / laguerre(m, -abs(alpha) ** 2)


def wigner_spacs_closed(alpha: complex, q, p):
    """Single-photon-added coherent state,
    ``-2 L_1(|2q+2ip-alpha|^2) e^{-2|q+ip-alpha|^2} / (pi L_1(-|alpha|^2))``."""
    beta = np.asarray(q, dtype=float) + 1j * np.asarray(p, dtype=float)
    alpha = complex(alpha)
    return (-2.0 * laguerre(1, np.abs(2 * beta - alpha) ** 2)
            * np.exp(-2.0 * np.abs(beta - alpha) ** 2)
            / (math.pi * laguerre(1, -abs(alpha) ** 2)))


def wigner_tpacs_closed(alpha: complex, q, p):
    """Two-photon-added coherent state,
    ``2 L_2(|2q+2ip-alpha|^2) e^{-2|q+ip-alpha|^2} / (pi L_2(-|alpha|^2))``."""
    beta = np.asarray(q, dtype=float) + 1j * np.asarray(p, dtype=float)
    alpha = complex(alpha)
    return (2.0 * laguerre(2, np.abs(2 * beta - alpha) ** 2)
            * np.exp(-2.0 * np.abs(beta - alpha) ** 2)
            / (math.pi * laguerre(2, -abs(alpha) ** 2)))


def closed_form_field(alpha: complex, m: int, grid: PhaseSpaceGrid) -> WignerField:
    Q, P = grid.mesh()
    if m == 1:
        vals = wigner_spacs_closed(alpha, Q, P)
    elif m == 2:
        vals = wigner_tpacs_closed(alpha, Q, P)
    else:
        vals = wigner_pacs_closed(alpha, m, Q, P)
    return WignerField(grid, vals, "closed-form")


# -- from a density matrix --------------------------------------------------

def _check_support(rho: DensityMatrix, tol: float = 1e-8):
    # population parked in the top level signals a truncation that is too tight
    top = rho.elements[-1, -1].real
    if top > tol:
        raise TruncationTooSmall(f"population {top:.3e} in the top Fock level {rho.dim - 1}")


def _wigner_laguerre(rho: np.ndarray, Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    # (2/pi) sum_{n,m} rho_nm (-1)^n <m|D(2 beta)|n>, displacement elements via
    # <n+k|D(z)|n> = sqrt(n!/(n+k)!) z^k e^{-|z|^2/2} L_n^(k)(|z|^2)
    dim = rho.shape[0]
    z = 2.0 * (Q + 1j * P)
    x = np.abs(z) ** 2
    n_all = np.arange(dim)
    total = np.zeros(Q.shape, dtype=complex)
    zk = np.ones(Q.shape, dtype=complex)
    for k in range(dim):
        n = n_all[: dim - k]
        coeff = rho[n, n + k] * (-1.0) ** n * np.exp(0.5 * (gammaln(n + 1) - gammaln(n + k + 1)))
        if np.any(coeff != 0):
            # L_n^(k)(x) is real: accumulate real and imaginary coefficient sums separately
            parts = [c for c in (coeff.real, coeff.imag) if np.any(c != 0)] or [coeff.real]
            accs = [np.full(x.shape, c[0]) for c in parts]
            if n.size > 1:
                prev = np.ones_like(x)
                cur = 1.0 + k - x
                for acc, c in zip(accs, parts):
                    acc += c[1] * cur
                for j in range(1, n.size - 1):
                    prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
                    for acc, c in zip(accs, parts):
                        acc += c[j + 1] * cur
            if len(parts) == 2:
                acc = accs[0] + 1j * accs[1]
            elif np.any(coeff.imag != 0):
                acc = 1j * accs[0]
            else:
                acc = accs[0]
            total += (1.0 if k == 0 else 2.0) * zk * acc
        zk = zk * z
    return WIGNER_BOUND * np.exp(-0.5 * x) * total.real


def displacement_matrix(beta: complex, dim: int) -> np.ndarray:
    """``expm(beta a^+ - beta^* a)`` in a ``dim``-level truncation."""
    a, adag = ladder_matrices(dim)
    return expm(beta * adag - np.conj(beta) * a)


def displaced_parity_value(rho: DensityMatrix, beta: complex, work_dim: int | None = None,
                           tail_tol: float = 1e-8) -> float:
    """``(2/pi) sum_n (-1)^n <n| D^+(beta) rho D(beta) |n>`` at one point.

    ``rho`` is embedded in ``work_dim`` levels (default: room for the shift by
    ``|beta|``) and the displacement is a truncated matrix exponential.

    Raises
    ------
    TruncationTooSmall
        When the displaced state has more than ``tail_tol`` population in the
        upper quarter of the working space, where the truncated exponential
        is unreliable.
    """
    dim = rho.dim
    if work_dim is None:
        shift = abs(beta) ** 2
        work_dim = dim + math.ceil(shift + 12.0 * math.sqrt(shift + dim) + 16)
    big = np.zeros((work_dim, work_dim), dtype=complex)
    big[:dim, :dim] = rho.elements
    disp = displacement_matrix(beta, work_dim)
    shifted = disp.conj().T @ big @ disp
    pops = shifted.diagonal().real
    guard = work_dim - max(1, work_dim // 4)
    tail = float(np.sum(np.abs(pops[guard:])))
    if tail > tail_tol:
        raise TruncationTooSmall(f"displaced state leaks {tail:.3e} into the truncation edge")
    parity = (-1.0) ** np.arange(work_dim)
    return float(WIGNER_BOUND * np.dot(parity, pops))


def wigner_from_density(rho: DensityMatrix, grid: PhaseSpaceGrid,
                        method: Literal["laguerre", "expm"] = "laguerre") -> WignerField:
    """Evaluate the displaced-parity Wigner function of ``rho`` on ``grid``.

    ``method="laguerre"`` uses the exact matrix elements of the displacement
    operator, which only needs ``rho`` itself to fit the truncation.
    ``method="expm"`` displaces numerically point by point; it is slow and
    intended for small grids and cross-checks.
    """
    _check_support(rho)
    Q, P = grid.mesh()
    if method == "laguerre":
        vals = _wigner_laguerre(rho.elements, Q, P)
    elif method == "expm":
        vals = np.vectorize(lambda q, p: displaced_parity_value(rho, complex(q, p)))(Q, P)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WignerField(grid, vals, "parity-formula")


# -- phase-space propagation ------------------------------------------------

def _kernel_matrix(target: np.ndarray, source: np.ndarray, weights: np.ndarray,
                   shrink: float, var: float) -> np.ndarray:
    diff = target[:, None] - shrink * source[None, :]
    return np.exp(-0.5 * diff**2 / var) / math.sqrt(2 * math.pi * var) * weights[None, :]


def propagate_wigner(field0: WignerField, gamma_t: float,
                     target: PhaseSpaceGrid | None = None) -> WignerField:
    """Evolve a Wigner function through the loss channel in phase space.

    Damping contracts phase space by ``s = exp(-gamma_t/2)`` and the vacuum
    noise adds Gaussian spread of variance ``(1 - exp(-gamma_t))/4`` per
    quadrature, so

        W_t(q, p) = int K(q - s q') K(p - s p') W_0(q', p') dq' dp'

    with ``K`` that normalized Gaussian.  The kernel is separable; the
    integral is two matrix products with trapezoid weights on the source grid.

    Raises
    ------
    GridTooSmall
        If the source field does not vanish on its border (the grid misses
        part of the state) or the kernel is narrower than the grid spacing.
    """
    if gamma_t < 0:
        raise ValueError(f"gamma_t must be nonnegative, got {gamma_t}")
    src = field0.grid
    if gamma_t == 0.0 and (target is None or target == src):
        return field0
    src.require_quadrature()
    target = src if target is None else target

    vals = field0.values
    edge = max(np.abs(vals[[0, -1], :]).max(), np.abs(vals[:, [0, -1]]).max())
    if edge > 1e-9 * np.abs(vals).max():
        raise GridTooSmall(f"source field is {edge:.3e} on its border; widen the grid")
    shrink = math.exp(-gamma_t / 2.0)
    var = -math.expm1(-gamma_t) / 4.0
    # kernel width measured in source coordinates must span a few samples
    width = math.sqrt(var) / shrink
    if width < max(src.dq, src.dp):
        raise GridTooSmall(
            f"kernel width {width:.3g} below grid spacing {max(src.dq, src.dp):.3g} at gamma_t={gamma_t}"
        )
    wq, wp = src.trapezoid_weights()
    kq = _kernel_matrix(target.q, src.q, wq, shrink, var)
    kp = _kernel_matrix(target.p, src.p, wp, shrink, var)
    out = kq @ vals @ kp.T
    return WignerField(target, out, "propagated")


# -- cuts and diagnostics ---------------------------------------------------

def wigner_cut(field: WignerField, p: float = 0.0) -> np.ndarray:
    """Slice ``W(q, p)`` at fixed ``p``, linearly interpolated between rows.

    Returns an ``(n_q, 2)`` array of ``(q, W)`` pairs.
    """
    g = field.grid
    if not g.p_min - 1e-12 <= p <= g.p_max + 1e-12:
        raise OutOfGrid(f"p={p} outside [{g.p_min}, {g.p_max}]")
    pos = (p - g.p_min) / g.dp
    j = int(np.clip(np.floor(pos), 0, g.n_p - 2))
    frac = pos - j
    if abs(frac) < 1e-9:
        w = field.values[:, j].copy()
    elif abs(frac - 1.0) < 1e-9:
        w = field.values[:, j + 1].copy()
    else:
        w = (1.0 - frac) * field.values[:, j] + frac * field.values[:, j + 1]
    return np.column_stack([g.q, w])


def coherent_gaussian_distance(field: WignerField) -> float:
    """Sup-norm distance to the coherent-state Gaussian sharing the field's mean."""
    center = field.mean()
    Q, P = field.grid.mesh()
    gauss = WIGNER_BOUND * np.exp(-2.0 * ((Q - center.real) ** 2 + (P - center.imag) ** 2))
    return float(np.max(np.abs(field.values - gauss)))


# -- serialization ----------------------------------------------------------

def write_field_csv(field: WignerField, path) -> None:
    """Rows ``q,p,W`` with a header line, ``q`` varying slowest."""
    g = field.grid
    with open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "p", "W"])
        for i, q in enumerate(g.q):
            for j, p in enumerate(g.p):
                writer.writerow([f"{q:.10e}", f"{p:.10e}", f"{field.values[i, j]:.12e}"])


def write_field_gnuplot(field: WignerField, path) -> None:
    """gnuplot ``nonuniform matrix`` text.

    First row: ``n_q`` followed by the ``q`` coordinates.  Each further row:
    one ``p`` value followed by ``W(q_i, p)`` for every ``q_i``.
    """
    g = field.grid
    with open_for_write(path) as fh:
        fh.write(" ".join([str(g.n_q)] + [f"{q:.10e}" for q in g.q]) + "\n")
        for j, p in enumerate(g.p):
            fh.write(" ".join([f"{p:.10e}"] + [f"{w:.12e}" for w in field.values[:, j]]) + "\n")


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 0], data[:, 1], data[:, 2]


def read_field_gnuplot(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_field_gnuplot`: ``(q, p, values[i, j])``."""
    rows = np.loadtxt(path)
    q = rows[0, 1:]
    p = rows[1:, 0]
    return q, p, rows[1:, 1:].T
