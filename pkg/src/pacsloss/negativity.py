"""Total negative Wigner probability and its decay under photon loss."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .channel import evolve_to
from .errors import NoThresholdInRange, PacsLossError
from .fock import PacsSpec, build_pacs, density_from_state
from .wigner import (DEFAULT_HALF_WIDTH, PhaseSpaceGrid, WignerField, closed_form_field,
                     propagate_wigner, wigner_from_density)

CONVERGENCE_TOL = 1e-4
# negativity below this is treated as invisible on plots of P_NW
INVISIBLE = 1e-4
# threshold search cutoff; small enough that the quadratic onset near the
# exact vanishing point costs less than 0.005 in decay time
THRESHOLD_EPS = 1e-5
MONOTONE_SLACK = 1e-4
# samples above -ROUNDOFF are evaluation noise, not negativity
ROUNDOFF = 1e-14


class NotMonotone(PacsLossError):
    """A sweep that should decay grew by more than the numerical slack."""


@dataclass(frozen=True)
class GridPolicy:
    """How grids are laid out for P_NW evaluation.

    ``n`` is odd so that dropping every other sample keeps the extent for the
    half-resolution convergence check.
    """

    n: int = 601
    half_width: float = DEFAULT_HALF_WIDTH
    route: str = "density"

    def grid(self, alpha: complex, gamma_t: float = 0.0) -> PhaseSpaceGrid:
        return PhaseSpaceGrid.for_state(alpha, gamma_t, self.half_width, self.n)


@dataclass(frozen=True)
class NegativityResult:
    p_nw: float
    negative_cell_count: int
    min_value: float
    min_location: complex
    grid_spacing: float
    converged: bool
    coarse_p_nw: float = math.nan

    def __post_init__(self):
        if self.p_nw < 0:
            raise ValueError(f"P_NW must be nonnegative, got {self.p_nw}")
        if self.p_nw > 1:
            raise ValueError(f"P_NW={self.p_nw} above 1; the field is not a normalized Wigner function")
        if (self.p_nw == 0) != (self.negative_cell_count == 0):
            raise ValueError("P_NW vanishes exactly when there are no negative cells")


def _negative_mass(values: np.ndarray, area: float) -> tuple[float, int]:
    neg = values[values < -ROUNDOFF]
    return abs(float(neg.sum())) * area, int(neg.size)


def total_negative_probability(field: WignerField) -> NegativityResult:
    """``|integral of W over the region where W < 0|``.

    The region is the set of grid cells with a sample below ``-1e-14``
    (smaller magnitudes are roundoff); each counts with the full cell area.  The same sum on every other sample gives the
    half-resolution value, and the result is flagged converged when the two
    agree within ``1e-4``.

    Raises :class:`GridTooSmall` if the field does not integrate to one
    within ``5e-3``.
    """
    field.grid.require_quadrature()
    field.check_normalized()
    g = field.grid
    p_nw, count = _negative_mass(field.values, g.cell_area)
    coarse, _ = _negative_mass(field.values[::2, ::2], 4.0 * g.cell_area)
    min_value, min_loc = field.min()
    return NegativityResult(
        p_nw=p_nw,
        negative_cell_count=count,
        min_value=min_value,
        min_location=min_loc,
        grid_spacing=max(g.dq, g.dp),
        converged=abs(p_nw - coarse) <= CONVERGENCE_TOL,
        coarse_p_nw=coarse,
    )


def evolved_field(spec: PacsSpec, gamma_t: float, policy: GridPolicy | None = None) -> WignerField:
    """Wigner function of the PACS after loss ``gamma_t``.

    ``policy.route`` picks the evolution path: ``"density"`` runs the Kraus
    channel and evaluates the parity formula; ``"propagated"`` pushes the
    closed-form initial Wigner function through the phase-space kernel.
    """
    policy = policy or GridPolicy()
    target = policy.grid(spec.alpha, gamma_t)
    if policy.route == "density":
        rho = evolve_to(density_from_state(build_pacs(spec)), gamma_t)
        return wigner_from_density(rho, target)
    if policy.route == "propagated":
        field0 = closed_form_field(spec.alpha, spec.m, policy.grid(spec.alpha))
        return propagate_wigner(field0, gamma_t, target)
    raise ValueError(f"unknown route {policy.route!r}")


def pnw_at(spec: PacsSpec, gamma_t: float, policy: GridPolicy | None = None) -> NegativityResult:
    return total_negative_probability(evolved_field(spec, gamma_t, policy))


def check_nonincreasing(values: Sequence[float], slack: float, label: str = "sequence") -> None:
    for i in range(1, len(values)):
        if values[i] > values[i - 1] + slack:
            raise NotMonotone(f"{label} grows from {values[i - 1]!r} to {values[i]!r} at index {i}")


def _check_sorted(gamma_t_list: Sequence[float]) -> list[float]:
    ts = [float(t) for t in gamma_t_list]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("gamma_t values must be sorted ascending")
    if ts and ts[0] < 0:
        raise ValueError("gamma_t values must be nonnegative")
    return ts


def pnw_sweep(spec: PacsSpec, gamma_t_list: Sequence[float], policy: GridPolicy | None = None,
              check_monotone: bool = True) -> list[tuple[float, NegativityResult]]:
    """P_NW at each decay time, in input order.

    Raises :class:`NotMonotone` if the sweep grows by more than ``1e-4``
    between consecutive points.
    """
    ts = _check_sorted(gamma_t_list)
    results = pmap(lambda t: pnw_at(spec, t, policy), ts)
    if check_monotone:
        check_nonincreasing([r.p_nw for r in results], MONOTONE_SLACK, f"P_NW sweep for {spec}")
    return list(zip(ts, results))


def vanishing_threshold(spec: PacsSpec, epsilon: float = THRESHOLD_EPS,
                        bracket: tuple[float, float] = (0.0, 3.0), tol: float = 0.005,
                        policy: GridPolicy | None = None) -> float:
    """Smallest decay time with ``P_NW < epsilon``, by bisection.

    Returns ``bracket[0]`` when the state starts below ``epsilon`` (coherent
    states).  Assumes P_NW decays monotonically inside the bracket.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lo, hi = map(float, bracket)
    if pnw_at(spec, lo, policy).p_nw < epsilon:
        return lo
    if pnw_at(spec, hi, policy).p_nw >= epsilon:
        raise NoThresholdInRange(f"P_NW still >= {epsilon} at gamma_t={hi} for {spec}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pnw_at(spec, mid, policy).p_nw < epsilon:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def pnw_vs_alpha(m: int, alpha_list: Sequence[float],
                 policy: GridPolicy | None = None) -> list[tuple[float, NegativityResult]]:
    """P_NW of pure PACS of order ``m`` for each amplitude."""
    if m not in (1, 2):
        raise ValueError(f"m must be 1 or 2, got {m}")
    alphas = [complex(a) for a in alpha_list]
    results = pmap(lambda a: pnw_at(PacsSpec(a, m), 0.0, policy), alphas)
    return [(abs(a), r) for a, r in zip(alphas, results)]


def crossover_time(alpha: complex, bracket: tuple[float, float] = (0.0, 0.6),
                   tol: float = 1e-3, policy: GridPolicy | None = None) -> float:
    """Decay time where TPACS P_NW drops below SPACS P_NW.

    Requires TPACS ahead at ``bracket[0]`` and behind at ``bracket[1]``.
    """
    spacs, tpacs = PacsSpec(alpha, 1), PacsSpec(alpha, 2)

    def gap(t):
        return pnw_at(tpacs, t, policy).p_nw - pnw_at(spacs, t, policy).p_nw

    lo, hi = map(float, bracket)
    if not (gap(lo) > 0 > gap(hi)):
        raise NoThresholdInRange(f"TPACS/SPACS P_NW do not cross inside {bracket} for alpha={alpha}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
