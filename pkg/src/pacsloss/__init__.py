"""Nonclassicality of photon-added coherent states in a photon-loss channel.

Two measures are computed for ``a^{+m}|alpha>`` after loss ``gamma_t``: the
total negative Wigner probability (P_NW) and the entanglement potential
(log-negativity behind a 50:50 beam splitter with vacuum).
"""

__version__ = "0.1.0"

from .channel import ChannelParams, evolve, evolve_to, kraus_operators, mean_photon
from .entanglement import (EntanglementReport, TwoModeDensityMatrix, beam_splitter_unitary,
                           entanglement_potential, ep_at, ep_sweep, log_negativity, partial_transpose)
from .errors import (DimensionMismatch, GridTooSmall, NoThresholdInRange, OutOfGrid,
                     PacsLossError, TruncationTooSmall)
from .fock import (DensityMatrix, PacsSpec, StateVector, build_pacs, coherent_state,
                   density_from_state, ladder_matrices, laguerre)
from .negativity import (GridPolicy, NegativityResult, crossover_time, pnw_at, pnw_sweep, pnw_vs_alpha,
                         total_negative_probability, vanishing_threshold)
from .wigner import (PhaseSpaceGrid, WignerField, propagate_wigner, wigner_cut,
                     wigner_from_density, wigner_spacs_closed, wigner_tpacs_closed)

__all__ = [
    "ChannelParams", "DensityMatrix", "DimensionMismatch", "EntanglementReport", "GridPolicy",
    "GridTooSmall", "NegativityResult", "NoThresholdInRange", "OutOfGrid", "PacsLossError",
    "PacsSpec", "PhaseSpaceGrid", "StateVector", "TruncationTooSmall", "TwoModeDensityMatrix",
    "WignerField", "beam_splitter_unitary", "build_pacs", "coherent_state", "density_from_state",
    "crossover_time", "entanglement_potential", "ep_at", "ep_sweep", "evolve", "evolve_to", "kraus_operators", "ladder_matrices",
    "laguerre", "log_negativity", "mean_photon", "partial_transpose", "pnw_at", "pnw_sweep", "pnw_vs_alpha",
    "propagate_wigner", "total_negative_probability", "vanishing_threshold", "wigner_cut",
    "wigner_from_density", "wigner_spacs_closed", "wigner_tpacs_closed",
]
