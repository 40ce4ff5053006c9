"""End-to-end solve: lattice sums -> moments -> order table."""

from dataclasses import dataclass

import numpy as np

from .grating import OrderTable, energy_balance, order_table
from .lattice import GratingConfig, LatticeSums, lattice_sums, sigma_matrix
from .scatter import DipoleMoments, ScatteringMatrix, incident_coeffs, solve_moments


@dataclass(frozen=True)
class Solution:
    cfg: GratingConfig
    smat: ScatteringMatrix
    sums: LatticeSums
    sigma: np.ndarray
    incident: np.ndarray
    moments: DipoleMoments
    table: OrderTable

    @property
    def deficit(self):
        return energy_balance(self.table)


def solve(cfg, smat, accel=None, sums=None):
    """Solve the array problem for unit plane-wave incidence from above.

    ``smat`` is zero-padded to ``cfg.n_multipole`` when it has fewer
    channels; it may not have more.
    """
    if smat.n_multipole < cfg.n_multipole:
        smat = smat.embed(cfg.n_multipole)
    elif smat.n_multipole > cfg.n_multipole:
        raise ValueError(
            f"S has n_multipole={smat.n_multipole} but the scene truncates at {cfg.n_multipole}"
        )
    sums = sums or lattice_sums(cfg, accel=accel)
    sigma = sigma_matrix(cfg, sums)
    a = incident_coeffs(cfg, "down")
    moments = solve_moments(smat, sigma, a)
    return Solution(cfg, smat, sums, sigma, a, moments, order_table(cfg, moments))
