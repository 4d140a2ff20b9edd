"""The reference measure on a Hanoi attractor, lumped onto mesh nodes.

The measure splits the unit mass evenly between the cell limit set and the
union of connecting segments.  The cell half is self-similar: every n-cell
carries mass ``(1/2) 3**-n``, shared equally by its three corners.  The
segment half weights a level-k segment by ``beta**(k-1)`` times its length,
normalized by twice the total weighted length

    normalizer = sum_k 3**k beta**(k-1) d_k = 3 alpha / (1 - q),
    q = 3 beta (1 - alpha) / 2,

which converges exactly when ``beta`` stays below ``(2 / (3 (1-alpha)))**2``.
Each segment's mass is spread uniformly over its ``subdiv`` sub-intervals,
and each sub-interval contributes half to each of its two nodes, so segment
endpoint corners accumulate both cell and segment mass.

The infinite-level normalizer is used on every finite mesh, which keeps the
measure consistent across levels; a level-n mesh therefore carries total
mass ``1/2 + (1/2)(1 - q**n)``, slightly below one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Mesh, check_alpha


def beta_bound(alpha: float) -> float:
    """Supremum of admissible segment-weight ratios for a given alpha."""
    check_alpha(alpha)
    return (2.0 / (3.0 * (1.0 - alpha))) ** 2


def validate_beta(alpha: float, beta: float) -> float:
    """Check 0 < beta < (2/(3(1-alpha)))**2, naming the bound on failure."""
    bound = beta_bound(alpha)
    beta = float(beta)
    if not 0.0 < beta < bound:
        raise ValueError(
            f"beta must lie in the open interval (0, {bound:.6f}) "
            f"for alpha={alpha}; got {beta!r}"
        )
    return beta


def default_beta(alpha: float) -> float:
    """Default measure parameter: half the admissible bound."""
    return 0.5 * beta_bound(alpha)


def geometric_ratio(alpha: float, beta: float) -> float:
    """Ratio q = 3 beta (1-alpha)/2 of the per-level segment mass series."""
    return 1.5 * beta * (1.0 - alpha)


def continuous_normalizer(alpha: float, beta: float) -> float:
    """Total weighted segment length, summed over all levels in closed form."""
    validate_beta(alpha, beta)
    q = geometric_ratio(alpha, beta)
    return 3.0 * alpha / (1.0 - q)


@dataclass(eq=False)
class MassVector:
    """Diagonal lumped realization of the measure on mesh nodes."""

    mesh: Mesh
    beta: float
    masses: np.ndarray
    discrete_total: float
    continuous_total: float
    normalizer: float

    @property
    def total(self) -> float:
        return self.discrete_total + self.continuous_total


def assemble_mass(mesh: Mesh, beta: float) -> MassVector:
    """Lump the measure onto the nodes of a mesh."""
    alpha = mesh.alpha
    validate_beta(alpha, beta)
    n, M = mesh.level, mesh.subdiv

    masses = np.zeros(mesh.n_nodes)
    corner_mass = 3.0 ** (-n) / 6.0
    masses[: mesh.n_corners] = corner_mass
    discrete_total = mesh.n_corners * corner_mass

    mu = continuous_normalizer(alpha, beta)
    continuous_total = 0.0
    for seg in mesh.segments:
        m_seg = beta ** (seg.level - 1) * seg.length / (2.0 * mu)
        continuous_total += m_seg
        share = m_seg / M
        masses[seg.a] += 0.5 * share
        masses[seg.b] += 0.5 * share
        for vid in seg.interior:
            masses[vid] += share

    return MassVector(
        mesh=mesh,
        beta=beta,
        masses=masses,
        discrete_total=discrete_total,
        continuous_total=continuous_total,
        normalizer=mu,
    )


def dump_mass(mass: MassVector, csv_path, json_path) -> None:
    """Write per-node masses as CSV plus a JSON parameter header."""
    import json as _json

    with open(csv_path, "w") as fh:
        fh.write("id,mass\n")
        for vid, m in enumerate(mass.masses):
            fh.write(f"{vid},{float(m)!r}\n")
    header = {
        "alpha": mass.mesh.alpha,
        "beta": mass.beta,
        "normalizer": mass.normalizer,
        "discrete_total": mass.discrete_total,
        "continuous_total": mass.continuous_total,
    }
    with open(json_path, "w") as fh:
        _json.dump(header, fh, indent=1)
        fh.write("\n")
