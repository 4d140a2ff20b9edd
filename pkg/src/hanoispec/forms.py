"""Renormalized Dirichlet energies on Hanoi meshes and network reductions.

The level-n energy combines a discrete part (unit-conductance edges inside
every n-cell) with a continuous part (one-dimensional Dirichlet integrals
along the connecting segments, taken in the unit chord parameter of each
segment).  Rescaling the discrete part by ``1/rho_d[n]`` and the level-k
segment part by ``1/rho_c[k]`` makes the energy invariant under harmonic
extension, which is the property everything downstream relies on.

With ``d_k`` the level-k segment length, the per-step ratios are

    r_d[k] = 3 / (5 + 3 d_k)        r_c[k] = 3 d_k / (5 + 3 d_k)

and the cumulative factors ``rho_d[k] = prod(r_d[1..k])``,
``rho_c[k] = rho_d[k-1] * r_c[k]``.  They satisfy (5/3) r_d[k] + r_c[k] = 1.

On a mesh whose segments carry ``subdiv`` sub-edges, a sub-edge of a level-k
segment gets conductance ``subdiv / rho_c[k]``: for piecewise-linear
functions the sub-edge sum then reproduces the unit-parameter integral
exactly, so the invariance holds to machine precision instead of up to a
discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import splu, spsolve

from .geometry import Mesh, cell_ratio, check_alpha


@dataclass(frozen=True, eq=False)
class RenormFactors:
    """Per-level renormalization data for a fixed alpha.

    All arrays are indexed by level; entry 0 holds the conventional seeds
    (``lengths[0] = 0``, ``rho_d[0] = 1``) or NaN where a level-0 value has
    no meaning (``r_d``, ``r_c``, ``rho_c``).
    """

    alpha: float
    lengths: np.ndarray  # lengths[k] = alpha * ((1-alpha)/2)**(k-1), k >= 1
    r_d: np.ndarray      # per-step discrete ratio 3/(5+3 d_k)
    r_c: np.ndarray      # per-step segment ratio 3 d_k/(5+3 d_k)
    rho_d: np.ndarray    # cumulative discrete factor, rho_d[0] = 1
    rho_c: np.ndarray    # cumulative segment factor rho_d[k-1]*r_c[k]

    @property
    def n_max(self) -> int:
        return len(self.lengths) - 1


def renorm_factors(alpha: float, n_max: int) -> RenormFactors:
    """Compute all renormalization sequences through level ``n_max``."""
    alpha = check_alpha(alpha)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1; got {n_max}")
    k = np.arange(1, n_max + 1)
    lengths = np.empty(n_max + 1)
    lengths[0] = 0.0
    lengths[1:] = alpha * cell_ratio(alpha) ** (k - 1)

    r_d = np.full(n_max + 1, np.nan)
    r_c = np.full(n_max + 1, np.nan)
    r_d[1:] = 3.0 / (5.0 + 3.0 * lengths[1:])
    r_c[1:] = 3.0 * lengths[1:] / (5.0 + 3.0 * lengths[1:])

    rho_d = np.empty(n_max + 1)
    rho_d[0] = 1.0
    rho_d[1:] = np.cumprod(r_d[1:])
    rho_c = np.full(n_max + 1, np.nan)
    rho_c[1:] = rho_d[:-1] * r_c[1:]

    return RenormFactors(alpha, lengths, r_d, r_c, rho_d, rho_c)


@dataclass(eq=False)
class EnergyForm:
    """Sparse positive-semidefinite stiffness operator on a mesh.

    ``matrix`` is the weighted graph Laplacian of the conductance network;
    the quadratic form is ``energy(u) = u @ matrix @ u``.  Immutable by
    convention after assembly.
    """

    mesh: Mesh
    matrix: csr_matrix
    factors: RenormFactors
    renormalized: bool = True

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def boundary_ids(self) -> tuple[int, int, int]:
        return self.mesh.boundary_ids

    def energy(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(u @ (self.matrix @ u))

    def conductance_edges(self):
        """Iterate (a, b, conductance) with a < b, in assembly order."""
        coo = (-self.matrix).tocoo()
        for a, b, c in zip(coo.row, coo.col, coo.data):
            if a < b:
                yield int(a), int(b), float(c)


def assemble_energy(
    mesh: Mesh, factors: RenormFactors, renormalized: bool = True
) -> EnergyForm:
    """Assemble the level-n energy on a mesh.

    With ``renormalized=True`` (default) discrete edges get conductance
    ``1/rho_d[n]`` and each sub-edge of a level-k segment ``subdiv/rho_c[k]``.
    With ``renormalized=False`` the raw energy is assembled instead:
    conductance 1 on discrete edges and ``subdiv/d_k`` on sub-edges, i.e.
    the one-dimensional Dirichlet integral in arc length.
    """
    if factors.alpha != mesh.alpha:
        raise ValueError("factors were computed for a different alpha")
    if mesh.level > 0 and factors.n_max < mesh.level:
        raise ValueError(
            f"factors cover levels <= {factors.n_max}, mesh has level {mesh.level}"
        )
    n, M = mesh.level, mesh.subdiv

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def add_edge(a: int, b: int, c: float) -> None:
        rows.extend((a, b, a, b))
        cols.extend((b, a, a, b))
        vals.extend((-c, -c, c, c))

    c_disc = 1.0 / factors.rho_d[n] if renormalized else 1.0
    for a, b, _ in mesh.discrete_edges:
        add_edge(a, b, c_disc)

    for seg in mesh.segments:
        if renormalized:
            c_seg = M / factors.rho_c[seg.level]
        else:
            c_seg = M / seg.length
        chain = mesh.segment_chain(seg)
        for a, b in zip(chain[:-1], chain[1:]):
            add_edge(a, b, c_seg)

    K = coo_matrix(
        (vals, (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()
    return EnergyForm(mesh=mesh, matrix=K, factors=factors, renormalized=renormalized)


def _corner_extension(u0: np.ndarray, level: int, lengths: np.ndarray) -> np.ndarray:
    """Values of the harmonic extension on all cell corners, in id order.

    One step refines every cell into its three children; the new corner
    opposite the pair (i, j) weights the parent values with coefficients
    (2+3d)/(5+3d), 2/(5+3d), 1/(5+3d), where d is the length of the
    segments created by that step.
    """
    vals = np.asarray(u0, dtype=float).reshape(1, 3)
    for m in range(level):
        d = lengths[m + 1]
        den = 5.0 + 3.0 * d
        cx = (2.0 + 3.0 * d) / den
        cy = 2.0 / den
        cz = 1.0 / den
        nxt = np.empty((vals.shape[0], 3, 3))
        for i in range(3):
            for j in range(3):
                if i == j:
                    nxt[:, i, j] = vals[:, i]
                else:
                    k = 3 - i - j
                    nxt[:, i, j] = cx * vals[:, i] + cy * vals[:, j] + cz * vals[:, k]
        vals = nxt.reshape(-1, 3)
    return vals.ravel()


def harmonic_extension(
    u0,
    mesh: Mesh,
    factors: RenormFactors,
    method: str = "closed-form",
    form: EnergyForm | None = None,
) -> np.ndarray:
    """Extend boundary values on the three outer corners to the whole mesh.

    ``method="closed-form"`` applies the per-level coefficient recursion to
    the cell corners and interpolates linearly along segments;
    ``method="solve"`` minimizes the assembled energy subject to the
    boundary data through a sparse direct solve.  The two agree to solver
    precision.  A level-0 mesh returns the boundary data unchanged.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (3,):
        raise ValueError("u0 must hold exactly the three boundary values")

    if method == "closed-form":
        out = np.empty(mesh.n_nodes)
        out[: mesh.n_corners] = _corner_extension(u0, mesh.level, factors.lengths)
        M = mesh.subdiv
        for seg in mesh.segments:
            va, vb = out[seg.a], out[seg.b]
            for s, vid in enumerate(seg.interior, start=1):
                out[vid] = va + (s / M) * (vb - va)
        return out

    if method == "solve":
        if form is None:
            form = assemble_energy(mesh, factors)
        K = form.matrix
        b_ids = np.array(mesh.boundary_ids)
        free = np.setdiff1d(np.arange(mesh.n_nodes), b_ids)
        out = np.empty(mesh.n_nodes)
        out[b_ids] = u0
        if free.size:
            K_ff = K[free][:, free].tocsc()
            rhs = -K[free][:, b_ids] @ u0
            out[free] = spsolve(K_ff, rhs)
        return out

    raise ValueError(f"unknown method {method!r}")


def trace_to_boundary(form: EnergyForm, keep) -> np.ndarray:
    """Schur complement of the stiffness matrix onto the ``keep`` nodes.

    Realizes the energy of the minimal extension: the traced form evaluated
    at boundary data equals the minimum of the full form over all
    extensions.  ``keep`` equal to the full node set returns the (dense)
    matrix unchanged.
    """
    keep = np.asarray(list(keep), dtype=int)
    if keep.size == 0:
        raise ValueError("keep must be nonempty")
    if len(np.unique(keep)) != keep.size:
        raise ValueError("keep contains duplicate ids")
    N = form.n_nodes
    if keep.size == N:
        return form.matrix.toarray()

    interior = np.setdiff1d(np.arange(N), keep)
    K = form.matrix.tocsc()
    K_kk = K[keep][:, keep].toarray()
    K_ki = K[keep][:, interior]
    K_ii = K[interior][:, interior].tocsc()
    lu = splu(K_ii)
    X = lu.solve(K_ki.T.toarray())
    return K_kk - K_ki @ X


def effective_resistance(form: EnergyForm, a: int, b: int) -> float:
    """Two-point effective resistance of the conductance network.

    Equals ``sup |u(a)-u(b)|^2 / energy(u)``; computed by grounding ``a``
    and solving for the potential of a unit current injected at ``b``.
    """
    N = form.n_nodes
    if not (0 <= a < N and 0 <= b < N):
        raise ValueError("vertex id out of range")
    if a == b:
        return 0.0
    idx = np.concatenate((np.arange(a), np.arange(a + 1, N)))
    K_g = form.matrix[idx][:, idx].tocsc()
    rhs = np.zeros(N - 1)
    pos_b = b if b < a else b - 1
    rhs[pos_b] = 1.0
    x = spsolve(K_g, rhs)
    return float(x[pos_b])


def dump_form(form: EnergyForm, csv_path, json_path) -> None:
    """Write the conductance triplets as CSV plus a JSON parameter header.

    The header records the cumulative renormalization factors for levels
    1..n of the mesh.
    """
    import json as _json

    n = form.mesh.level
    with open(csv_path, "w") as fh:
        fh.write("row,col,conductance\n")
        for a, b, c in form.conductance_edges():
            fh.write(f"{a},{b},{c!r}\n")
    header = {
        "alpha": form.mesh.alpha,
        "level": n,
        "subdiv": form.mesh.subdiv,
        "renormalized": form.renormalized,
        "rho_d": [float(v) for v in form.factors.rho_d[1 : n + 1]],
        "rho_c": [float(v) for v in form.factors.rho_c[1 : n + 1]],
    }
    with open(json_path, "w") as fh:
        _json.dump(header, fh, indent=1)
        fh.write("\n")
