"""Laplacian eigenproblems, counting functions, and asymptotics fits.

The weak Laplacian of the renormalized energy with respect to the lumped
measure leads to the generalized symmetric problem ``K u = kappa M u`` with
``K`` the stiffness Laplacian and ``M`` the diagonal mass matrix.  Neumann
keeps all nodes; Dirichlet deletes the rows and columns of the three outer
corners, which makes the problem positive definite and ties the two
counting functions together by a rank-3 interlacing bound.

The counting function N(x) grows like ``x**(log 3 / log 5)`` for large x, so
the spectral dimension (twice the log-log slope of N) equals
``2 log 3 / log 5`` independently of the contraction parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse import csr_matrix, diags
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .forms import EnergyForm, renorm_factors
from .geometry import check_alpha, segment_length
from .measure import MassVector, continuous_normalizer, validate_beta

#: asymptotic exponent of the eigenvalue counting function
COUNTING_EXPONENT = math.log(3.0) / math.log(5.0)

#: spectral dimension, twice the counting exponent
SPECTRAL_DIMENSION = 2.0 * COUNTING_EXPONENT

NEUMANN = "neumann"
DIRICHLET = "dirichlet"

# above this dimension the auto solver switches to shift-invert Lanczos
_DENSE_LIMIT = 1500


class SolverError(RuntimeError):
    """Eigenvalue solver failed to converge."""


@dataclass(eq=False)
class EigenProblem:
    """Generalized eigenproblem K u = kappa M u on a mesh."""

    form: EnergyForm
    mass: MassVector
    bc: str

    def __post_init__(self) -> None:
        if self.bc not in (NEUMANN, DIRICHLET):
            raise ValueError(f"bc must be '{NEUMANN}' or '{DIRICHLET}'; got {self.bc!r}")
        if self.form.mesh is not self.mass.mesh:
            raise ValueError("stiffness and mass were assembled on different meshes")

    @property
    def dimension(self) -> int:
        n = self.form.n_nodes
        return n - 3 if self.bc == DIRICHLET else n

    def matrices(self) -> tuple[csr_matrix, np.ndarray, np.ndarray]:
        """Reduced (stiffness, mass diagonal, kept node ids)."""
        K = self.form.matrix
        m = self.mass.masses
        if self.bc == DIRICHLET:
            keep = np.setdiff1d(np.arange(self.form.n_nodes), self.form.boundary_ids)
            return K[keep][:, keep].tocsr(), m[keep], keep
        return K, m, np.arange(self.form.n_nodes)


@dataclass(eq=False)
class Spectrum:
    """Sorted eigenvalues with boundary-condition tag and mesh provenance."""

    eigenvalues: np.ndarray
    bc: str
    alpha: float
    beta: float
    level: int
    subdiv: int

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def provenance(self) -> tuple[float, float, int, int]:
        return (self.alpha, self.beta, self.level, self.subdiv)


def generalized_eigenvalues(
    stiffness: csr_matrix,
    mass_diag: np.ndarray,
    count: int,
    method: str = "auto",
) -> np.ndarray:
    """Smallest ``count`` eigenvalues of K u = kappa M u with diagonal M.

    The problem is symmetrized as D K D with D = M**(-1/2), so eigenvalues
    stay real and ascending.  ``method`` selects a dense solver, a
    shift-invert Lanczos iteration, or an automatic choice; both solvers
    honour the same accuracy contract.
    """
    dim = stiffness.shape[0]
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > dim:
        raise ValueError(f"count {count} exceeds problem dimension {dim}")

    d = 1.0 / np.sqrt(np.asarray(mass_diag, dtype=float))
    D = diags(d)
    A = (D @ stiffness @ D).tocsr()
    A = (A + A.T) * 0.5

    if method == "auto":
        method = "dense" if (dim <= _DENSE_LIMIT or count > dim // 3) else "sparse"
    if method == "sparse" and count > dim - 1:
        method = "dense"  # Lanczos cannot deliver the full spectrum

    if method == "dense":
        vals = eigh(A.toarray(), eigvals_only=True, subset_by_index=(0, count - 1))
        return np.sort(vals)

    if method == "sparse":
        # a small negative shift keeps the factorization definite and makes
        # shift-invert return the lowest part of the spectrum first
        sigma = -1e-3 * float(np.min(A.diagonal()))
        v0 = np.full(dim, 1.0 / math.sqrt(dim))
        try:
            vals = eigsh(
                A,
                k=count,
                sigma=sigma,
                which="LM",
                v0=v0,
                return_eigenvectors=False,
            )
        except ArpackNoConvergence as exc:
            got = len(exc.eigenvalues)
            res = ""
            if got and exc.eigenvectors is not None and exc.eigenvectors.size:
                V = exc.eigenvectors
                R = A @ V - V * exc.eigenvalues[None, :]
                res = f"; residual norms up to {np.linalg.norm(R, axis=0).max():.3e}"
            raise SolverError(
                f"Lanczos converged only {got}/{count} eigenvalues{res}"
            ) from exc
        return np.sort(vals)

    raise ValueError(f"unknown method {method!r}")


def solve_spectrum(problem: EigenProblem, count: int, method: str = "auto") -> Spectrum:
    """Solve for the ``count`` smallest eigenvalues of the problem.

    For Neumann problems on a connected mesh the kernel is exactly the
    constants, so a leading eigenvalue that is zero to rounding accuracy is
    snapped to an exact zero.
    """
    K, m, _ = problem.matrices()
    vals = generalized_eigenvalues(K, m, count, method=method)
    if problem.bc == NEUMANN and count >= 2 and abs(vals[0]) < 1e-8 * max(vals[1], 1.0):
        vals[0] = 0.0
    mesh = problem.form.mesh
    return Spectrum(
        eigenvalues=vals,
        bc=problem.bc,
        alpha=mesh.alpha,
        beta=problem.mass.beta,
        level=mesh.level,
        subdiv=mesh.subdiv,
    )


def counting_function(spectrum: Spectrum, x):
    """Number of eigenvalues <= x, with multiplicity.

    Right-continuous and nondecreasing; accepts a scalar or an array of
    thresholds.
    """
    idx = np.searchsorted(spectrum.eigenvalues, x, side="right")
    if np.isscalar(x):
        return int(idx)
    return idx.astype(int)


def edge_mode_spectrum(
    level_k: int, j_max: int, alpha: float, beta: float
) -> np.ndarray:
    """Continuum eigenvalues of one isolated level-k segment.

    Under the renormalized energy and the lumped measure, an isolated
    segment behaves as a classical second-derivative operator; its j-th
    interior mode has eigenvalue

        kappa_j = (j pi)**2 * 2 * normalizer / (rho_c[k] * beta**(k-1) * d_k).
    """
    check_alpha(alpha)
    validate_beta(alpha, beta)
    if level_k < 1:
        raise ValueError("segment levels start at 1")
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    factors = renorm_factors(alpha, level_k)
    mu = continuous_normalizer(alpha, beta)
    stiff = 1.0 / factors.rho_c[level_k]
    m_seg = beta ** (level_k - 1) * segment_length(alpha, level_k) / (2.0 * mu)
    j = np.arange(1, j_max + 1, dtype=float)
    return (j * math.pi) ** 2 * stiff / m_seg


@dataclass
class FitReport:
    """Least-squares summary of the counting-function asymptotics."""

    x_lo: float
    x_hi: float
    slope: float
    d_s: float
    c1: float
    c2: float
    rms_residual: float
    n_points: int
    max_gap_nn_nd: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "d_s": self.d_s,
            "window": [self.x_lo, self.x_hi],
            "c1": self.c1,
            "c2": self.c2,
            "rms_residual": self.rms_residual,
            "n_points": self.n_points,
            "max_gap_NN_ND": self.max_gap_nn_nd,
        }


def spectral_dim_fit(
    spectrum: Spectrum,
    drop_low: int = 20,
    drop_high_frac: float = 0.2,
    x_lo: float | None = None,
    x_hi: float | None = None,
    min_points: int = 100,
) -> FitReport:
    """Fit log N(x) against log x over a window of the spectrum.

    The default window drops the lowest ``drop_low`` modes (preasymptotic)
    and the top ``drop_high_frac`` share of the computed modes
    (discretization-corrupted); explicit ``x_lo``/``x_hi`` override either
    end.  The spectral-dimension estimate is twice the fitted slope, and
    c1/c2 bracket N(x)/x**COUNTING_EXPONENT on the window.
    """
    eigs = spectrum.eigenvalues
    if x_lo is None or x_hi is None:
        hi_idx = int(math.floor(len(eigs) * (1.0 - drop_high_frac))) - 1
        if drop_low >= len(eigs) or hi_idx <= drop_low:
            raise ValueError("spectrum too small for the requested fit window")
        if x_lo is None:
            x_lo = float(eigs[drop_low])
        if x_hi is None:
            x_hi = float(eigs[hi_idx])

    inside = eigs[(eigs >= x_lo) & (eigs <= x_hi) & (eigs > 0)]
    if len(inside) < min_points:
        raise ValueError(
            f"only {len(inside)} eigenvalues in fit window "
            f"[{x_lo:.6g}, {x_hi:.6g}]; need >= {min_points}"
        )

    xs = np.unique(inside)
    Ns = np.searchsorted(eigs, xs, side="right").astype(float)
    lx, lN = np.log(xs), np.log(Ns)
    slope, intercept = np.polyfit(lx, lN, 1)
    resid = lN - (slope * lx + intercept)
    ratio = Ns / xs**COUNTING_EXPONENT
    return FitReport(
        x_lo=float(x_lo),
        x_hi=float(x_hi),
        slope=float(slope),
        d_s=float(2.0 * slope),
        c1=float(ratio.min()),
        c2=float(ratio.max()),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        n_points=int(len(inside)),
    )


@dataclass
class WeylReport:
    """Comparison of the Neumann and Dirichlet counting functions."""

    ok: bool
    max_gap: int
    min_gap: int
    x_max: float
    n_checked: int
    violations: int
    fit_neumann: FitReport | None = None
    fit_dirichlet: FitReport | None = None

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "max_gap_NN_ND": self.max_gap,
            "min_gap_NN_ND": self.min_gap,
            "x_max": self.x_max,
            "n_checked": self.n_checked,
            "violations": self.violations,
            "fit_neumann": self.fit_neumann.to_json_dict() if self.fit_neumann else None,
            "fit_dirichlet": self.fit_dirichlet.to_json_dict() if self.fit_dirichlet else None,
        }


def weyl_bracket_check(
    neumann: Spectrum,
    dirichlet: Spectrum,
    drop_low: int = 20,
    drop_high_frac: float = 0.2,
    rel_tol: float = 1e-6,
) -> WeylReport:
    """Verify 0 <= N_N(x) - N_D(x) <= 3 on the shared range of both spectra.

    Deleting the three outer corners is a rank-3 constraint, so the two
    counting functions can never drift further than 3 apart.  Many modes
    (those vanishing on the outer corners) belong to both spectra with
    exactly equal eigenvalues, which the two solves reproduce only up to
    rounding; the comparison therefore counts with a relative slack
    ``rel_tol`` so that noise inside a degenerate cluster cannot fake a
    violation.  ``max_gap`` is the largest gap that persists under the
    least favorable reading of the noise and ``min_gap`` the smallest under
    the most favorable one.  The report also carries the window fits
    (bracket constants) of both spectra when they are large enough to fit.
    """
    if neumann.bc != NEUMANN or dirichlet.bc != DIRICHLET:
        raise ValueError("arguments must be a Neumann and a Dirichlet spectrum")
    if neumann.provenance() != dirichlet.provenance():
        raise ValueError(
            f"mismatched provenance: {neumann.provenance()} vs {dirichlet.provenance()}"
        )

    x_max = float(min(neumann.eigenvalues[-1], dirichlet.eigenvalues[-1]))
    xs = np.unique(
        np.concatenate([neumann.eigenvalues, dirichlet.eigenvalues])
    )
    xs = xs[xs <= x_max]
    lo = xs * (1.0 - rel_tol)
    hi = xs * (1.0 + rel_tol)
    # conservative for the upper bound: undercount Neumann, overcount Dirichlet
    gaps_tight = counting_function(neumann, lo) - counting_function(dirichlet, hi)
    # conservative for the lower bound: the other way around
    gaps_wide = counting_function(neumann, hi) - counting_function(dirichlet, lo)
    max_gap = int(gaps_tight.max())
    min_gap = int(gaps_wide.min())
    violations = int(np.sum(gaps_tight > 3) + np.sum(gaps_wide < 0))

    def _try_fit(spec: Spectrum) -> FitReport | None:
        try:
            return spectral_dim_fit(spec, drop_low=drop_low, drop_high_frac=drop_high_frac)
        except ValueError:
            return None

    return WeylReport(
        ok=violations == 0,
        max_gap=max_gap,
        min_gap=min_gap,
        x_max=x_max,
        n_checked=len(xs),
        violations=violations,
        fit_neumann=_try_fit(neumann),
        fit_dirichlet=_try_fit(dirichlet),
    )


def dump_spectrum(spectrum: Spectrum, path) -> None:
    """Write eigenvalues as an index,eigenvalue CSV."""
    with open(path, "w") as fh:
        fh.write("index,eigenvalue\n")
        for i, v in enumerate(spectrum.eigenvalues):
            fh.write(f"{i},{float(v)!r}\n")


def dump_counting_samples(spectrum: Spectrum, path) -> None:
    """Write counting-function samples (at each eigenvalue) as x,N CSV."""
    xs = spectrum.eigenvalues
    Ns = counting_function(spectrum, xs)
    with open(path, "w") as fh:
        fh.write("x,N\n")
        for x, N in zip(xs, Ns):
            fh.write(f"{float(x)!r},{int(N)}\n")


def dump_plot_data(spectrum: Spectrum, path) -> None:
    """Write (log x, log N) pairs for the positive part of the spectrum."""
    xs = spectrum.eigenvalues
    mask = xs > 0
    xs = xs[mask]
    Ns = counting_function(spectrum, xs)
    with open(path, "w") as fh:
        fh.write("log_x,log_N\n")
        for x, N in zip(xs, Ns):
            fh.write(f"{math.log(x)!r},{math.log(N)!r}\n")
