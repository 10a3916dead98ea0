"""Entropy and distance functionals on density matrices.

All entropic quantities use logarithm base 2 (bits).  Eigenvalues at or
below SUPPORT_CUTOFF are treated as exact zeros when taking logs: such
eigenvalues of the first argument contribute nothing, such eigenvalues of
the second argument force +infinity if the first argument has weight there.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .qmat import DensityMatrix, InputError

SUPPORT_CUTOFF = 1e-12
# Weight of rho allowed outside sigma's support before declaring +infinity;
# pure numerical dust from 1e-9-validated states stays well below this.
SUPPORT_LEAK_TOL = 1e-10


class DistanceKind(Enum):
    RELATIVE_ENTROPY = "relative_entropy"
    TRACE = "trace"
    BURES = "bures"

    @property
    def symmetric(self) -> bool:
        """Trace and Bures are symmetric; relative entropy is not, so
        callers must order arguments as D(state, reference)."""
        return self is not DistanceKind.RELATIVE_ENTROPY


def _check_same_dims(a: DensityMatrix, b: DensityMatrix) -> None:
    if a.dims.dims != b.dims.dims:
        raise InputError(f"dimension mismatch: {a.dims.dims} vs {b.dims.dims}")


def vn_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy -sum(lam * log2 lam) in bits."""
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.mat))


def entropy_of_spectrum(eigenvalues) -> float:
    w = np.asarray(eigenvalues, dtype=float)
    w = w[w > SUPPORT_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2); 1 for pure states, 1/d for maximally mixed."""
    return float(np.sum(np.abs(rho.mat) ** 2))


def _log_expectation(rho_mat: np.ndarray, omega_mat: np.ndarray) -> float:
    """Tr[rho log2 omega], +/-infinity rules as in the module docstring."""
    s, v = np.linalg.eigh(omega_mat)
    weights = np.einsum("ij,ji->i", v.conj().T @ rho_mat, v).real
    outside = s <= SUPPORT_CUTOFF
    if np.sum(np.clip(weights[outside], 0.0, None)) > SUPPORT_LEAK_TOL:
        return -np.inf
    inside = ~outside
    return float(np.sum(weights[inside] * np.log2(s[inside])))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum relative entropy S(rho||sigma) in bits, +inf off support."""
    _check_same_dims(rho, sigma)
    cross = _log_expectation(rho.mat, sigma.mat)
    if cross == -np.inf:
        return np.inf
    return -vn_entropy(rho) - cross


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """0.5 * tr|a - b|, in [0, 1]."""
    _check_same_dims(a, b)
    w = np.linalg.eigvalsh(a.mat - b.mat)
    return float(0.5 * np.sum(np.abs(w)))


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2, clipped to [0, 1]."""
    _check_same_dims(a, b)
    ra = _psd_sqrt(a.mat)
    w = np.linalg.eigvalsh(ra @ b.mat @ ra)
    # the square root amplifies eigenvalue dust, so cut well above it
    w[w < 1e-13] = 0.0
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)


def bures_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """2 (1 - sqrt(F)), in [0, 2].

    This is the squared-free form used throughout the package; its triangle
    inequality is checked empirically, not assumed (see the audit module).
    """
    return 2.0 * (1.0 - np.sqrt(fidelity(a, b)))


def distance(kind: DistanceKind, a: DensityMatrix, b: DensityMatrix) -> float:
    """Dispatch D(a, b) for the chosen kind; a is the state, b the reference."""
    if kind is DistanceKind.RELATIVE_ENTROPY:
        return relative_entropy(a, b)
    if kind is DistanceKind.TRACE:
        return trace_distance(a, b)
    if kind is DistanceKind.BURES:
        return bures_distance(a, b)
    raise InputError(f"unknown distance kind {kind!r}")
