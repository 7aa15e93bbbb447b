"""Limited-memory curvature pair store with spectrum control.

The store keeps at most ``capacity`` pairs ``(s, y)`` in first-in first-out
order and exposes three things the step loop needs:

* ``apply_inverse`` -- the two-loop recursion computing ``H g`` for the
  inverse of the implied Hessian approximation ``B`` (``B0 = c * I``),
* ``extreme_eigenvalues`` -- the largest and smallest eigenvalue of ``B``
  via the compact representation (thin QR of ``[c S, Y]`` plus a small
  symmetric eigensolve),
* ``enforce_spectrum`` -- drop oldest pairs until the eigenvalues lie
  strictly inside a configured band.

Eigenvalue queries are cached and the cache is invalidated on any mutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SpectrumQueryError
from .linalg import dense_bfgs_oracle, solve_checked, sym_eig_small, thin_qr

# Pairs are admitted only when <s, y> exceeds this.
CURVATURE_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumBounds:
    """Closed eigenvalue band ``[lower, upper]`` for the Hessian approximation."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper < np.inf):
            raise ConfigurationError(
                f"need 0 < lower <= upper < inf, got [{self.lower}, {self.upper}]")

    def admits(self, sigma_max, sigma_min):
        """Strict interior test; equality with either edge counts as a violation."""
        return sigma_max < self.upper and sigma_min > self.lower


class CurvaturePairStore:
    """FIFO store of curvature pairs defining ``B = c I + (BFGS updates)``.

    Parameters
    ----------
    dim : int
        Dimension of the pairs.
    capacity : int or None
        Maximum number of pairs; ``None`` means unbounded.  A bounded
        capacity is clamped to ``dim // 2`` by default so that the compact
        eigenvalue representation stays valid (``2 m <= dim``).
    c : float
        Scale of the base matrix ``B0 = c * I``.
    curvature_tol : float
        Admission threshold on ``<s, y>``.
    clamp_capacity : bool
        Set to ``False`` to keep a bounded capacity above ``dim // 2``;
        eigenvalue queries then fall back to the dense reconstruction
        whenever ``2 m > dim``.
    """

    def __init__(self, dim, capacity=None, c=1.0, curvature_tol=CURVATURE_TOL,
                 clamp_capacity=True):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim}")
        if not (np.isfinite(c) and c > 0.0):
            raise ValueError(f"c must be a positive finite scalar, got {c}")
        if capacity is not None:
            if int(capacity) != capacity or capacity < 0:
                raise ValueError(f"capacity must be a non-negative integer or None, "
                                 f"got {capacity}")
            capacity = int(capacity)
            if clamp_capacity:
                capacity = min(capacity, int(dim) // 2)
        self.dim = int(dim)
        self.capacity = capacity
        self.c = float(c)
        self.curvature_tol = float(curvature_tol)
        self._s = []
        self._y = []
        self._version = 0
        self._eig_cache = None

    def __len__(self):
        return len(self._s)

    @property
    def s_list(self):
        return [s.copy() for s in self._s]

    @property
    def y_list(self):
        return [y.copy() for y in self._y]

    def _check_vector(self, v, name):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"{name} must have shape ({self.dim},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name} contains non-finite entries")
        return v

    def try_insert(self, s, y):
        """Admit ``(s, y)`` if ``<s, y> > curvature_tol``; evict the oldest
        pair when full.  Returns whether the pair was stored."""
        s = self._check_vector(s, "s")
        y = self._check_vector(y, "y")
        if float(s @ y) <= self.curvature_tol:
            return False
        if self.capacity == 0:
            return False
        if self.capacity is not None and len(self._s) == self.capacity:
            self._s.pop(0)
            self._y.pop(0)
        self._s.append(s.copy())
        self._y.append(y.copy())
        self._version += 1
        return True

    def remove_oldest(self):
        if not self._s:
            raise ValueError("store is empty")
        self._s.pop(0)
        self._y.pop(0)
        self._version += 1

    def clear(self):
        self._s.clear()
        self._y.clear()
        self._version += 1

    def extreme_eigenvalues(self):
        """Largest and smallest eigenvalue ``(sigma_max, sigma_min)`` of ``B``.

        An empty store returns ``(c, c)``.  Raises ``SpectrumQueryError``
        when the small middle system of the compact representation is
        singular to working precision.
        """
        if self._eig_cache is not None and self._eig_cache[0] == self._version:
            return self._eig_cache[1]
        m = len(self._s)
        if m == 0:
            result = (self.c, self.c)
        elif 2 * m <= self.dim:
            result = self._compact_extremes()
        else:
            # Wider stores than the compact representation covers (possible
            # only with clamping disabled or unbounded capacity): the dense
            # reconstruction is exact and still cheap at these sizes.
            b = dense_bfgs_oracle(self._s, self._y, self.c)
            eigs = np.linalg.eigvalsh(b)
            result = (float(eigs[-1]), float(eigs[0]))
        self._eig_cache = (self._version, result)
        return result

    def _compact_extremes(self):
        smat = np.column_stack(self._s)
        ymat = np.column_stack(self._y)
        psi = np.hstack([self.c * smat, ymat])
        _, r = thin_qr(psi)
        phi = smat.T @ ymat
        d = np.diag(np.diag(phi))
        low = np.tril(phi, -1)
        middle = np.block([[self.c * (smat.T @ smat), low], [low.T, -d]])
        try:
            x = solve_checked(middle, r.T)
        except np.linalg.LinAlgError as exc:
            raise SpectrumQueryError(str(exc)) from exc
        prod = -(r @ x)
        prod = 0.5 * (prod + prod.T)
        eigs = sym_eig_small(prod)
        sigma_max = max(float(eigs[0]) + self.c, self.c)
        sigma_min = min(float(eigs[-1]) + self.c, self.c)
        return (sigma_max, sigma_min)

    def violates(self, bounds):
        """Whether the current spectrum falls outside ``bounds`` (strict test).

        A singular eigenvalue query counts as a violation.
        """
        try:
            sigma_max, sigma_min = self.extreme_eigenvalues()
        except SpectrumQueryError:
            return True
        return not bounds.admits(sigma_max, sigma_min)

    def enforce_spectrum(self, bounds):
        """Drop oldest pairs until the spectrum sits strictly inside ``bounds``.

        Returns the number of pairs removed.  Requires ``c`` itself to lie
        in the band, otherwise an empty store could never satisfy it.
        """
        if not (bounds.lower <= self.c <= bounds.upper):
            raise ConfigurationError(
                f"base scale c = {self.c} outside spectrum bounds "
                f"[{bounds.lower}, {bounds.upper}]")
        removed = 0
        while self._s and self.violates(bounds):
            self.remove_oldest()
            removed += 1
        return removed

    def apply_inverse(self, g):
        """Two-loop recursion computing ``d = H g`` with ``H = B^{-1}``."""
        g = self._check_vector(g, "g")
        q = g.copy()
        m = len(self._s)
        if m == 0:
            return q / self.c
        rho = np.empty(m)
        alpha = np.empty(m)
        for i in range(m - 1, -1, -1):
            rho[i] = 1.0 / float(self._y[i] @ self._s[i])
            alpha[i] = rho[i] * float(self._s[i] @ q)
            q -= alpha[i] * self._y[i]
        r = q / self.c
        for i in range(m):
            beta = rho[i] * float(self._y[i] @ r)
            r += (alpha[i] - beta) * self._s[i]
        return r


def try_insert_pair(store, s, y):
    """Functional alias for :meth:`CurvaturePairStore.try_insert`."""
    return store.try_insert(s, y)


def extreme_eigenvalues(store):
    """Functional alias for :meth:`CurvaturePairStore.extreme_eigenvalues`."""
    return store.extreme_eigenvalues()


def enforce_spectrum(store, bounds):
    """Functional alias for :meth:`CurvaturePairStore.enforce_spectrum`."""
    return store.enforce_spectrum(bounds)


def two_loop_apply(store, g):
    """Functional alias for :meth:`CurvaturePairStore.apply_inverse`."""
    return store.apply_inverse(g)
