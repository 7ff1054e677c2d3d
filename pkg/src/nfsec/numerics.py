"""Special functions, distribution kernels, samplers and quadrature.

The centerpiece is the scaled eavesdropper-SINR density: (M-1) times the
ratio of a noncentral chi-square(2, lam1) to a noncentral
chi-square(2(M-1), lam2) follows a doubly noncentral F distribution whose
PDF is a double series over the two Poisson mixture indices.  The series
is summed in log space, diagonal by diagonal in the total index, so it
stays finite for noncentralities up to ~1e3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureFailure, SeriesNotConverged

_LOG_TINY = -745.0  # under exp() this underflows to 0.0


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the double series: stop once a diagonal's
    relative contribution drops below tol, give up at max_total_index."""

    tol: float = 1e-12
    max_total_index: int = 800

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_total_index < 1:
            raise ValueError("index cap must be at least 1")


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(special.gammaln(x))


def beta_fn(a: float, b: float) -> float:
    """Beta function via log-gamma, B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b)."""
    if a <= 0 or b <= 0:
        raise DomainError(f"beta_fn requires positive arguments, got ({a}, {b})")
    return float(np.exp(special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b)))


def q_function(x):
    """Standard normal upper-tail probability, Q(x) = erfc(x / sqrt 2) / 2."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


_CHUNK = 32  # diagonals per vectorized evaluation block


class DncfSeries:
    """Cached evaluator for the scaled eavesdropper-SINR PDF.

    Coefficient diagonals (fixed total index a + b) are built lazily,
    flattened into chunks of _CHUNK diagonals, and reused across evaluation
    points; that matters inside the outage quadrature where the same
    parameter set is hit at hundreds of points.
    """

    def __init__(self, lam1: float, lam2: float, m_users: int,
                 ctrl: SeriesControl | None = None):
        if lam1 < 0 or lam2 < 0:
            raise DomainError("noncentralities must be nonnegative")
        if m_users < 2:
            raise DomainError("the scaled-SINR density needs at least 2 users")
        self.lam1 = float(lam1)
        self.lam2 = float(lam2)
        self.m = int(m_users)
        self.ctrl = ctrl or SeriesControl()
        # per chunk: (a, logc, t + M, index where the chunk's last diagonal starts)
        self._chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray, int]] = []

    def _diagonal_parts(self, tt: int) -> tuple[np.ndarray, np.ndarray]:
        a = np.arange(tt + 1, dtype=float)
        b = tt - a
        # a zero noncentrality admits only index 0 on its axis
        keep = np.ones(tt + 1, dtype=bool)
        if self.lam1 == 0.0:
            keep &= a == 0
        if self.lam2 == 0.0:
            keep &= b == 0
        a, b = a[keep], b[keep]
        if a.size == 0:
            return a, a
        m1 = self.m - 1
        logc = (-tt * np.log(2.0)
                + (b + m1) * np.log(m1)
                - 0.5 * (self.lam1 + self.lam2)
                - 2.0 * special.gammaln(a + 1.0)
                - special.gammaln(b + 1.0)
                + special.gammaln(tt + self.m)
                - special.gammaln(b + m1))
        if self.lam1 > 0.0:
            logc += a * np.log(self.lam1)
        if self.lam2 > 0.0:
            logc += b * np.log(self.lam2)
        return a, logc

    def _chunk(self, c: int):
        while len(self._chunks) <= c:
            t0 = len(self._chunks) * _CHUNK
            t1 = min(t0 + _CHUNK, self.ctrl.max_total_index + 1)
            parts = [self._diagonal_parts(tt) for tt in range(t0, t1)]
            a = np.concatenate([p[0] for p in parts])
            logc = np.concatenate([p[1] for p in parts])
            tm = np.concatenate([np.full(p[0].size, tt + self.m, dtype=float)
                                 for tt, p in zip(range(t0, t1), parts)])
            last_start = a.size - parts[-1][0].size
            self._chunks.append((a, logc, tm, last_start))
        return self._chunks[c]

    def log_pdf(self, s: float) -> float:
        """Log density at a single point s > 0."""
        if s <= 0:
            raise DomainError(f"density support is s > 0, got {s}")
        log_s = np.log(s)
        log_shift = np.log(self.m - 1 + s)
        total = -np.inf
        prev_last = np.inf
        log_tol = np.log(self.ctrl.tol)
        n_chunks = (self.ctrl.max_total_index // _CHUNK) + 1
        for c in range(n_chunks):
            a, logc, tm, last_start = self._chunk(c)
            if a.size:
                vals = logc + a * log_s - tm * log_shift
                total = np.logaddexp(total, special.logsumexp(vals))
                last = (special.logsumexp(vals[last_start:])
                        if vals.size > last_start else -np.inf)
            else:
                last = -np.inf
            # converged once the trailing diagonal is decaying and negligible
            if last < prev_last and last <= total + log_tol:
                return float(total)
            prev_last = last
        raise SeriesNotConverged(
            f"dncf series cap {self.ctrl.max_total_index} reached "
            f"(lam1={self.lam1:.3g}, lam2={self.lam2:.3g}, M={self.m}, s={s:.3g})")

    def pdf(self, s: float) -> float:
        lp = self.log_pdf(s)
        return 0.0 if lp < _LOG_TINY else float(np.exp(lp))


def dncf_scaled_pdf(s, lam1: float, lam2: float, m_users: int,
                    ctrl: SeriesControl | None = None):
    """PDF of (M-1) * eavesdropper SINR at s (scalar or array), the doubly
    noncentral F density with DoF (2, 2(M-1)) and the given noncentralities."""
    series = DncfSeries(lam1, lam2, m_users, ctrl)
    s_arr = np.asarray(s, dtype=float)
    if s_arr.ndim == 0:
        return series.pdf(float(s_arr))
    return np.array([series.pdf(float(v)) for v in s_arr.ravel()]).reshape(s_arr.shape)


def sample_ncx2(dof: int, lam: float, rng, size=None):
    """Noncentral chi-square draw(s): sum of dof squared unit normals with
    the whole noncentrality placed on the first component's mean."""
    if dof < 1:
        raise DomainError("need at least one degree of freedom")
    if lam < 0:
        raise DomainError("noncentrality must be nonnegative")
    shape = (dof,) if size is None else (np.prod(np.atleast_1d(size)), dof)
    z = rng.standard_normal(shape)
    z[..., 0] += np.sqrt(lam)
    out = np.sum(z * z, axis=-1)
    if size is None:
        return float(out)
    return out.reshape(size)


def sample_dncf(lam1: float, lam2: float, m_users: int, rng, size=None):
    """Draw(s) of (M-1) * X/Y with X ~ ncx2(2, lam1), Y ~ ncx2(2(M-1), lam2);
    the sampling route for the density above."""
    x = sample_ncx2(2, lam1, rng, size=size)
    y = sample_ncx2(2 * (m_users - 1), lam2, rng, size=size)
    return (m_users - 1) * x / y


def integrate_semi_infinite(f, tol: float = 1e-8) -> float:
    """Integral of a nonnegative integrand over [0, inf) by adaptive
    quadrature after the substitution s = t / (1 - t), which maps the
    heavy polynomial tail onto a finite interval."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")

    def g(t):
        if t >= 1.0:
            return 0.0
        u = 1.0 - t
        return f(t / u) / (u * u)

    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"quadrature did not converge: {exc}") from exc
    if not np.isfinite(val):
        raise QuadratureFailure("quadrature produced a non-finite value")
    if val != 0.0 and err > tol * abs(val):
        raise QuadratureFailure(
            f"error estimate {err:.3e} exceeds tol*|I| = {tol * abs(val):.3e}")
    return float(val)
