"""Momentum cutoffs for the multiscale covariance decomposition.

The splitting functions are built from nested Fejer kernels in the spectral
variable of the lattice Laplacian.  With u = m^2 + lam(k) in [0, b],
b = m^2 + 8, substitute u = b sin^2(theta/2); then

    s_h(u) = [ sin(kappa_h theta / 2) / (kappa_h sin(theta/2)) ]^2

is a polynomial of degree kappa_h - 1 in u with 0 <= s_h <= 1 and
s_h(0) = 1 (a normalized Fejer kernel in theta).  The residual after h
scales is the product r_h = s_1 s_2 ... s_h and the per-fine-scale band is

    psi_h = r_h (1 - s_{h+1}) / u ,        h = 0, 1, ...

All bands are nonnegative on [0, b] by construction, the partial sums
telescope exactly to (1 - r_H)/u, and psi_h is a polynomial in u of degree
sum_{n<=h+1}(kappa_n - 1) - 1.  A degree-d polynomial in the lattice
Laplacian has range d, so the schedule kappa_h = max(2, gamma^(h-1)) keeps
the kernel of psi_h(m^2 - Delta) supported strictly inside |x| < gamma^(h+1)/2:
finite range is exact, not a leakage tolerance.

The h -> infinity limit of r_h at momentum scale gamma^h is the radial
profile  u_inf(q) = prod_{l>=1} sinc^2(gamma^-l q / sqrt(8))  used by the
continuum diagnostics (tilde_c and the Coulomb constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "CutoffFamily",
    "build_cutoffs",
    "tilde_c",
    "CoulombConstant",
    "coulomb_constant_c",
    "coulomb_constant_closed",
]


def _fejer_schedule(gamma: int, horizon: int) -> tuple[int, ...]:
    """kappa_h for h = 1..horizon; kappa_h = max(2, gamma^(h-1))."""
    return tuple(max(2, gamma ** (h - 1)) for h in range(1, horizon + 1))


@dataclass(frozen=True)
class CutoffFamily:
    """Nested-Fejer cutoff family at fine base gamma.

    horizon is the number of fine scales available (bands h = 0..horizon-1
    plus the residual r_horizon that feeds the tail covariance).
    """

    gamma: int
    M: int
    horizon: int
    kappas: tuple[int, ...]

    def __post_init__(self):
        # range certificate: deg psi_h = sum_{n<=h+1}(kappa_n - 1) - 1 must stay
        # <= (gamma^(h+1) - 1)/2 so the band-h kernel fits its support box
        total = 0
        for h in range(self.horizon):
            total = sum(self.kappas[n] for n in range(h + 1)) - (h + 1)
            allowed = (self.gamma ** (h + 1) - 1) // 2
            if total - 1 > allowed:
                raise ValueError(
                    f"cutoff schedule violates the range budget at fine scale {h}: "
                    f"degree {total - 1} > {allowed}"
                )

    # -- spectral evaluation -------------------------------------------------

    @staticmethod
    def theta(u: np.ndarray, b: float) -> np.ndarray:
        """Chebyshev angle with sin^2(theta/2) = u/b."""
        return 2.0 * np.arcsin(np.sqrt(np.clip(u / b, 0.0, 1.0)))

    @staticmethod
    def _factor(theta: np.ndarray, kappa: int) -> np.ndarray:
        """Normalized Fejer factor sin^2(K t/2) / (K sin(t/2))^2 in [0, 1]."""
        half = 0.5 * theta
        small = kappa * half < 1e-6
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(small, 1.0, np.sin(kappa * half) / (kappa * np.where(small, 1.0, np.sin(half))))
        a = np.where(small, 1.0 - (kappa**2 - 1) * half**2 / 6.0, a)
        return a * a

    def _one_minus_factor_over_u(self, u: np.ndarray, b: float, kappa: int) -> np.ndarray:
        """(1 - s_kappa(u)) / u, stable down to u = 0.

        For kappa*theta/2 < 1e-3 uses
        sin^2(a) - sin^2(Ka)/K^2 = (K^2-1) a^4/3 - 2(K^4-1) a^6/45 + O(a^8)
        together with sin^2(a) = u/b (exact by the substitution).
        """
        u = np.asarray(u, dtype=float)
        a = 0.5 * self.theta(u, b)
        k2 = float(kappa) ** 2
        out = np.empty_like(u)
        small = kappa * a < 1e-3
        big = ~small
        if np.any(big):
            ub = u[big]
            s2 = ub / b
            sk = np.sin(kappa * a[big]) ** 2
            out[big] = (1.0 - sk / (k2 * s2)) / ub
        if np.any(small):
            usm = u[small]
            asm = a[small]
            num = (k2 - 1.0) * asm**4 / 3.0 - 2.0 * (k2 * k2 - 1.0) * asm**6 / 45.0
            # (1-s)/u = num / (sin^2 a * u) = num * b / u^2
            lim = (k2 - 1.0) / (3.0 * b)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = num * b / np.where(usm > 0, usm * usm, 1.0)
            out[small] = np.where(usm > 0, val, lim)
        return out

    def residual(self, u: np.ndarray, b: float, h: int) -> np.ndarray:
        """r_h(u) = prod_{n<=h} s_n(u); r_0 = 1."""
        u = np.asarray(u, dtype=float)
        theta = self.theta(u, b)
        r = np.ones_like(u)
        for n in range(1, h + 1):
            r = r * self._factor(theta, self.kappas[n - 1])
        return r

    def band(self, u: np.ndarray, b: float, h: int) -> np.ndarray:
        """psi_h(u) = r_h(u) (1 - s_{h+1}(u)) / u, the fine-scale-h band."""
        if not (0 <= h < self.horizon):
            raise ValueError(f"fine scale {h} outside horizon {self.horizon}")
        u = np.asarray(u, dtype=float)
        return self.residual(u, b, h) * self._one_minus_factor_over_u(u, b, self.kappas[h])

    def band_sum(self, u: np.ndarray, b: float, h_list) -> np.ndarray:
        """Sum of bands, sharing the residual products across scales."""
        u = np.asarray(u, dtype=float)
        theta = self.theta(u, b)
        out = np.zeros_like(u)
        r = np.ones_like(u)
        n_done = 0
        for h in sorted(h_list):
            for n in range(n_done + 1, h + 1):
                r = r * self._factor(theta, self.kappas[n - 1])
            n_done = max(n_done, h)
            out += r * self._one_minus_factor_over_u(u, b, self.kappas[h])
        return out

    def tail(self, u: np.ndarray, b: float) -> np.ndarray:
        """r_horizon(u)/u: spectral density left for the massive tail."""
        u = np.asarray(u, dtype=float)
        r = self.residual(u, b, self.horizon)
        with np.errstate(divide="ignore"):
            return np.where(u > 0, r / np.maximum(u, 1e-300), np.inf)

    def band_degree(self, h: int) -> int:
        """Polynomial degree of psi_h in u = its exact kernel range in |x|_1."""
        return sum(self.kappas[n] for n in range(h + 1)) - (h + 1) - 1

    def band_support(self, h: int) -> int:
        """Kernel of band h vanishes identically for |x|_inf > this radius."""
        return self.band_degree(h)

    # -- cutoff-family views -----------------------------------------------------

    def F_h(self, p0, p1, h: int, m: float = 0.0) -> np.ndarray:
        """Momentum cutoff F_h at a 2D momentum on the gamma^h-rescaled zone.

        F_0 = 1; for h >= 1 this is the residual r_h at fine momentum
        (p0, p1)/gamma^h, so band h carries spectral weight
        [F_h(gamma^h q) - F_{h+1}(gamma^{h+1} q)] / (m^2 + lam(q)).
        """
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        if h == 0:
            return np.ones(np.broadcast(p0, p1).shape)
        g = float(self.gamma**h)
        lam = 4.0 - 2.0 * np.cos(p0 / g) - 2.0 * np.cos(p1 / g)
        return self.residual(m * m + lam, m * m + 8.0, h)

    def A_sq(self, p0, p1, h: int, n: int, m: float = 0.0) -> np.ndarray:
        """Squared factor function: F_h = prod_{n=0}^{h-1} A_sq(., h, n)."""
        if not (0 <= n < h):
            raise ValueError(f"factor index n={n} outside 0..{h - 1}")
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        g = float(self.gamma**h)
        lam = 4.0 - 2.0 * np.cos(p0 / g) - 2.0 * np.cos(p1 / g)
        u = m * m + lam
        return self._factor(self.theta(u, m * m + 8.0), self.kappas[h - n - 1])

    def u_profile(self, q) -> np.ndarray:
        """Continuum profile u(q) = prod_{l>=1} sinc^2(gamma^-l |q| / sqrt(8)).

        u(0) = 1, 0 <= u <= 1, u -> 0 at infinity; the scaled h -> infinity
        limit of the residuals r_h.
        """
        q = np.abs(np.asarray(q, dtype=float))
        out = np.ones_like(q)
        qmax = float(q.max()) if q.size else float(q)
        if qmax == 0.0:
            return out
        lmax = max(1, int(math.log(qmax * 1e4 + 10.0) / math.log(self.gamma)) + 2)
        root_b = math.sqrt(8.0)
        for l in range(1, lmax + 1):
            x = q * (self.gamma ** (-l)) / root_b
            out *= np.sinc(x / np.pi) ** 2
        return out


def build_cutoffs(gamma: int, M: int, horizon: int) -> CutoffFamily:
    """Cutoff family for `horizon` fine scales (horizon = M*R for a full torus)."""
    if gamma % 2 == 0 or gamma < 3:
        raise ValueError(f"gamma must be odd >= 3, got {gamma}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    kappas = _fejer_schedule(gamma, horizon + 1)
    fam = CutoffFamily(gamma=gamma, M=M, horizon=horizon, kappas=kappas)
    probe = np.linspace(0.0, 8.0, 257)
    th = fam.theta(probe, 8.0)
    for kappa in kappas[: min(6, len(kappas))]:
        s = fam._factor(th, kappa)
        if s.min() < -1e-15 or s.max() > 1.0 + 1e-12:
            raise ValueError("cutoff factor outside [0, 1]; construction failure")
    return fam


def tilde_c(cutoffs: CutoffFamily, x) -> float:
    """C~(x) = int d^2p/(2pi)^2 e^{ipx} (u(p) - u(gamma p))/p^2 by quadrature.

    Radial form: (1/2pi) int_0^inf (u(rho) - u(gamma rho)) J0(rho |x|) drho/rho.
    """
    r = math.hypot(float(x[0]), float(x[1])) if np.ndim(x) else float(abs(x))
    g = cutoffs.gamma

    def integrand(rho):
        du = float(cutoffs.u_profile(rho) - cutoffs.u_profile(g * rho))
        return du * special.j0(rho * r) / rho

    corners = [math.sqrt(8.0) * float(g) ** (-l) * math.pi for l in range(-6, 3)]
    pts = sorted(c for c in corners if 1e-8 < c < 120.0)
    total, err = integrate.quad(integrand, 1e-8, 120.0, points=pts, limit=400, epsabs=1e-10, epsrel=1e-10)
    if err > 1e-6:
        raise RuntimeError(f"quadrature did not converge: residual estimate {err:.3e}")
    return total / (2.0 * math.pi)


@dataclass(frozen=True)
class CoulombConstant:
    """Large-distance data of the normalized continuum potential.

    gtilde(x|0) = int d^2p/(2pi)^2 (e^{ipx}-1) u(p)/p^2 behaves like
    -(1/2pi) ln|x| + c_log + o(1).  The constant that enters the flow limits
    is c = 8*pi*c_log, i.e. e^c = lim_y w(y) for
    w(y) = y^4 exp(-8pi * gtilde(0|y)).
    """

    c: float              # ln lim_{y->inf} w(y) = 8*pi*c_log
    c_log: float          # additive constant of the log asymptotics
    slope: float          # fitted d gtilde / d ln|x|; should be -1/(2pi)
    fit_residual: float   # rms residual of the window fit
    w_limit_error: float  # relative gap between e^c and w(y) at the window edge


def _gtilde_normalized(cutoffs: CutoffFamily, r: float) -> float:
    """gtilde(x|0) at |x| = r, split into smooth and oscillatory parts."""
    lo = 1.0 / r

    def head(rho):
        return (special.j0(rho * r) - 1.0) * float(cutoffs.u_profile(rho)) / rho

    h, _ = integrate.quad(head, 1e-10, lo, limit=200, epsabs=1e-11)

    def nonosc(rho):
        return float(cutoffs.u_profile(rho)) / rho

    n1, _ = integrate.quad(nonosc, lo, 1.0, limit=200, epsabs=1e-11)
    n2, _ = integrate.quad(nonosc, 1.0, 200.0, limit=400, epsabs=1e-11)

    # oscillatory piece int_{1/r}^inf J0(rho r) u(rho) drho/rho in blocks
    # between consecutive Bessel zeros of the rescaled variable s = rho r
    def osc(s):
        return special.j0(s) * float(cutoffs.u_profile(s / r)) / s

    zeros = special.jn_zeros(0, 4000)
    prev = 1.0
    osc_total = 0.0
    for z in zeros:
        if z <= prev:
            continue
        val, _ = integrate.quad(osc, prev, z, limit=60, epsabs=1e-12)
        osc_total += val
        prev = z
        if z > 30.0 * r and abs(val) < 1e-13:
            break
    return (h + osc_total - (n1 + n2)) / (2.0 * math.pi)


def _c_log_closed_form(cutoffs: CutoffFamily) -> float:
    """c_log = (1/2pi)[ln2 - gamma_E + int_0^1 (1-u)/rho - int_1^inf u/rho].

    Splitting J0 - 1 at the scale 1/|x| turns the large-|x| limit of
    gtilde + (1/2pi)ln|x| into mass integrals of the profile alone.
    """
    euler_gamma = 0.5772156649015329

    def head(rho):
        return (1.0 - float(cutoffs.u_profile(rho))) / rho

    def tail(rho):
        return float(cutoffs.u_profile(rho)) / rho

    i1, _ = integrate.quad(head, 1e-9, 1.0, limit=200, epsabs=1e-11)
    corners = [math.sqrt(8.0) * cutoffs.gamma * math.pi * k for k in range(1, 40)]
    i2, _ = integrate.quad(tail, 1.0, 1e4, limit=2000, points=[c for c in corners if c < 1e4], epsabs=1e-11)
    return (math.log(2.0) - euler_gamma + i1 - i2) / (2.0 * math.pi)


def coulomb_constant_closed(cutoffs: CutoffFamily) -> float:
    """c = 8 pi c_log from the closed-form limit alone (fast path)."""
    return 8.0 * math.pi * _c_log_closed_form(cutoffs)


def coulomb_constant_c(cutoffs: CutoffFamily, window=(50.0, 200.0), npts: int = 3) -> CoulombConstant:
    """Window-fit gtilde(x|0) = slope*ln|x| + c_log, cross-checked two ways.

    The fit intercept is compared against the closed-form limit and the
    exponential against the finite-y value of w(y) = y^4 e^{-8pi gtilde(0|y)};
    a non-flat tail (fit rms above 1e-4) raises.
    """
    rs = np.geomspace(window[0], window[1], npts)
    vals = np.array([_gtilde_normalized(cutoffs, float(r)) for r in rs])
    A = np.vstack([np.log(rs), np.ones_like(rs)]).T
    (slope, c_log), *_ = np.linalg.lstsq(A, vals, rcond=None)
    fitted = A @ np.array([slope, c_log])
    residual = float(np.sqrt(np.mean((vals - fitted) ** 2)))
    closed = _c_log_closed_form(cutoffs)
    residual = max(residual, abs(float(c_log) - closed))
    if residual > 1e-4:
        raise RuntimeError(f"non-flat tail in the Coulomb-constant fit: rms residual {residual:.3e}")
    alpha_sq = 8.0 * math.pi
    c = alpha_sq * float(c_log)
    y = float(rs[-1])
    w = y**4 * math.exp(alpha_sq * float(vals[-1]))
    w_err = abs(w - math.exp(c)) / math.exp(c)
    return CoulombConstant(c=c, c_log=float(c_log), slope=float(slope), fit_residual=residual, w_limit_error=w_err)
