"""Brute-force Coulomb-gas partition sums on tiny tori.

Configurations are labeled particles, each a (site, charge) slot out of
2*side^2 possibilities; the grand sum truncates at n_max particles.  All
sums are exact finite enumerations, vectorized over the last two particle
slots, with per-total-charge bookkeeping so the massless limit can be
watched sector by sector: non-neutral sectors carry the diverging
self-energy weight e^{-beta Q^2 W(0;m)/2} and die as m -> 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import TorusLattice, yukawa_table, normalized_potential_table

__all__ = [
    "ChargeConfiguration",
    "configuration_energy",
    "OracleResult",
    "oracle_lattice",
    "grand_Z",
    "neutral_Z",
    "siegert_kac_check",
    "pressure_estimate",
    "DEFAULT_M_SEQUENCE",
]

DEFAULT_M_SEQUENCE = (0.5, 0.25, 0.125, 0.0625)
MAX_SIDE = 7
MAX_N = 6


def oracle_lattice(side: int, m: float = 0.0) -> TorusLattice:
    """Small torus for brute-force sums; side odd, not tied to a gamma power."""
    return TorusLattice(L=side, R=1, gamma=side, m=m)


@dataclass(frozen=True)
class ChargeConfiguration:
    """Labeled particles: tuple of ((x0, x1), sigma) with sigma = +-1."""

    particles: tuple

    def __post_init__(self):
        for (_, sig) in self.particles:
            if sig not in (-1, 1):
                raise ValueError(f"charges must be +-1, got {sig}")

    @property
    def n(self) -> int:
        return len(self.particles)

    @property
    def total_charge(self) -> int:
        return sum(s for _, s in self.particles)


def configuration_energy(cfg: ChargeConfiguration, lattice: TorusLattice, normalized: bool = False):
    """Total energy H (self-energy included).

    normalized=False: H = (1/2) sum_ij s_i s_j W(x_i - x_j; m), needs m > 0.
    normalized=True: returns (neutral_part, charge_part) of the split
    H = (1/2) sum s s' W(x - x'|0; m-limit) + (Q^2/2) W(0; m); the first uses
    the zero-mode-subtracted potential at m = 0, the second is reported as
    the Q^2/2 multiplier of the (divergent) self-energy.
    """
    if not normalized:
        W = yukawa_table(lattice)
        side = lattice.side
        H = 0.0
        for (xi, si) in cfg.particles:
            for (xj, sj) in cfg.particles:
                H += si * sj * W[(xi[0] - xj[0]) % side, (xi[1] - xj[1]) % side]
        return 0.5 * H
    Wn = normalized_potential_table(TorusLattice(L=lattice.L, R=lattice.R, gamma=lattice.gamma, m=0.0))
    side = lattice.side
    Hn = 0.0
    for (xi, si) in cfg.particles:
        for (xj, sj) in cfg.particles:
            Hn += si * sj * Wn[(xi[0] - xj[0]) % side, (xi[1] - xj[1]) % side]
    Q = cfg.total_charge
    return 0.5 * Hn, 0.5 * Q * Q


def _slot_tables(side: int, W: np.ndarray):
    """Slot list [(site, sigma)] and the slot-coupling matrix V[a, b] = s s' W."""
    sites = [(x0, x1) for x0 in range(side) for x1 in range(side)]
    slots = [(p, 1) for p in sites] + [(p, -1) for p in sites]
    ns = len(slots)
    V = np.empty((ns, ns))
    for a, (pa, sa) in enumerate(slots):
        dx0 = (pa[0] - np.array([p[0] for p, _ in slots])) % side
        dx1 = (pa[1] - np.array([p[1] for p, _ in slots])) % side
        sg = sa * np.array([s for _, s in slots])
        V[a] = sg * W[dx0, dx1]
    sigma = np.array([s for _, s in slots])
    return slots, V, sigma


def _sector_sums(side: int, beta: float, n: int, W: np.ndarray) -> dict[int, float]:
    """sum over labeled n-particle configurations of e^{-beta H}, by total charge."""
    if n == 0:
        return {0: 1.0}
    slots, V, sigma = _slot_tables(side, W)
    ns = len(slots)
    diag = np.diag(V)
    out: dict[int, float] = {}
    if n == 1:
        w = np.exp(-0.5 * beta * diag)
        for q in (-1, 1):
            out[q] = float(np.sum(w[sigma == q]))
        return out
    if ns ** max(0, n - 2) > 3_000_000:
        raise ValueError(f"combinatorial budget exceeded: {ns} slots at n = {n}")
    # energy of the last two slots against each other and themselves
    E2 = diag[:, None] + diag[None, :] + 2.0 * V
    Q2 = sigma[:, None] + sigma[None, :]
    q_masks = {qv: Q2 == qv for qv in (-2, 0, 2)}
    for prefix in itertools.product(range(ns), repeat=n - 2):
        e_pre = 0.0
        cross = np.zeros(ns)
        q_pre = 0
        for i, a in enumerate(prefix):
            e_pre += diag[a]
            for b in prefix[:i]:
                e_pre += 2.0 * V[a, b]
            cross += V[a]
            q_pre += sigma[a]
        E = e_pre + E2 + 2.0 * (cross[:, None] + cross[None, :])
        wts = np.exp(-0.5 * beta * E)
        for qv, mask in q_masks.items():
            out[q_pre + qv] = out.get(q_pre + qv, 0.0) + float(np.sum(wts[mask]))
    return out


@dataclass
class OracleResult:
    beta: float
    z: float
    n_max: int
    side: int
    m_sequence: tuple
    # sector_terms[m][(n, Q)] = z^n/n! * configuration sum
    sector_terms: dict = field(default_factory=dict)

    def Z(self, m: float) -> float:
        return sum(self.sector_terms[m].values())

    def Z_neutral(self, m: float) -> float:
        return sum(v for (n, Q), v in self.sector_terms[m].items() if Q == 0)

    def sector_weight(self, m: float, Q: int) -> float:
        return sum(v for (n, q), v in self.sector_terms[m].items() if q == Q)

    def coefficient(self, m: float, n: int, neutral_only: bool = False) -> float:
        """Coefficient of z^n (configuration sum / n!)."""
        zn = self.z**n if self.z != 0 else (1.0 if n == 0 else 0.0)
        tot = sum(
            v for (nn, Q), v in self.sector_terms[m].items()
            if nn == n and (Q == 0 or not neutral_only)
        )
        if self.z == 0:
            return tot if n == 0 else 0.0
        return tot / zn


def _check_budget(lattice: TorusLattice, n_max: int):
    if lattice.side > MAX_SIDE:
        raise ValueError(f"oracle torus side {lattice.side} above the budget {MAX_SIDE}")
    if n_max > MAX_N:
        raise ValueError(f"oracle n_max {n_max} above the budget {MAX_N}")


def grand_Z(lattice: TorusLattice, beta: float, z: float, n_max: int,
            m_sequence=DEFAULT_M_SEQUENCE) -> OracleResult:
    """Exact per-n, per-charge-sector sums along a decreasing mass sequence."""
    _check_budget(lattice, n_max)
    if any(m <= 0 for m in m_sequence):
        raise ValueError("masses in the sequence must be positive")
    res = OracleResult(beta=beta, z=z, n_max=n_max, side=lattice.side, m_sequence=tuple(m_sequence))
    for m in m_sequence:
        lat_m = TorusLattice(L=lattice.L, R=lattice.R, gamma=lattice.gamma, m=m)
        W = yukawa_table(lat_m)
        terms = {}
        for n in range(n_max + 1):
            zn = z**n / math.factorial(n)
            for Q, s in _sector_sums(lattice.side, beta, n, W).items():
                terms[(n, Q)] = terms.get((n, Q), 0.0) + zn * s
        res.sector_terms[m] = terms
    return res


def neutral_Z(lattice: TorusLattice, beta: float, z: float, n_max: int) -> OracleResult:
    """Direct m = 0 evaluation: neutral sectors with the normalized potential."""
    _check_budget(lattice, n_max)
    lat0 = TorusLattice(L=lattice.L, R=lattice.R, gamma=lattice.gamma, m=0.0)
    Wn = normalized_potential_table(lat0)
    res = OracleResult(beta=beta, z=z, n_max=n_max, side=lattice.side, m_sequence=(0.0,))
    terms = {}
    for n in range(n_max + 1):
        if n % 2 == 1:
            continue  # no neutral configurations at odd n
        zn = z**n / math.factorial(n)
        for Q, s in _sector_sums(lattice.side, beta, n, Wn).items():
            if Q == 0:
                terms[(n, 0)] = terms.get((n, 0), 0.0) + zn * s
    res.sector_terms[0.0] = terms
    return res


@dataclass
class SiegertKacReport:
    beta: float
    s: float
    alpha_sq: float
    max_rel_mismatch: float
    per_n: dict

    @property
    def passed(self) -> bool:
        return self.max_rel_mismatch <= 1e-10


def siegert_kac_check(lattice: TorusLattice, beta: float, z: float, n_max: int,
                      s: float = 0.0, m: float = 0.5) -> SiegertKacReport:
    """Coefficient-level identity between the configuration sum and the
    Gaussian characteristic function with the quadratic split.

    Configuration side: masses shifted to m/sqrt(1-s).  Field side: the
    Gaussian measure of covariance alpha^2 (m^2 - (1-s) Delta)^(-1) (the
    split measure at alpha^2 = (1-s) beta) evaluated in closed form; its
    characteristic function reproduces e^{-beta H} exactly, so the z^n
    coefficients must agree to rounding.
    """
    _check_budget(lattice, n_max)
    if not (0.0 <= s < 0.5):
        raise ValueError(f"s must be in [0, 1/2), got {s}")
    alpha_sq = (1.0 - s) * beta
    # configuration side
    lat_shift = TorusLattice(L=lattice.L, R=lattice.R, gamma=lattice.gamma, m=m / math.sqrt(1.0 - s))
    W_conf = yukawa_table(lat_shift)
    # field side: Cov(x) = alpha^2 * ifft[ 1 / (m^2 + (1-s) lam) ]; the
    # characteristic function weight for a configuration is
    # exp(-(1/2) sum s s' Cov) and the comparison divides out beta
    k = lattice.momenta()
    lam = 4.0 - 2.0 * np.cos(k[:, None]) - 2.0 * np.cos(k[None, :])
    cov = alpha_sq * np.fft.ifft2(1.0 / (m * m + (1.0 - s) * lam)).real
    W_field = cov / beta  # equals W(x; m/sqrt(1-s)) when the split is right
    per_n = {}
    worst = 0.0
    for n in range(n_max + 1):
        a = _sector_sums(lattice.side, beta, n, W_conf)
        b = _sector_sums(lattice.side, beta, n, W_field)
        for Q in set(a) | set(b):
            va, vb = a.get(Q, 0.0), b.get(Q, 0.0)
            scale = max(abs(va), abs(vb), 1e-300)
            rel = abs(va - vb) / scale
            per_n[(n, Q)] = rel
            worst = max(worst, rel)
    rep = SiegertKacReport(beta=beta, s=s, alpha_sq=alpha_sq, max_rel_mismatch=worst, per_n=per_n)
    if not rep.passed:
        raise RuntimeError(f"Siegert-Kac mismatch {worst:.3e} beyond 1e-10")
    return rep


def pressure_estimate(lattice: TorusLattice, beta: float, z: float, n_max: int) -> float:
    """(beta |Lambda|)^-1 ln Z from the neutral sums; finite-size value only."""
    res = neutral_Z(lattice, beta, z, n_max)
    Z = res.Z(0.0)
    if Z <= 0.0:
        raise ValueError("nonpositive partition sum (numeric underflow?)")
    return math.log(Z) / (beta * lattice.n_sites)
