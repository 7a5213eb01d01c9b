"""Separatrix initial condition by the stable/unstable fixed-point scheme.

Writing x_j = q_j + u_j, y_j = q_j + v_j and diagonalizing the linearized
flow along the envelope q_j gives the stable direction w+ = u + 2v and the
unstable direction w- = u - v.  The flow becomes a fixed-point problem for
the map T on weighted sequences,

    (Tw)+_j = (q_j/q_1)^2 w-_1 + sum_{s<j} (q_j/q_{s+1})^2 W+_s
    (Tw)-_j = -sum_{s>=j} (q_{s+1}/q_j) W-_s          (tail closed analytically)
    (Tw)0_j = sum_{s<j} rho^{j-1-s} W0_s              (surrogate channel)

whose unique fixed point in the ball |w+_j| <= tau h_j, |w-_j| <= tau h_j/2,
kappa_j <= (tau h_j)^2 with h_j = y_1 (1 + y_1 (j-1))^(-3/2) reconstructs
the separatrix x_1 = Sigma(y_1) = y_1 + w-_1.  An independent
bisection-shooting solver provides the cross-check oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .flow import FlowConfig, corrections, kosterlitz_q_array

__all__ = [
    "ManifoldProblem",
    "WeightedSequence",
    "diagonalize",
    "undiagonalize",
    "seq_norm",
    "apply_T",
    "FixedPointResult",
    "solve_fixed_point",
    "solve_shooting",
    "empirical_contraction",
    "separatrix_csv",
]


@dataclass(frozen=True)
class ManifoldProblem:
    y1: float
    J: int = 100_000
    tau: float = 0.1
    flow: FlowConfig = field(default_factory=FlowConfig)
    eps1: float = 0.05

    def __post_init__(self):
        if abs(self.y1) > self.eps1:
            raise ValueError(f"|y1| = {abs(self.y1)} above the admissible eps1 = {self.eps1}")
        if self.J < 8:
            raise ValueError("horizon too short")

    def h(self) -> np.ndarray:
        """Weight sequence h_j = y1 (1 + y1 (j-1))^(-3/2), j = 1..J."""
        y1 = abs(self.y1)
        js = np.arange(self.J, dtype=float)
        return y1 * (1.0 + y1 * js) ** -1.5

    def q(self) -> np.ndarray:
        return kosterlitz_q_array(self.y1, self.J)


@dataclass
class WeightedSequence:
    w_plus: np.ndarray
    w_minus: np.ndarray
    kappa: np.ndarray

    def copy(self) -> "WeightedSequence":
        return WeightedSequence(self.w_plus.copy(), self.w_minus.copy(), self.kappa.copy())

    @staticmethod
    def zero(J: int) -> "WeightedSequence":
        return WeightedSequence(np.zeros(J), np.zeros(J), np.zeros(J))


def diagonalize(u: float, v: float) -> tuple[float, float]:
    """(w+, w-) = (u + 2v, u - v)."""
    return u + 2.0 * v, u - v


def undiagonalize(w_plus: float, w_minus: float) -> tuple[float, float]:
    """(u, v) = ((w+ + 2 w-)/3, (w+ - w-)/3)."""
    return (w_plus + 2.0 * w_minus) / 3.0, (w_plus - w_minus) / 3.0


def seq_norm(seq: WeightedSequence, prob: ManifoldProblem) -> float:
    """Weighted sup norm: max over j of the three channel ratios."""
    th = prob.tau * prob.h()
    a = np.max(np.abs(seq.w_plus) / th)
    b = 2.0 * np.max(np.abs(seq.w_minus) / th)
    c = np.max(seq.kappa / th**2)
    return float(max(a, b, c))


def _tail_envelope(prob: ManifoldProblem) -> float:
    """sum_{s > J} q_{s+1} h_s^2 ~ q1^2 (1 + q1 J)^(-3) / 3 (positive y1)."""
    q1 = abs(prob.y1)
    if q1 == 0.0:
        return 0.0
    return q1 * q1 * (1.0 + q1 * prob.J) ** -3 / 3.0


def apply_T(seq: WeightedSequence, prob: ManifoldProblem) -> WeightedSequence:
    """One application of the fixed-point map T.

    Inputs outside the weighted ball are accepted but warned about: the
    contraction estimates only cover the ball, so the image may leave it.
    """
    J = prob.J
    if prob.y1 == 0.0:
        # all q_j vanish; the zero sequence is the (unique) fixed point
        return WeightedSequence.zero(J)
    if seq_norm(seq, prob) > 1.0 + 1e-9:
        warnings.warn("sequence outside the weighted ball; contraction not guaranteed", stacklevel=2)
    q = prob.q()
    q_next = np.append(q[1:], prob.y1 / (1.0 + abs(prob.y1) * J))
    u = (seq.w_plus + 2.0 * seq.w_minus) / 3.0
    v = (seq.w_plus - seq.w_minus) / 3.0
    x = q + u
    y = q + v

    cfg = prob.flow
    if cfg.mode == "limit" and not cfg.surrogate:
        Ft = np.zeros(J)
        Mt = np.zeros(J)
    else:
        Ft = np.empty(J)
        Mt = np.empty(J)
        for i in range(J):
            Ft[i], Mt[i] = corrections(i + 1, float(x[i]), float(y[i]), float(seq.kappa[i]), cfg)

    U = -(v * v) - q * q * q_next + Ft
    V = -(u * v) - q * q * q_next + Mt
    Wp = U + 2.0 * V + (2.0 * q - q_next) * q_next * seq.w_plus
    Wm = U - V

    # unstable channel: suffix sums plus the analytic tail closure, which
    # extends W- beyond J with its h^2 envelope
    suffix = np.cumsum((q_next * Wm)[::-1])[::-1]
    h = prob.h()
    tail = (Wm[-1] / h[-1] ** 2 if h[-1] > 0 else 0.0) * _tail_envelope(prob)
    w_minus_new = -(suffix + tail) / q
    # stable channel: prefix sums, seeded by the shared initial datum w-_1
    prefix = np.concatenate([[0.0], np.cumsum(Wp / q_next**2)[:-1]])
    w_plus_new = q * q * (seq.w_minus[0] / q[0] ** 2 + prefix)

    if cfg.surrogate:
        W0 = cfg.c_R * (seq.kappa**2 + seq.kappa * np.maximum(np.abs(x), np.abs(y)) + np.maximum(np.abs(x), np.abs(y)) ** 3)
        kap = np.empty(J)
        acc = 0.0
        for i in range(J):
            kap[i] = acc
            acc = cfg.rho * acc + W0[i]
    else:
        kap = np.zeros(J)
    return WeightedSequence(w_plus_new, w_minus_new, kap)


@dataclass
class FixedPointResult:
    sigma: float
    seq: WeightedSequence
    iterations: int
    residual: float
    in_ball: bool


def solve_fixed_point(prob: ManifoldProblem, tol: float = 1e-13, max_iter: int = 200) -> FixedPointResult:
    """Iterate T from zero; Sigma(y1) = y1 + w-_1 at the fixed point.

    Sigma is even in y1 (the flow's y-parity), so negative activities are
    solved at |y1|.
    """
    if prob.y1 == 0.0:
        return FixedPointResult(0.0, WeightedSequence.zero(prob.J), 0, 0.0, True)
    if prob.y1 < 0.0:
        pos = ManifoldProblem(y1=-prob.y1, J=prob.J, tau=prob.tau, flow=prob.flow, eps1=prob.eps1)
        return solve_fixed_point(pos, tol=tol, max_iter=max_iter)
    seq = WeightedSequence.zero(prob.J)
    prev_res = None
    for it in range(1, max_iter + 1):
        new = apply_T(seq, prob)
        diff = WeightedSequence(new.w_plus - seq.w_plus, new.w_minus - seq.w_minus,
                                np.abs(new.kappa - seq.kappa))
        res = seq_norm(diff, prob)
        seq = new
        if res <= tol:
            break
        if prev_res is not None and prev_res > 0 and res / prev_res > 0.95 and res > 100 * tol:
            raise RuntimeError(f"fixed-point iteration not contracting: ratio {res / prev_res:.3f}")
        prev_res = res
    sigma = prob.y1 + float(seq.w_minus[0])
    return FixedPointResult(sigma=sigma, seq=seq, iterations=it, residual=res,
                            in_ball=seq_norm(seq, prob) <= 1.0 + 1e-9)


# ---------------------------------------------------------------------------
# shooting oracle


def _classify(x1: float, y1: float, ceiling: float, j_max: int) -> str:
    """'unstable' if the growing-y side wins, 'stable' if y dies out.

    Below the separatrix y escapes towards the ceiling (with x running off
    to -infinity); above it the activity decays to zero while x stays
    bounded, never touching the ceiling, so the stable side is decided by
    entering the forward-invariant wedge 0 < 2y <= x (there y only decays),
    or by y crossing zero outright.
    """
    x, y = float(x1), float(y1)
    for _ in range(j_max):
        if y >= ceiling or x <= -ceiling:
            return "unstable"
        if y <= 0.0 or x >= ceiling or (x > 0.0 and x >= 2.0 * y):
            return "stable"
        x, y = x - y * y, y - x * y
    raise RuntimeError(f"shooting trajectory inconclusive after {j_max} steps")


def solve_shooting(y1: float, flow_config: FlowConfig | None = None,
                   bracket: tuple[float, float] = (0.0, 0.1), tol: float = 1e-10,
                   j_max: int = 10_000_000) -> float:
    """Bisection on x_1 between y-escape and y-death; only the quadratic flow.

    The surrogate-free limit-mode flow is hard-coded in the inner loop; a
    config requesting anything else is rejected to keep the oracle honest.
    """
    if flow_config is not None and (flow_config.mode != "limit" or flow_config.surrogate):
        raise ValueError("shooting oracle runs the bare quadratic flow only")
    ceiling = flow_config.ceiling if flow_config is not None else 1.0
    if y1 == 0.0:
        return 0.0
    # Sigma is even in y1 (flow parity), so shoot with |y1|
    y1 = abs(y1)
    lo, hi = bracket
    c_lo = _classify(lo, y1, ceiling, j_max)
    c_hi = _classify(hi, y1, ceiling, j_max)
    if c_lo == c_hi:
        raise ValueError(f"bracket {bracket} does not straddle the separatrix (both {c_lo})")
    if c_lo != "unstable":
        raise ValueError("expected the lower bracket edge on the unstable side")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _classify(mid, y1, ceiling, j_max) == "unstable":
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def empirical_contraction(prob: ManifoldProblem, n_samples: int = 100, seed: int = 7) -> float:
    """Max Lipschitz ratio of T over sampled pairs in the weighted ball."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    th = prob.tau * prob.h()
    worst = 0.0
    for _ in range(n_samples):
        mats = []
        for _ in range(2):
            wp = th * rng.uniform(-1.0, 1.0, prob.J)
            wm = 0.5 * th * rng.uniform(-1.0, 1.0, prob.J)
            kp = th**2 * rng.uniform(0.0, 1.0, prob.J)
            mats.append(WeightedSequence(wp, wm, kp))
        a, b = mats
        d = WeightedSequence(a.w_plus - b.w_plus, a.w_minus - b.w_minus, np.abs(a.kappa - b.kappa))
        dn = seq_norm(d, prob)
        if dn == 0.0:
            continue
        Ta = apply_T(a, prob)
        Tb = apply_T(b, prob)
        Td = WeightedSequence(Ta.w_plus - Tb.w_plus, Ta.w_minus - Tb.w_minus, np.abs(Ta.kappa - Tb.kappa))
        worst = max(worst, seq_norm(Td, prob) / dn)
    return worst


def separatrix_csv(rows: list[dict], path: str):
    """rows: dicts with y1, sigma_fixed_point, sigma_shooting, iterations, contraction."""
    cols = ["y1", "sigma_fixed_point", "sigma_shooting", "iterations", "contraction_estimate",
            "z", "s", "beta"]
    with open(path, "w", newline="\n") as f:
        f.write(",".join(cols) + "\n")
        for r in rows:
            f.write(",".join(f"{r[c]:.17g}" if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n")
