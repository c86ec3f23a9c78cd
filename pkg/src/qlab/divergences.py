"""Unbounded (complexity-unrestricted) information quantities.

All logarithms are natural; values are in nats.  Divergences that diverge
return an :class:`Infinite` tag carrying a witness (a vector or index proving
the support violation) rather than a large float, so downstream inequality
checks can short-circuit correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .tensor import (
    DensityMatrix,
    HermitianOperator,
    InvariantViolation,
    PovmEffect,
    effect,
    herm_eig,
)

LN2 = math.log(2.0)


class Infinite:
    """Tagged +infinity with a witness for the support violation."""

    def __init__(self, witness=None):
        self.witness = witness

    def __float__(self):
        return math.inf

    def __repr__(self):
        return "Infinite()"

    def __eq__(self, other):
        return isinstance(other, Infinite) or other == math.inf

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return float(other) == math.inf

    def __gt__(self, other):
        return float(other) != math.inf

    def __ge__(self, other):
        return True

    def __neg__(self):
        return -math.inf

    def __hash__(self):
        return hash(math.inf)


def is_infinite(x) -> bool:
    return isinstance(x, Infinite) or (isinstance(x, float) and math.isinf(x))


def as_float(x) -> float:
    return float(x)


def binary_entropy(p: float) -> float:
    """h2(p) in nats with the 0 log 0 = 0 convention."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)


def _matrix(x) -> np.ndarray:
    if isinstance(x, (DensityMatrix, PovmEffect)):
        return x.entries
    if isinstance(x, HermitianOperator):
        return x.entries
    return np.asarray(x, dtype=complex)


# ---------------------------------------------------------------------------
# Neyman-Pearson machinery
# ---------------------------------------------------------------------------

@dataclass
class NpCurvePoint:
    """One operating point of the randomized threshold test family.

    ``effect`` is the positive-part projector of (rho - t sigma) plus
    fractional weight ``lam`` spread uniformly on the kernel eigenspace.
    """

    t: float
    alpha: float
    beta: float
    effect: np.ndarray
    lam: float = 0.0


def _threshold_split(rho: np.ndarray, sigma: np.ndarray, t: float, kernel_tol: float):
    """Eigen-split of rho - t*sigma into positive / kernel / negative parts."""
    delta = rho - t * sigma
    w, v = herm_eig(delta, herm_tol=1e-7)
    scale = max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    tol = kernel_tol * scale
    pos = w > tol
    ker = np.abs(w) <= tol
    p_pos = v[:, pos] @ v[:, pos].conj().T if pos.any() else np.zeros_like(delta)
    p_ker = v[:, ker] @ v[:, ker].conj().T if ker.any() else np.zeros_like(delta)
    return p_pos, p_ker


def _np_point(rho: np.ndarray, sigma: np.ndarray, t: float, kernel_tol: float = 1e-10):
    p_pos, p_ker = _threshold_split(rho, sigma, t, kernel_tol)
    a_pos = float(np.trace(p_pos @ rho).real)
    a_ker = float(np.trace(p_ker @ rho).real)
    b_pos = float(np.trace(p_pos @ sigma).real)
    b_ker = float(np.trace(p_ker @ sigma).real)
    return p_pos, p_ker, a_pos, a_ker, b_pos, b_ker


def hypothesis_testing_re(rho, sigma, eps: float, kernel_tol: float = 1e-10):
    """Optimal hypothesis-testing relative entropy without gate restrictions.

    Computes ``-log min Tr[L sigma]`` over effects ``0 <= L <= I`` with
    ``Tr[L rho] >= 1 - eps`` by sweeping the randomized threshold family
    ``L_t = {rho - t sigma > 0} + lam * P_ker`` and picking the fractional
    boundary weight that meets the type-I constraint exactly.  ``sigma`` may
    be any positive-semidefinite operator (it is not renormalized), which is
    what compression against the unnormalized identity needs.

    Returns ``(value, effect)``; ``value`` is ``Infinite`` with a witness
    exactly when zero type-II error is achievable.
    """
    if not (0.0 <= eps < 1.0):
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    r = _matrix(rho)
    s = _matrix(sigma)
    if r.shape != s.shape:
        raise InvariantViolation(f"dimension mismatch {r.shape} vs {s.shape}")
    target = 1.0 - eps

    # Free acceptance mass outside the support of sigma.
    ws, vs = herm_eig(s, herm_tol=1e-7)
    s_scale = max(1.0, float(np.max(np.abs(ws))))
    outside = ws <= 1e-11 * s_scale
    if outside.any():
        p_out = vs[:, outside] @ vs[:, outside].conj().T
        block = p_out @ r @ p_out
        free_mass = float(np.trace(block).real)
        if free_mass >= target - 1e-12:
            wit_w, wit_v = herm_eig(block, herm_tol=1e-7)
            return Infinite(witness=wit_v[:, 0]), effect(p_out, bound_tol=1e-7)

    # Bisection on the threshold; alpha(t) is non-decreasing in t.
    t_lo, t_hi = 0.0, 1.0
    for _ in range(200):
        _, _, a_pos, a_ker, b_pos, b_ker = _np_point(r, s, t_hi, kernel_tol)
        if a_pos + a_ker < target:
            break
        t_lo = t_hi
        t_hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the threshold; sigma may be numerically singular")

    for _ in range(200):
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid == t_lo or t_mid == t_hi:
            break
        _, _, a_pos, a_ker, _, _ = _np_point(r, s, t_mid, kernel_tol)
        if a_pos + a_ker >= target:
            t_lo = t_mid
        else:
            t_hi = t_mid

    p_pos, p_ker, a_pos, a_ker, b_pos, b_ker = _np_point(r, s, t_lo, kernel_tol)
    if a_pos >= target or a_ker <= 0.0:
        lam = 0.0
        # pure projector test may overshoot the constraint; that is optimal
        # when the curve jumps (degenerate/commuting case handled by kernel)
        beta = b_pos
        lam_op = p_pos
        alpha_acc = a_pos
    else:
        lam = min(1.0, max(0.0, (target - a_pos) / a_ker))
        beta = b_pos + lam * b_ker
        lam_op = p_pos + lam * p_ker
        alpha_acc = a_pos + lam * a_ker
    if alpha_acc < target - 1e-9:
        raise RuntimeError(
            f"threshold sweep missed the type-I constraint: {alpha_acc} < {target}"
        )
    lam_eff = effect(lam_op, bound_tol=1e-7)
    if beta <= 0.0:
        return Infinite(witness=t_lo), lam_eff
    return -math.log(beta), lam_eff


def np_curve_points(rho, sigma, thresholds=None, kernel_tol: float = 1e-10):
    """Operating points (alpha, beta) of the threshold family on a t-grid.

    By default the grid contains the generalized eigenvalues of the pencil
    (rho, sigma) plus geometric refinements between them; these are the
    extreme points needed to optimize any quasi-convex two-outcome divergence.
    """
    r = _matrix(rho)
    s = _matrix(sigma)
    if thresholds is None:
        thresholds = pencil_thresholds(r, s)
    pts = []
    for t in thresholds:
        p_pos, p_ker, a_pos, a_ker, b_pos, b_ker = _np_point(r, s, t, kernel_tol)
        pts.append(NpCurvePoint(t=t, alpha=1.0 - a_pos, beta=b_pos, effect=p_pos, lam=0.0))
        if a_ker > 1e-15 or b_ker > 1e-15:
            pts.append(
                NpCurvePoint(
                    t=t,
                    alpha=1.0 - a_pos - a_ker,
                    beta=b_pos + b_ker,
                    effect=p_pos + p_ker,
                    lam=1.0,
                )
            )
    return pts


def pencil_thresholds(rho: np.ndarray, sigma: np.ndarray, refine: int = 12) -> list:
    """Candidate thresholds: generalized eigenvalues of (rho, sigma), refined."""
    ws, vs = herm_eig(sigma, herm_tol=1e-7)
    s_scale = max(1.0, float(np.max(np.abs(ws))))
    inside = ws > 1e-11 * s_scale
    if inside.any():
        isqrt = vs[:, inside] * (1.0 / np.sqrt(ws[inside]))
        pencil = isqrt.conj().T @ rho @ isqrt
        gen = np.linalg.eigvalsh((pencil + pencil.conj().T) / 2.0)
        gen = sorted(set(float(g) for g in gen if g > -1e-12))
    else:
        gen = []
    ts = {0.0}
    for g in gen:
        ts.add(max(g, 0.0))
    gs = sorted(ts)
    out = set(gs)
    for a, b in zip(gs[:-1], gs[1:]):
        for k in range(1, refine):
            out.add(a + (b - a) * k / refine)
    top = gs[-1] if gs else 1.0
    for k in range(1, refine + 1):
        out.add(top * (1.0 + k))
    return sorted(out)


# ---------------------------------------------------------------------------
# Entropic quantities
# ---------------------------------------------------------------------------

def umegaki_re(rho, sigma):
    """Umegaki relative entropy Tr[rho(log rho - log sigma)], nats.

    Returns ``Infinite`` with an eigenvector witness when the support of rho
    is not contained in the support of sigma.
    """
    r = _matrix(rho)
    s = _matrix(sigma)
    if r.shape != s.shape:
        raise InvariantViolation(f"dimension mismatch {r.shape} vs {s.shape}")
    wr, vr = herm_eig(r, herm_tol=1e-7)
    ws, vs = herm_eig(s, herm_tol=1e-7)
    tol_r = 1e-11 * max(1.0, float(np.max(np.abs(wr))))
    tol_s = 1e-11 * max(1.0, float(np.max(np.abs(ws))))
    ker_s = vs[:, ws <= tol_s]
    if ker_s.shape[1]:
        # Any rho-eigenvector with weight in ker(sigma) witnesses divergence.
        for j in range(len(wr)):
            if wr[j] > tol_r and np.linalg.norm(ker_s.conj().T @ vr[:, j]) > 1e-7:
                return Infinite(witness=ker_s[:, int(np.argmax(np.linalg.norm(ker_s.conj().T @ vr[:, j : j + 1], axis=1)))])
    term_r = float(sum(w * math.log(w) for w in wr if w > tol_r))
    supp_s = ws > tol_s
    log_s = (vs[:, supp_s] * np.log(ws[supp_s])) @ vs[:, supp_s].conj().T
    term_cross = float(np.trace(r @ log_s).real)
    return term_r - term_cross


def _log_on_support(a: np.ndarray, tol: float = 1e-11):
    w, v = herm_eig(a, herm_tol=1e-7)
    scale = max(1.0, float(np.max(np.abs(w))))
    supp = w > tol * scale
    log_a = (v[:, supp] * np.log(w[supp])) @ v[:, supp].conj().T
    p_supp = v[:, supp] @ v[:, supp].conj().T
    return log_a, p_supp


def re_variance(rho, sigma):
    """Relative-entropy variance Tr[rho (log rho - log sigma)^2] - D^2.

    Exact for commuting (in particular diagonal/classical) inputs; requires
    supp(rho) within supp(sigma), otherwise returns ``Infinite``.
    """
    d = umegaki_re(rho, sigma)
    if is_infinite(d):
        return Infinite(witness=d.witness)
    r = _matrix(rho)
    s = _matrix(sigma)
    log_r, p_r = _log_on_support(r)
    log_s, _ = _log_on_support(s)
    m = log_r - log_s
    # restrict to supp(rho): outside it rho has no weight
    m = p_r @ m @ p_r
    v = float(np.trace(r @ m @ m).real) - d * d
    return max(v, 0.0)


def renyi_divergence(p, q, alpha: float):
    """Classical Renyi divergence of order alpha (alpha > 0, alpha != 1), nats."""
    if alpha <= 0.0 or alpha == 1.0:
        raise ValueError("alpha must be positive and different from 1; use umegaki_re at alpha=1")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_distribution(p)
    _check_distribution(q)
    acc = 0.0
    for i, (pi, qi) in enumerate(zip(p, q)):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            if alpha > 1.0:
                return Infinite(witness=i)
            continue  # alpha < 1: q^(1-alpha) -> 0
        acc += pi**alpha * qi ** (1.0 - alpha)
    if acc <= 0.0:
        return Infinite(witness=None)
    return math.log(acc) / (alpha - 1.0)


def max_relative_entropy(p, q):
    """Classical max-relative entropy log max_i p_i/q_i over the support of p."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    best = -math.inf
    for i, (pi, qi) in enumerate(zip(p, q)):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            return Infinite(witness=i)
        best = max(best, math.log(pi / qi))
    if best == -math.inf:
        return 0.0
    return best


def classical_relative_entropy(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    acc = 0.0
    for i, (pi, qi) in enumerate(zip(p, q)):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            return Infinite(witness=i)
        acc += pi * math.log(pi / qi)
    return acc


def classical_re_variance(p, q):
    d = classical_relative_entropy(p, q)
    if is_infinite(d):
        return Infinite(witness=d.witness)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    acc = 0.0
    for pi, qi in zip(p, q):
        if pi <= 0.0:
            continue
        acc += pi * math.log(pi / qi) ** 2
    return max(acc - d * d, 0.0)


def _check_distribution(p: np.ndarray, tol: float = 1e-9):
    if np.any(p < -tol):
        raise InvariantViolation("negative probability entry")
    if abs(float(np.sum(p)) - 1.0) > tol:
        raise InvariantViolation(f"distribution sums to {float(np.sum(p))!r}, not 1")


def total_variation(rho, sigma):
    """Trace distance and the effect achieving it (positive-eigenspace projector)."""
    r = _matrix(rho)
    s = _matrix(sigma)
    if r.shape != s.shape:
        raise InvariantViolation(f"dimension mismatch {r.shape} vs {s.shape}")
    w, v = herm_eig(r - s, herm_tol=1e-7)
    pos = w > 0.0
    p_pos = v[:, pos] @ v[:, pos].conj().T if pos.any() else np.zeros_like(r)
    value = float(np.trace(p_pos @ (r - s)).real)
    return max(value, 0.0), effect(p_pos, bound_tol=1e-7)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(-sum(x * math.log(x) for x in p if x > 0.0))


def von_neumann_entropy(rho) -> float:
    w, _ = herm_eig(_matrix(rho), herm_tol=1e-7)
    return float(-sum(x * math.log(x) for x in w if x > 1e-14))


@dataclass
class DivergenceReport:
    """Summary of the standard divergences between one pair of states."""

    relative_entropy: object
    variance: object
    max_relative_entropy: object
    renyi: dict = field(default_factory=dict)

    def __post_init__(self):
        if not is_infinite(self.variance) and float(self.variance) < 0.0:
            raise InvariantViolation("relative entropy variance must be nonnegative")
        if not is_infinite(self.relative_entropy) and not is_infinite(self.max_relative_entropy):
            if float(self.relative_entropy) > float(self.max_relative_entropy) + 1e-9:
                raise InvariantViolation("relative entropy exceeds max-relative entropy")

    def to_json_dict(self) -> dict:
        def enc(x):
            return "inf" if is_infinite(x) else float(x)

        return {
            "relative_entropy": enc(self.relative_entropy),
            "variance": enc(self.variance),
            "max_relative_entropy": enc(self.max_relative_entropy),
            "renyi": {str(a): enc(v) for a, v in self.renyi.items()},
        }


def divergence_report(p, q, alphas=(0.5, 1.5, 2.0)) -> DivergenceReport:
    return DivergenceReport(
        relative_entropy=classical_relative_entropy(p, q),
        variance=classical_re_variance(p, q),
        max_relative_entropy=max_relative_entropy(p, q),
        renyi={a: renyi_divergence(p, q, a) for a in alphas},
    )
