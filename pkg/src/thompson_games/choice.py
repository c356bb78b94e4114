"""Thompson-sampling choice probabilities for independent Gaussian beliefs.

The probability that action ``i`` produces the largest posterior draw is an
orthant probability of correlated normals.  Conditioning on the draw of
action ``i`` turns it into the one-dimensional integral::

    p_i = integral N(t; m_i, v_i) * prod_{k != i} Phi((t - m_k) / sqrt(v_k)) dt

which is evaluated here with a composite Gauss-Legendre rule whose panel
edges follow every Gaussian's location and scale.  The same reduction,
applied to the distribution conditional on ``theta_i == theta_k``, gives the
conditional-CDF factors needed for the gradients.

Action indices in this module are 0-based positions in the belief vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from . import _kernels

DEFAULT_TOL = 1e-10
MAX_TOL = 1e-3

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_RULE_LO = np.polynomial.legendre.leggauss(16)
_RULE_HI = np.polynomial.legendre.leggauss(24)
# panel edges, in units of each Gaussian's standard deviation
_OFFSETS = np.array([-8.0, -6.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0])
_MAX_REFINE = 8


@dataclass(frozen=True, eq=False)
class BeliefVector:
    """Posterior means and variances of one player's Gaussian beliefs."""

    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        m = np.array(self.means, dtype=float).ravel()
        v = np.array(self.variances, dtype=float).ravel()
        if m.shape != v.shape:
            raise ValueError("means and variances must have the same length")
        if m.size < 2:
            raise ValueError("a belief needs at least two actions")
        if not np.all(np.isfinite(m)):
            raise ValueError("means must be finite")
        if not np.all(v > 0):
            raise ValueError("variances must be strictly positive")
        if not np.all(v <= 1):
            raise ValueError("variances must not exceed the prior variance 1")
        m.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)

    def __len__(self):
        return self.means.size

    @property
    def sds(self) -> np.ndarray:
        return np.sqrt(self.variances)


@dataclass(frozen=True, eq=False)
class ChoiceDistribution:
    probs: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __getitem__(self, idx):
        return self.probs[idx]

    def __len__(self):
        return self.probs.size

    def __iter__(self):
        return iter(self.probs)


@dataclass(frozen=True, eq=False)
class ChoiceGradient:
    """Partial derivatives of one choice probability."""

    d_means: np.ndarray
    d_variances: np.ndarray


def _check_tol(tol):
    if not (0 < tol <= MAX_TOL):
        raise ValueError(f"tol must lie in (0, {MAX_TOL}], got {tol}")


def _check_index(belief, i):
    if not (0 <= i < len(belief)):
        raise IndexError(f"action index {i} out of range for {len(belief)} actions")


def _panel_edges(centers, scales):
    edges = np.unique((centers[:, None] + scales[:, None] * _OFFSETS).ravel())
    span = edges[-1] - edges[0]
    keep = np.concatenate(([True], np.diff(edges) > 1e-13 * max(span, 1.0)))
    return edges[keep]


def _nodes(edges, rule):
    x, w = rule
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _refine(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.sort(np.concatenate((edges, mids)))


def _adaptive(evaluate, edges, tol):
    """Run ``evaluate`` on a low- and high-order rule, bisecting panels until they agree."""
    for _ in range(_MAX_REFINE):
        lo = evaluate(*_nodes(edges, _RULE_LO))
        hi = evaluate(*_nodes(edges, _RULE_HI))
        if np.max(np.abs(hi - lo)) <= 0.1 * tol:
            return hi
        edges = _refine(edges)
    raise RuntimeError("quadrature failed to reach the requested tolerance")


def _orthant_integrals(means, sds, tol):
    """All ``K`` choice probabilities on one shared quadrature grid."""

    def evaluate(t, wt):
        z = (t[None, :] - means[:, None]) / sds[:, None]
        log_cdf = log_ndtr(z)
        log_pdf = -0.5 * z * z - np.log(sds)[:, None] - _LOG_SQRT_2PI
        integrand = np.exp(log_pdf + log_cdf.sum(axis=0)[None, :] - log_cdf)
        return integrand @ wt

    return _adaptive(evaluate, _panel_edges(means, sds), tol)


def _conditional_moments(mu, sd, other_means, other_sds, tol):
    """``(M0, M1)`` with ``M0 = E[prod Phi]`` and ``M1 = E[(T - mu) prod Phi]``, T ~ N(mu, sd^2)."""
    if other_means.size == 0:
        return 1.0, 0.0
    centers = np.concatenate(([mu], other_means))
    scales = np.concatenate(([sd], other_sds))

    def evaluate(t, wt):
        z = (t - mu) / sd
        dens = np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / sd
        zo = (t[None, :] - other_means[:, None]) / other_sds[:, None]
        f = dens * np.exp(log_ndtr(zo).sum(axis=0))
        return np.array([f @ wt, (f * (t - mu)) @ wt])

    m0, m1 = _adaptive(evaluate, _panel_edges(centers, scales), tol)
    return float(m0), float(m1)


def choice_probabilities_exact(belief: BeliefVector, tol: float = DEFAULT_TOL) -> ChoiceDistribution:
    """Probability that each action's posterior draw is the largest."""
    _check_tol(tol)
    m, s = belief.means, belief.sds
    if m.size == 2:
        z = (m[0] - m[1]) / np.sqrt(belief.variances.sum())
        probs = np.array([ndtr(z), ndtr(-z)])
    else:
        probs = _orthant_integrals(m, s, tol)
    return ChoiceDistribution(np.clip(probs, 0.0, 1.0))


def choice_probabilities_2(means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Vectorised two-action closed form; rows of ``means``/``variances`` are beliefs."""
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    z = (means[..., 0] - means[..., 1]) / np.sqrt(variances[..., 0] + variances[..., 1])
    return np.stack([ndtr(z), ndtr(-z)], axis=-1)


def degenerate_choice(means: np.ndarray) -> np.ndarray:
    """Choice distribution when every variance is zero: the largest mean wins.

    Exactly tied maxima share the mass equally.
    """
    means = np.asarray(means, dtype=float)
    top = means == means.max()
    return top / top.sum()


def slepian_lower_bound(belief: BeliefVector, i: int) -> float:
    """Product of pairwise win probabilities, a lower bound on ``p_i``."""
    _check_index(belief, i)
    m, v = belief.means, belief.variances
    others = np.arange(m.size) != i
    c = (m[i] - m[others]) / np.sqrt(v[i] + v[others])
    return float(np.prod(ndtr(c)))


def choice_probabilities_mc(belief: BeliefVector, samples: int, seed: int):
    """Monte-Carlo argmax frequencies and their binomial standard errors.

    Draws are made action by action in ascending order from
    ``numpy.random.default_rng(seed)``; ties go to the lowest index.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    gen = np.random.default_rng(seed)
    counts = _kernels.argmax_counts(gen, belief.means, belief.sds, samples)
    p = counts / samples
    se = np.sqrt(p * (1.0 - p) / samples)
    return ChoiceDistribution(p), se


def choice_gradients(belief: BeliefVector, i: int, tol: float = DEFAULT_TOL) -> ChoiceGradient:
    """Partial derivatives of ``p_i`` with respect to every mean and variance.

    With ``c_k = (m_i - m_k)/sqrt(v_i + v_k)`` and ``g_k = pdf(c_k)/sqrt(v_i + v_k)``
    (the density of ``theta_i - theta_k`` at zero)::

        dp_i/dm_k = -g_k * M0_k                                  (k != i)
        dp_i/dm_i = sum_k g_k * M0_k
        dp_i/dv_k = -g_k * E_k[(T - m_k) 1{T beats the rest}] / (2 v_k)
        dp_i/dv_i = sum_k g_k * E_k[(T - m_i) 1{T beats the rest}] / (2 v_i)

    where, for each ``k``, ``T`` is the common value of ``theta_i`` and
    ``theta_k`` given they are equal, and ``M0_k = P_k(T beats the rest)`` is
    the conditional CDF of the remaining ``K - 2`` comparisons.  For two
    actions ``M0 = 1`` and everything is closed form.
    """
    _check_index(belief, i)
    _check_tol(tol)
    m, v, s = belief.means, belief.variances, belief.sds
    K = m.size
    d_m = np.zeros(K)
    d_v = np.zeros(K)
    for k in range(K):
        if k == i:
            continue
        pair_var = v[i] + v[k]
        c = (m[i] - m[k]) / np.sqrt(pair_var)
        g = np.exp(-0.5 * c * c - _LOG_SQRT_2PI) / np.sqrt(pair_var)
        # T | theta_i == theta_k
        cond_var = v[i] * v[k] / pair_var
        cond_mean = (m[i] * v[k] + m[k] * v[i]) / pair_var
        rest = np.array([l for l in range(K) if l != i and l != k], dtype=int)
        m0, m1 = _conditional_moments(cond_mean, np.sqrt(cond_var), m[rest], s[rest], tol)
        d_m[k] = -g * m0
        d_m[i] += g * m0
        d_v[k] = -g * (m1 + (cond_mean - m[k]) * m0) / (2.0 * v[k])
        d_v[i] += g * (m1 + (cond_mean - m[i]) * m0) / (2.0 * v[i])
    return ChoiceGradient(d_m, d_v)
