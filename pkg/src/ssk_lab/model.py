"""Disorder ensembles, spectral samples, and resolvent statistics.

The disorder matrix M is symmetric with zero diagonal and off-diagonal
entries -(g_ij + g_ji)/sqrt(2N) built from iid standard normals, so the
off-diagonal variance is 1/N.  Its companion H = M + diag(sqrt(2/N) g_ii)
shares M's off-diagonal entries bit for bit and is a full GOE matrix.  The
Gibbs weight used throughout the package is
exp[(beta/2) sigma^T M sigma + beta h v^T sigma] on the sphere |sigma|^2 = N,
and theta = h^2 beta is the single field-strength knob.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from . import rng as rngmod

FIELD_MODES = ("fixed_unit_direction", "uniform_on_sphere")
ENSEMBLES = ("zero_diag_M", "full_goe_H", "coupled_pair")

# regime gate margins; the asymptotic "sufficiently small eps" made concrete
GATE_TAU = 0.05
GATE_C = 0.05
GATE_SCALED_THETA_RANGE = (0.05, 20.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical knobs (N, beta, h) plus sampling options."""

    n_dim: int
    beta: float
    h: float = 0.0
    field_mode: str = "fixed_unit_direction"
    ensemble: str = "zero_diag_M"
    h_scaling: str = "fixed"  # fixed | intermediate | micro | custom-alpha

    def __post_init__(self):
        if self.n_dim < 2:
            raise ValueError("n_dim must be at least 2")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.h < 0:
            raise ValueError("h must be nonnegative")
        if self.field_mode not in FIELD_MODES:
            raise ValueError(f"field_mode must be one of {FIELD_MODES}")
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"ensemble must be one of {ENSEMBLES}")

    @property
    def theta(self) -> float:
        """theta = h^2 * beta, exact by construction."""
        return self.h * self.h * self.beta

    @property
    def theta_intermediate(self) -> float:
        """theta on the h ~ N^{-1/6} scale: h^2 beta N^{1/3}."""
        return self.theta * self.n_dim ** (1.0 / 3.0)

    @property
    def theta_micro(self) -> float:
        """theta on the h ~ N^{-1/2} scale: h^2 beta N."""
        return self.theta * self.n_dim

    @classmethod
    def from_theta(cls, n_dim: int, beta: float, theta: float, scaling: str = "fixed",
                   **kwargs) -> "ModelParams":
        """Back-derive h from a scaled theta: h = sqrt(theta N^{-p} / beta)."""
        power = {"fixed": 0.0, "intermediate": 1.0 / 3.0, "micro": 1.0}[scaling]
        h = float(np.sqrt(theta * n_dim ** (-power) / beta))
        return cls(n_dim=n_dim, beta=beta, h=h, h_scaling=scaling, **kwargs)


def classify_regime(params: ModelParams, margins_out: dict | None = None) -> str:
    """Regime tag for (N, beta, h): gaussian | intermediate | microscopic | outside.

    The gaussian gate requires (1-beta)_+ + theta/(|1-beta| + sqrt(theta))
    >= N^{-1/3 + tau}; the low-temperature gates require beta >= 1 + c and the
    correspondingly rescaled theta to sit inside a fixed window.  When the
    parameters were built with an explicit h-scaling, only that gate is
    consulted; otherwise the gates are tried gaussian, intermediate,
    microscopic in that order and the first match wins (margins for all
    three are reported either way).
    """
    n, beta, theta = params.n_dim, params.beta, params.theta
    q = max(1.0 - beta, 0.0)
    if theta > 0:
        q += theta / (abs(1.0 - beta) + np.sqrt(theta))
    gauss_floor = n ** (-1.0 / 3.0 + GATE_TAU)
    gauss_ok = (q >= gauss_floor) and (GATE_C < beta < 1.0 / GATE_C) and (params.h < 1.0 / GATE_C)
    lo, hi = GATE_SCALED_THETA_RANGE
    cold = beta >= 1.0 + GATE_C
    inter_ok = cold and lo <= params.theta_intermediate <= hi
    micro_ok = cold and lo <= params.theta_micro <= hi
    if margins_out is not None:
        margins_out.update(
            gaussian_q=q, gaussian_floor=gauss_floor, gaussian_pass=gauss_ok,
            theta_intermediate=params.theta_intermediate, intermediate_pass=inter_ok,
            theta_micro=params.theta_micro, microscopic_pass=micro_ok,
        )
    if params.h_scaling == "intermediate":
        return "intermediate" if inter_ok else "outside"
    if params.h_scaling == "micro":
        return "microscopic" if micro_ok else "outside"
    for tag, ok in (("gaussian", gauss_ok), ("intermediate", inter_ok),
                    ("microscopic", micro_ok)):
        if ok:
            return tag
    return "outside"


@dataclass
class SpectralSample:
    """One disorder realization: spectrum, field projections, provenance."""

    lambdas: np.ndarray            # descending eigenvalues of the primary matrix
    v_projs: np.ndarray            # v^T u_i for the same matrix
    seed: int
    params: ModelParams
    v_norm4: float                 # sum of v_i^4 in the coordinate basis
    paired_lambdas_H: np.ndarray | None = None
    paired_vprojs_H: np.ndarray | None = None
    has_exact_ties: bool = False

    @property
    def n_dim(self) -> int:
        return len(self.lambdas)

    @property
    def v1_sq(self) -> float:
        return float(self.v_projs[0] ** 2)

    def weights_sq(self) -> np.ndarray:
        return self.v_projs**2


class EigensolverError(RuntimeError):
    """Eigendecomposition failed; carries the sample metadata."""


def _build_disorder(params: ModelParams, seed: int):
    n = params.n_dim
    gen_m = rngmod.stream(seed, rngmod.LABEL_MATRIX)
    g = gen_m.standard_normal((n, n))
    m = -(g + g.T) / np.sqrt(2.0 * n)
    np.fill_diagonal(m, 0.0)
    gen_d = rngmod.stream(seed, rngmod.LABEL_DIAGONAL)
    diag = np.sqrt(2.0 / n) * gen_d.standard_normal(n)
    gen_v = rngmod.stream(seed, rngmod.LABEL_FIELD)
    if params.field_mode == "uniform_on_sphere":
        raw = gen_v.standard_normal(n)
        v = np.sqrt(n) * raw / np.linalg.norm(raw)
    else:
        v = np.ones(n)
    return m, diag, v


def _decompose(mat: np.ndarray, v: np.ndarray):
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise EigensolverError(f"eigensolver failed on {mat.shape[0]}x{mat.shape[0]} sample") from exc
    lambdas = vals[::-1].copy()
    projs = (vecs.T @ v)[::-1].copy()
    return lambdas, projs


def sample_spectral(params: ModelParams, seed: int) -> SpectralSample:
    """Draw one disorder realization, fully decomposed, reproducibly."""
    m, diag, v = _build_disorder(params, seed)
    n = params.n_dim
    if params.ensemble == "full_goe_H":
        primary = m + np.diag(diag)
    else:
        primary = m
    lambdas, projs = _decompose(primary, v)
    norm_sq = float(projs @ projs)
    if abs(norm_sq - n) > 1e-8 * n:
        raise EigensolverError("eigenvector basis lost the field norm")
    paired_l = paired_p = None
    if params.ensemble == "coupled_pair":
        paired_l, paired_p = _decompose(m + np.diag(diag), v)
    ties = bool(np.any(np.diff(lambdas) == 0.0))
    return SpectralSample(
        lambdas=lambdas, v_projs=projs, seed=seed, params=params,
        v_norm4=float(np.sum(v**4)),
        paired_lambdas_H=paired_l, paired_vprojs_H=paired_p,
        has_exact_ties=ties,
    )


def goe_eigenvalues(n: int, rng: np.random.Generator) -> np.ndarray:
    """Descending GOE eigenvalues via the tridiagonal beta-ensemble model.

    The symmetric tridiagonal matrix with diagonal N(0, 2/N) and
    sub-diagonal chi_{N-i}/sqrt(N) entries has exactly the GOE eigenvalue
    law (off-diagonal variance 1/N, edge at ±2) at a cost of O(N^2).
    Used where only eigenvalues are needed (reference edges, synthetic
    saddle systems); samples carrying eigenvector data use the dense path.
    """
    d = rng.standard_normal(n) * np.sqrt(2.0 / n)
    e = np.sqrt(rng.chisquare(np.arange(n - 1, 0, -1))) / np.sqrt(n)
    return eigvalsh_tridiagonal(d, e)[::-1].copy()


@dataclass
class ResolventStats:
    """Weighted spectral sums of one sample at a point z off the spectrum."""

    z: complex
    m: complex                 # N^{-1} tr (M - z)^{-1}
    m_v: complex               # N^{-1} v^T (M - z)^{-1} v
    m_tilde: complex           # same as m without the top eigenvalue
    m_v_tilde: complex
    trace_powers: dict         # k -> tr (M - z)^{-k}
    quad_powers: dict          # k -> v^T (M - z)^{-k} v


def resolvent_stats(sample: SpectralSample, z: complex, k_max: int = 2) -> ResolventStats:
    lam = sample.lambdas
    w = sample.weights_sq()
    n = sample.n_dim
    dist = np.min(np.abs(lam - z))
    scale = max(1.0, float(np.max(np.abs(lam))))
    if dist < 1e-12 * scale:
        raise ValueError("z collides with an eigenvalue")
    inv = 1.0 / (lam - z)
    m = np.sum(inv) / n
    m_v = np.sum(w * inv) / n
    m_t = np.sum(inv[1:]) / n
    m_vt = np.sum(w[1:] * inv[1:]) / n
    tr, qu = {}, {}
    p = inv.copy()
    for k in range(1, k_max + 1):
        tr[k] = complex(np.sum(p))
        qu[k] = complex(np.sum(w * p))
        p = p * inv
    if np.imag(z) == 0:
        m, m_v, m_t, m_vt = (float(np.real(x)) for x in (m, m_v, m_t, m_vt))
        tr = {k: float(np.real(v)) for k, v in tr.items()}
        qu = {k: float(np.real(v)) for k, v in qu.items()}
    return ResolventStats(z=z, m=m, m_v=m_v, m_tilde=m_t, m_v_tilde=m_vt,
                          trace_powers=tr, quad_powers=qu)
