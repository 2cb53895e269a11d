"""Adaptive quadrature building blocks for the contour evaluators.

Everything here is overflow-safe by construction: vertical-line integrands
are always evaluated relative to their value at the contour's real crossing
point (the saddle), so the exponentials stay O(1) even for large N, and the
assembled results are carried as ``LogScaledValue``.

The panel-based adaptive Simpson rule is batched: candidate panels are
refined in vectorized sweeps, which keeps the O(N) spectral-sum integrands
cheap.  The accepted panel mesh is reused for tensor-product 2-D integrals,
whose error is estimated by a coarsened-mesh comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class QuadratureSpec:
    """Contour description and step control for the exact evaluators."""

    truncation: float | None = None  # half-length of the vertical contour; None = auto
    max_step: float | None = None
    min_step: float = 1e-13
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    contour_kind: str = "vertical_line"  # vertical_line | keyhole | product_2d
    max_refine: int = 48

    def __post_init__(self):
        if self.truncation is not None and self.truncation <= 0:
            raise ValueError("truncation must be positive")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step is not None and self.min_step >= self.max_step:
            raise ValueError("min_step must be below max_step")


@dataclass
class LogScaledValue:
    """A positive scalar stored as log magnitude plus sign."""

    log_magnitude: float
    sign: float = 1.0
    error_estimate: float = 0.0  # relative error of the linear-scale value

    def __post_init__(self):
        if not np.isfinite(self.log_magnitude):
            raise ValueError("log magnitude must be finite")
        if self.error_estimate < 0:
            raise ValueError("error estimate must be nonnegative")

    @property
    def value(self) -> float:
        return self.sign * float(np.exp(self.log_magnitude))


class QuadratureError(RuntimeError):
    """Raised when a tail bound or refinement budget cannot be met."""


def _kahan_sum(values: np.ndarray) -> float:
    """Compensated summation so panel order cannot affect the result."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


@dataclass
class PanelMesh:
    """Accepted panels of one adaptive pass: edges[i] .. edges[i+1]."""

    edges: np.ndarray

    def simpson_nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Composite Simpson nodes/weights, one (a, m, b) triple per panel."""
        a = self.edges[:-1]
        b = self.edges[1:]
        m = 0.5 * (a + b)
        h = b - a
        nodes = np.concatenate([a, m, b])
        weights = np.concatenate([h / 6.0, 4.0 * h / 6.0, h / 6.0])
        return nodes, weights

    def coarsened(self) -> "PanelMesh":
        """Merge panels pairwise (drops every other interior edge)."""
        if len(self.edges) <= 2:
            return self
        keep = list(range(0, len(self.edges), 2))
        if keep[-1] != len(self.edges) - 1:
            keep.append(len(self.edges) - 1)
        return PanelMesh(self.edges[keep])


def adaptive_simpson(f, a: float, b: float, abs_tol: float, min_step: float = 1e-13,
                     max_refine: int = 48, init_panels: int = 8):
    """Batched adaptive Simpson for a vectorized integrand on [a, b].

    ``f`` maps an array of abscissae to an array of (possibly complex)
    values.  Returns ``(value, error_estimate, mesh)``.
    """
    edges = np.linspace(a, b, init_panels + 1)
    lo = edges[:-1]
    hi = edges[1:]
    fl = np.asarray(f(lo))
    fh = np.asarray(f(hi))
    fm = np.asarray(f(0.5 * (lo + hi)))
    accepted: list[tuple[float, complex, float]] = []  # (left edge, panel value, panel err)
    length = b - a

    for _ in range(max_refine):
        h = hi - lo
        s1 = h / 6.0 * (fl + 4.0 * fm + fh)
        ml = 0.5 * (lo + 0.5 * (lo + hi))
        mr = 0.5 * (0.5 * (lo + hi) + hi)
        fml = np.asarray(f(ml))
        fmr = np.asarray(f(mr))
        mid = 0.5 * (lo + hi)
        s2 = h / 12.0 * (fl + 4.0 * fml + fm) + h / 12.0 * (fm + 4.0 * fmr + fh)
        err = np.abs(s2 - s1) / 15.0
        tol_here = abs_tol * h / length
        done = (err <= tol_here) | (h <= 2.0 * min_step)
        for i in np.nonzero(done)[0]:
            accepted.append((lo[i], s2[i] + (s2[i] - s1[i]) / 15.0, err[i]))
        todo = ~done
        if not np.any(todo):
            break
        lo, hi, mid = lo[todo], hi[todo], mid[todo]
        fl, fm, fh = fl[todo], fm[todo], fh[todo]
        fml, fmr = fml[todo], fmr[todo]
        lo = np.concatenate([lo, mid])
        hi = np.concatenate([mid, hi])
        fl = np.concatenate([fl, fm])
        fh = np.concatenate([fm, fh])
        fm = np.concatenate([fml, fmr])
    else:
        raise QuadratureError("adaptive refinement budget exhausted")

    accepted.sort(key=lambda t: t[0])
    value = _kahan_sum(np.real([v for _, v, _ in accepted]))
    if np.iscomplexobj(fl) or any(abs(np.imag(v)) > 0 for _, v, _ in accepted):
        value = value + 1j * _kahan_sum(np.imag([v for _, v, _ in accepted]))
    error = _kahan_sum([e for _, _, e in accepted])
    edges_out = np.array([t[0] for t in accepted] + [b])
    return value, float(error), PanelMesh(edges_out)


def vertical_line_integral(rel_exponent, n_half: float, d2_at_saddle: float,
                           spec: QuadratureSpec):
    """log of I = ∫_{-T}^{T} exp[rel_exponent(t)] dt on a vertical contour.

    ``rel_exponent(t)`` is the exponent relative to its t = 0 value; it must
    satisfy the conjugate symmetry f(-t) = conj(f(t)), which is asserted on
    probe points, so the integral equals 2 ∫_0^T Re exp[f(t)] dt.
    ``n_half`` is N/2 (drives the tail bound), ``d2_at_saddle`` the second
    derivative of the full exponent at the crossing, used for the initial
    truncation guess.  Returns (log_value, rel_error, mesh, T).
    """
    width = 1.0 / np.sqrt(abs(d2_at_saddle)) if d2_at_saddle else 1.0
    T = spec.truncation if spec.truncation is not None else 20.0 * width

    # conjugate-symmetry check on 10 probe points
    probes = np.linspace(T / 11.0, T, 10)
    up = rel_exponent(probes)
    dn = rel_exponent(-probes)
    if not np.allclose(np.exp(up), np.conj(np.exp(dn)), rtol=1e-8, atol=1e-12):
        raise QuadratureError("integrand violates conjugate symmetry")

    def integrand(t):
        return np.real(np.exp(rel_exponent(t)))

    tail_exp = max(n_half - 2.0, 1.0)
    for _ in range(60):
        wT = abs(np.exp(rel_exponent(np.array([T]))[0]))
        tail = wT * T / tail_exp
        if tail <= spec.abs_tol + spec.rel_tol * width:
            break
        T *= 2.0
    else:
        raise QuadratureError("tail bound unattainable within truncation limit")

    target = max(spec.abs_tol, spec.rel_tol * width)
    value, err, mesh = adaptive_simpson(integrand, 0.0, T, abs_tol=target,
                                        min_step=spec.min_step,
                                        max_refine=spec.max_refine)
    total = 2.0 * value
    if total <= 0:
        raise QuadratureError("vertical-line integral evaluated nonpositive")
    rel_err = (2.0 * err + tail) / total
    return float(np.log(total)), float(rel_err), mesh, T


def tensor_product_integral(factor_exponent, braces, mesh: PanelMesh):
    """∬ braces(t1, t2) exp[f(t1) + f(t2)] dt1 dt2 over the mirrored mesh.

    ``factor_exponent`` is the same relative exponent used for the 1-D pass;
    the mesh (on [0, T]) is mirrored to negative t.  ``braces(t1, t2)`` must
    accept meshgrid arrays.  Returns (value, error_estimate); the value is
    real up to roundoff (conjugation symmetry) and returned as float.
    """

    def evaluate(m: PanelMesh) -> float:
        nodes, weights = m.simpson_nodes_weights()
        t = np.concatenate([-nodes, nodes])
        w = np.concatenate([weights, weights])
        expo = factor_exponent(t)
        f = np.exp(expo)
        t1, t2 = np.meshgrid(t, t, indexing="ij")
        vals = braces(t1, t2) * np.outer(f, f)
        return float(np.real(np.einsum("i,j,ij->", w, w, vals)))

    fine = evaluate(mesh)
    coarse = evaluate(mesh.coarsened())
    return fine, abs(fine - coarse) / 15.0


def keyhole_integral(a: float, b: float, alpha: float,
                     spec: QuadratureSpec | None = None) -> float:
    """(1/2πi) ∮ exp[a z + b/z - (α/2) log z] dz over a keyhole contour.

    The contour comes in from -∞ below the branch cut of log, circles the
    origin once counterclockwise along |z| = 1, and returns to -∞ above the
    cut.  For a > 0, b ≥ 0 the result is real.
    """
    if a <= 0 or b < 0:
        raise ValueError("requires a > 0 and b >= 0")
    spec = spec or QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)

    def circle(phi):
        z = np.exp(1j * phi)
        return np.real(np.exp(a * z + b / z - 0.5 * alpha * np.log(z)) * z) / (2 * np.pi)

    circ, err_c, _ = adaptive_simpson(circle, -np.pi, np.pi, abs_tol=spec.abs_tol,
                                      max_refine=spec.max_refine)

    # rays above/below the cut combine into sin(απ/2)/π ∫_1^∞ e^{-ax-b/x} x^{-α/2} dx
    s = np.sin(0.5 * alpha * np.pi)
    ray = 0.0
    err_r = 0.0
    if s != 0.0:
        smax = 1.0
        while a * np.exp(smax) - smax * max(1.0 - alpha / 2.0, 0.0) < -np.log(spec.abs_tol) + 5:
            smax += 1.0
            if smax > 700:
                raise QuadratureError("ray truncation failure")

        def ray_f(u):  # x = e^u
            x = np.exp(u)
            return np.exp(-a * x - b / x + u * (1.0 - alpha / 2.0))

        ray, err_r, _ = adaptive_simpson(ray_f, 0.0, smax, abs_tol=spec.abs_tol,
                                         max_refine=spec.max_refine)
        ray *= s / np.pi
        err_r *= abs(s) / np.pi
    return float(np.real(circ + ray))
