"""Semiclassical energy landscape and tunnel-splitting scaling analysis.

The coherent-state energy surface over the cavity quadratures (x, y) and
the collective-spin direction (theta, phi) is

    E = omega (x^2 + y^2) + 2 S g x cos(theta) - v S^2 sin^2(theta) cos^2(phi).

For u = g^2/omega < v the two degenerate minima sit on the equator at
phi = 0 and phi = pi with the cavity in vacuum; for u > v they move to the
poles with a displaced cavity.  The parity factor |cos(N pi / 2)| decides
whether tunneling between the equatorial minima interferes destructively
(odd N) or not (even N), and the even-N splitting decays like exp(-c N),
which splitting_scaling_fit extracts from diagonalization data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DescentError, ValidationError
from .model import ModelParams

_GRAD_TOL = 1e-10
_HESS_STEP = 1e-4
_POLE_TOL = 1e-6
_DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class PhasePoint:
    """Cavity quadratures (x, y) plus spin angles theta in [0, pi], phi in [0, 2 pi)."""

    x: float
    y: float
    theta: float
    phi: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.theta, self.phi)):
            raise ValidationError("phase-space coordinates must be finite")
        if not (-1e-12 <= self.theta <= math.pi + 1e-12):
            raise ValidationError(f"theta must lie in [0, pi], got {self.theta}")
        if not (-1e-12 <= self.phi < 2 * math.pi + 1e-12):
            raise ValidationError(f"phi must lie in [0, 2 pi), got {self.phi}")


@dataclass(frozen=True)
class StationaryPoint:
    point: PhasePoint
    energy: float
    gradient_norm: float
    classification: str  # minimum | saddle | maximum | degenerate


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through (N, ln d); slope is the decay rate per atom."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[int, float], ...]


def energy_surface(p: ModelParams, pt: PhasePoint) -> float:
    """Coherent-state energy at one phase-space point."""
    S = p.S
    return (
        p.omega * (pt.x**2 + pt.y**2)
        + 2.0 * S * p.g * pt.x * math.cos(pt.theta)
        - p.v * S**2 * math.sin(pt.theta) ** 2 * math.cos(pt.phi) ** 2
    )


def _energy(p: ModelParams, z: np.ndarray) -> float:
    x, y, th, ph = z
    S = p.S
    return (
        p.omega * (x * x + y * y)
        + 2.0 * S * p.g * x * np.cos(th)
        - p.v * S * S * np.sin(th) ** 2 * np.cos(ph) ** 2
    )


def surface_gradient(p: ModelParams, z) -> np.ndarray:
    """Analytic gradient of the energy surface w.r.t. (x, y, theta, phi)."""
    x, y, th, ph = np.asarray(z, dtype=float)
    S = p.S
    sin_th, cos_th = np.sin(th), np.cos(th)
    return np.array(
        [
            2.0 * p.omega * x + 2.0 * S * p.g * cos_th,
            2.0 * p.omega * y,
            -2.0 * S * p.g * x * sin_th
            - 2.0 * p.v * S * S * sin_th * cos_th * np.cos(ph) ** 2,
            p.v * S * S * sin_th**2 * np.sin(2.0 * ph),
        ]
    )


def reduced_surface(p: ModelParams, theta: float, phi: float) -> float:
    """Energy minimized over the quadratures: -u S^2 cos^2(theta) - v S^2 sin^2(theta) cos^2(phi).

    The (x, y) dependence is an exact quadratic with minimum at
    x = -S g cos(theta) / omega, y = 0.
    """
    S = p.S
    return -p.u * S**2 * math.cos(theta) ** 2 - p.v * S**2 * math.sin(theta) ** 2 * math.cos(phi) ** 2


def interference_factor(N: int) -> float:
    """|cos(N pi / 2)| evaluated exactly from N mod 4: 1 for even N, 0 for odd.

    This is the phase factor weighing the two opposite-sense tunneling
    paths between the equatorial minima; its zero at odd N is what locks
    the ground doublet degenerate.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N!r}")
    return 0.0 if N % 2 else 1.0


def splitting_scaling_fit(points) -> ScalingFit:
    """Fit ln d = slope * N + intercept over even-N splittings, all d > 0."""
    pts = [(int(N), float(d)) for N, d in points]
    if len(pts) < 3:
        raise ValidationError(f"need at least 3 points, got {len(pts)}")
    for N, d in pts:
        if N % 2:
            raise ValidationError(f"odd N = {N} not allowed in the scaling fit")
        if d <= 0:
            raise ValidationError(f"non-positive splitting d = {d} at N = {N}")
    Ns = np.array([N for N, _ in pts], dtype=float)
    ln_d = np.log([d for _, d in pts])
    A = np.vstack([Ns, np.ones_like(Ns)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ln_d, rcond=None)
    fitted = A @ np.array([slope, intercept])
    ss_res = float(np.sum((ln_d - fitted) ** 2))
    ss_tot = float(np.sum((ln_d - ln_d.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(
        slope=float(slope), intercept=float(intercept), r_squared=r2, points=tuple(pts)
    )


def _normalize_angles(z: np.ndarray) -> np.ndarray:
    x, y, th, ph = z
    th = math.fmod(th, 2 * math.pi)
    if th < 0:
        th += 2 * math.pi
    if th > math.pi:  # the chart double-covers: E(2pi - theta, phi) = E(theta, phi)
        th = 2 * math.pi - th
    ph = math.fmod(ph, 2 * math.pi)
    if ph < 0:
        ph += 2 * math.pi
    if 2 * math.pi - ph < 1e-8:  # wrapped representative of phi = 0
        ph = 0.0
    if th < _POLE_TOL or math.pi - th < _POLE_TOL:
        ph = 0.0  # phi is gauge at the poles
    return np.array([x, y, th, ph])


def _embedding(z: np.ndarray) -> np.ndarray:
    x, y, th, ph = z
    return np.array(
        [x, y, math.cos(th), math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph)]
    )


def _hessian_fd(p: ModelParams, z: np.ndarray, dims: list[int]) -> np.ndarray:
    h = _HESS_STEP
    H = np.zeros((len(dims), len(dims)))
    for a, i in enumerate(dims):
        for b_, j in enumerate(dims):
            if b_ < a:
                H[a, b_] = H[b_, a]
                continue
            zpp = z.copy(); zpp[i] += h; zpp[j] += h
            zpm = z.copy(); zpm[i] += h; zpm[j] -= h
            zmp = z.copy(); zmp[i] -= h; zmp[j] += h
            zmm = z.copy(); zmm[i] -= h; zmm[j] -= h
            H[a, b_] = (_energy(p, zpp) - _energy(p, zpm) - _energy(p, zmp) + _energy(p, zmm)) / (4 * h * h)
    return H


def _classify(p: ModelParams, z: np.ndarray) -> str:
    """Sign pattern of the finite-difference Hessian eigenvalues.

    At the poles the phi direction is pure gauge and the theta curvature
    depends on the meridian, so the chart Hessian is evaluated along the
    phi = 0 and phi = pi/2 meridians and the eigenvalue sets are pooled.
    """
    if math.sin(z[2]) < _POLE_TOL:
        eigs = []
        for ph_probe in (0.0, math.pi / 2):
            zp = z.copy()
            zp[3] = ph_probe
            eigs.extend(np.linalg.eigvalsh(_hessian_fd(p, zp, [0, 1, 2])))
        eigs = np.array(eigs)
    else:
        eigs = np.linalg.eigvalsh(_hessian_fd(p, z, [0, 1, 2, 3]))
    scale = max(1.0, float(np.max(np.abs(eigs))))
    ztol = 1e-6 * scale
    n_pos = int(np.sum(eigs > ztol))
    n_neg = int(np.sum(eigs < -ztol))
    n_zero = eigs.size - n_pos - n_neg
    if n_neg > 0 and n_pos > 0:
        return "saddle"
    if n_zero > 0:
        return "degenerate"
    return "minimum" if n_neg == 0 else "maximum"


def find_minima(
    p: ModelParams, *, seed: int = 2024, gradient_tol: float = _GRAD_TOL
) -> list[StationaryPoint]:
    """Multi-start descent on the full surface; returns minima (and flat points).

    Starts on a jittered 3 x 4 (theta, phi) grid with the cavity at
    x = y = 0, descends with the analytic gradient, deduplicates in the
    gauge-free embedding, classifies each survivor, and keeps the points
    classified minimum or degenerate, sorted by energy.  Raises
    DescentError if no start reaches the stationarity tolerance.
    """
    rng = np.random.default_rng(seed)
    starts = []
    for th in (math.pi / 4, math.pi / 2, 3 * math.pi / 4):
        for ph in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
            jitter = rng.uniform(-0.05, 0.05, size=2)
            starts.append(np.array([0.0, 0.0, th + jitter[0], ph + jitter[1]]))

    candidates: list[tuple[np.ndarray, float, float]] = []
    failures: list[tuple[np.ndarray, float, float]] = []
    for z0 in starts:
        res = minimize(
            lambda z: _energy(p, z),
            z0,
            jac=lambda z: surface_gradient(p, z),
            method="BFGS",
            options={"gtol": gradient_tol / 10, "maxiter": 500},
        )
        z = _normalize_angles(res.x)
        gnorm = float(np.linalg.norm(surface_gradient(p, z)))
        entry = (z, float(_energy(p, z)), gnorm)
        if gnorm <= gradient_tol:
            candidates.append(entry)
        else:
            failures.append(entry)
    if not candidates:
        best = sorted(failures, key=lambda c: c[2])[:3]
        raise DescentError(
            "no descent start reached the stationarity tolerance",
            candidates=[
                StationaryPoint(
                    point=PhasePoint(*map(float, z)),
                    energy=e,
                    gradient_norm=g,
                    classification="saddle",
                )
                for z, e, g in best
            ],
        )

    unique: list[tuple[np.ndarray, float, float]] = []
    for z, e, g in sorted(candidates, key=lambda c: (c[1], c[2])):
        emb = _embedding(z)
        if any(np.linalg.norm(emb - _embedding(uz)) < _DEDUP_TOL for uz, _, _ in unique):
            continue
        unique.append((z, e, g))

    out = []
    for z, e, g in unique:
        cls = _classify(p, z)
        if cls in ("minimum", "degenerate"):
            out.append(
                StationaryPoint(
                    point=PhasePoint(*map(float, z)),
                    energy=e,
                    gradient_norm=g,
                    classification=cls,
                )
            )
    out.sort(key=lambda s: (s.energy, s.point.theta, s.point.phi))
    return out
