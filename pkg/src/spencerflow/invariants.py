"""Conserved-quantity monitor for the 2D Euler runs: total vorticity, Kelvin
circulations along material curves, enstrophy, divergence residuals, vorticity
strata, and conservation reports."""

from dataclasses import dataclass

import numpy as np

from .euler2d import interpolate_velocity, velocity_from_vorticity

EPS_DENOM = 1e-30  # guard for relative errors of near-zero invariants


@dataclass(frozen=True)
class InvariantRecord:
    t: float
    I0: float
    I1: tuple  # one circulation per tracked curve
    I2: float
    div_max: float

    def __post_init__(self):
        object.__setattr__(self, "I1", tuple(self.I1))
        vals = (self.t, self.I0, self.I2, self.div_max, *self.I1)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("non-finite invariant record")


@dataclass(frozen=True)
class StrataGrid:
    labels: np.ndarray  # N x N small ints; label = #{thresholds passed}

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))


def total_vorticity(zeta):
    """I0 = sum zeta * (L/N)^2, exact quadrature for band-limited fields."""
    return float(np.sum(zeta.values)) * zeta.grid.dx**2


def enstrophy(zeta):
    """I2 = sum zeta^2 * (L/N)^2."""
    return float(np.sum(zeta.values**2)) * zeta.grid.dx**2


def circulation(curve, u):
    """Gamma = sum_m u(x_m) . (x_{m+1} - x_{m-1}) / 2, the periodic trapezoid
    rule with minimal-image differences."""
    pts = curve.points
    if pts.shape[0] < 8:
        raise ValueError("a marker curve needs at least 8 points")
    L = u.grid.L
    diffs = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
    diffs -= L * np.round(diffs / L)
    vel = interpolate_velocity(u, pts)
    return float(np.sum(vel * diffs)) / 2.0


def divergence_residual(u):
    """max over modes of |k . u_hat| normalized by the largest mode magnitude."""
    kx, ky = u.grid.wavenumbers()
    ux_hat = np.fft.fft2(u.u_x)
    uy_hat = np.fft.fft2(u.u_y)
    div = np.abs(kx * ux_hat + ky * uy_hat)
    scale = float(np.max(np.hypot(np.abs(ux_hat), np.abs(uy_hat))))
    if scale == 0.0:
        return 0.0
    return float(np.max(div)) / scale


def phi_triple(zeta, curves, t=0.0):
    """The (I0, I1 per curve, I2, div_max) bundle at one snapshot."""
    u = velocity_from_vorticity(zeta)
    return InvariantRecord(
        t=t,
        I0=total_vorticity(zeta),
        I1=tuple(circulation(c, u) for c in curves),
        I2=enstrophy(zeta),
        div_max=divergence_residual(u),
    )


def strata_classify(zeta, thresholds):
    """label(x) = #{tau in thresholds : |zeta(x)| >= tau}."""
    thresholds = list(thresholds)
    if any(t < 0 for t in thresholds):
        raise ValueError("thresholds must be non-negative")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly ascending")
    labels = np.zeros(zeta.values.shape, dtype=np.int64)
    mag = np.abs(zeta.values)
    for tau in thresholds:
        labels += (mag >= tau).astype(np.int64)
    return StrataGrid(labels)


def conservation_report(series):
    """Relative drift |last - first| / max(|first|, eps) for each invariant."""
    if len(series) < 2:
        raise ValueError("need at least two records for a conservation report")
    first, last = series[0], series[-1]
    if len(first.I1) != len(last.I1):
        raise ValueError("curve count changed between records")

    def rel(a, b):
        return abs(b - a) / max(abs(a), EPS_DENOM)

    report = {"I0": rel(first.I0, last.I0), "I2": rel(first.I2, last.I2)}
    for i, (a, b) in enumerate(zip(first.I1, last.I1)):
        report[f"I1_{i}"] = rel(a, b)
    return report
