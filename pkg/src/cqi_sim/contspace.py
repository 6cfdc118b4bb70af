"""Discretized extended configuration space (x, t) for a free particle.

Kinematical data are complex amplitudes sampled on a rectangular grid.
The physical content of such data is obtained through the normalized
free Schroedinger kernel

    W(x,t; x',t') = sqrt(m/(2 pi i hbar (t-t'))) exp(i m (x-x')^2 / (2 hbar (t-t')))

which acts as the projector onto solutions: projecting a kinematical
function and evaluating on a constant-time slice gives the wavefunction
there, and the physical inner product of two kinematical functions
equals the ordinary L2 product of their projections on any common
slice.

Time-measure convention: a GridFunction whose support occupies a single
time slice is interpreted as carrying a delta factor in time (weight 1,
the Schroedinger-picture limit); genuinely smeared supports use the
plain dx dt Lebesgue measure with per-band trapezoid weights.

Equal-time kernel evaluations are the delta channel and are handled
explicitly; direct double quadrature across coincident slices therefore
requires a positive damping parameter eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalValidationError

SUPPORT_EPS = 1e-14

__all__ = [
    "Grid",
    "GridFunction",
    "PropagatorKernel",
    "propagate_point",
    "project",
    "collapse_to_slice",
    "physical_inner_product",
    "physical_norm",
    "spectral_evolve",
    "gaussian_packet",
]


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular sampling of the (x, t) plane."""

    x_min: float
    x_max: float
    nx: int
    t_min: float
    t_max: float
    nt: int

    def __post_init__(self):
        if self.nx < 2 or self.nt < 2:
            raise ValueError("grids need at least two points per axis")
        if self.x_max <= self.x_min or self.t_max <= self.t_min:
            raise ValueError("grid extents must be positive")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.nt)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.nt - 1)


@dataclass(frozen=True, eq=False)
class PropagatorKernel:
    """Free-particle kernel parameters; eta damps oscillatory quadrature."""

    mass: float = 1.0
    hbar: float = 1.0
    regularization_eta: float = 0.0

    def __post_init__(self):
        if self.mass <= 0 or self.hbar <= 0:
            raise ValueError("mass and hbar must be positive")
        if self.regularization_eta < 0:
            raise ValueError("regularization_eta must be nonnegative")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Sampled kinematical amplitude on a Grid, shape (nx, nt)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.nx, self.grid.nt):
            raise ValueError(
                f"values shape {v.shape} does not match grid ({self.grid.nx}, {self.grid.nt})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def on_slice(cls, grid: Grid, values_x: np.ndarray, t_index: int) -> "GridFunction":
        v = np.zeros((grid.nx, grid.nt), dtype=complex)
        v[:, t_index] = values_x
        return cls(grid, v)

    @classmethod
    def from_callable(cls, grid: Grid, f) -> "GridFunction":
        xx, tt = np.meshgrid(grid.x, grid.t, indexing="ij")
        return cls(grid, f(xx, tt))

    def support_slices(self, eps: float = SUPPORT_EPS) -> np.ndarray:
        """Indices of time slices holding any amplitude above eps."""
        return np.flatnonzero(np.max(np.abs(self.values), axis=0) > eps)

    @property
    def single_slice(self) -> bool:
        return self.support_slices().size == 1

    def time_weights(self, eps: float = SUPPORT_EPS) -> np.ndarray:
        """Quadrature weight per time slice.

        A single-slice support is delta-normalized in time (weight 1);
        otherwise each contiguous support run gets local trapezoid
        weights dt * [1/2, 1, ..., 1, 1/2].
        """
        w = np.zeros(self.grid.nt)
        sup = self.support_slices(eps)
        if sup.size == 0:
            return w
        if sup.size == 1:
            w[sup[0]] = 1.0
            return w
        dt = self.grid.dt
        runs = np.split(sup, np.flatnonzero(np.diff(sup) > 1) + 1)
        for run in runs:
            if run.size == 1:
                w[run[0]] = dt
            else:
                w[run] = dt
                w[run[0]] = w[run[-1]] = 0.5 * dt
        return w

    def x_weights(self) -> np.ndarray:
        dx = self.grid.dx
        w = np.full(self.grid.nx, dx)
        w[0] = w[-1] = 0.5 * dx
        return w

    def support_points(
        self, eps: float = SUPPORT_EPS
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flattened (x, t, value, weight) arrays over the support."""
        tw = self.time_weights(eps)
        cols = np.flatnonzero(tw > 0)
        xs, ts, vals, ws = [], [], [], []
        xw = self.x_weights()
        for j in cols:
            v = self.values[:, j]
            mask = np.abs(v) > eps
            if not np.any(mask):
                continue
            xs.append(self.grid.x[mask])
            ts.append(np.full(int(mask.sum()), self.grid.t[j]))
            vals.append(v[mask])
            ws.append(xw[mask] * tw[j])
        if not xs:
            raise NumericalValidationError("grid function has empty support")
        return (
            np.concatenate(xs),
            np.concatenate(ts),
            np.concatenate(vals),
            np.concatenate(ws),
        )

    def to_csv(self, path) -> None:
        """Write rows (x, t, Re, Im) for the full grid."""
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "t", "re", "im"])
            for j, t in enumerate(self.grid.t):
                for i, x in enumerate(self.grid.x):
                    v = self.values[i, j]
                    writer.writerow(
                        ["%.17g" % x, "%.17g" % t, "%.17g" % v.real, "%.17g" % v.imag]
                    )


def propagate_point(
    k: PropagatorKernel, x: float, t: float, xp: float, tp: float
) -> complex:
    """W(x,t; x',t') for t != t' (coincident times are the delta channel)."""
    if t == tp:
        raise NumericalValidationError("propagate_point requires t != t'")
    out = _kernels.propagate(
        np.array([float(x)]),
        float(t),
        np.array([float(xp)]),
        np.array([float(tp)]),
        np.array([1.0 + 0.0j]),
        k.mass,
        k.hbar,
        k.regularization_eta,
    )
    return complex(out[0])


def project(
    psi: GridFunction,
    k: PropagatorKernel,
    t_out: float,
    x_out: np.ndarray | None = None,
) -> np.ndarray:
    """Evaluate the projected (physical) state on the slice t = t_out.

    Trapezoid quadrature of the kernel against the support of ``psi``;
    source slices lying exactly on t_out contribute through the delta
    channel (their weighted values are added directly, which requires
    x_out to coincide with the grid's x sampling).
    """
    grid = psi.grid
    if x_out is None:
        x_out = grid.x
    x_out = np.asarray(x_out, dtype=float)
    xs, ts, vals, ws = psi.support_points()
    on_slice = np.isclose(ts, t_out, rtol=0.0, atol=1e-12 * max(1.0, abs(t_out)))
    out = np.zeros(x_out.size, dtype=complex)
    if np.any(on_slice):
        if x_out.size != grid.nx or not np.allclose(x_out, grid.x):
            raise NumericalValidationError(
                "delta-channel projection needs x_out equal to the grid x sampling"
            )
        tw = psi.time_weights()
        j = int(np.argmin(np.abs(grid.t - t_out)))
        out += psi.values[:, j] * tw[j]
    off = ~on_slice
    if np.any(off):
        out += _kernels.propagate(
            x_out,
            float(t_out),
            xs[off],
            ts[off],
            (vals * ws)[off],
            k.mass,
            k.hbar,
            k.regularization_eta,
        )
    return out


def _common_x(a: GridFunction, b: GridFunction) -> None:
    if a.grid.nx != b.grid.nx or not np.allclose(a.grid.x, b.grid.x):
        raise NumericalValidationError("states must share the same x sampling")


def collapse_to_slice(
    psi: GridFunction, k: PropagatorKernel, t_ref: float
) -> np.ndarray:
    """Projected state on the slice t_ref via per-slice spectral evolution.

    Each support slice is evolved to t_ref with the spectral integrator
    and accumulated with its time-quadrature weight.  Numerically robust
    for arbitrarily small time offsets (the kernel quadrature of
    ``project`` chirps too fast to sample at short offsets); used by the
    slice route of the physical inner product.
    """
    grid = psi.grid
    tw = psi.time_weights()
    out = np.zeros(grid.nx, dtype=complex)
    for j in np.flatnonzero(tw > 0):
        out += tw[j] * spectral_evolve(
            psi.values[:, j], grid.dx, k, t_ref - grid.t[j]
        )
    return out


def physical_inner_product(
    psi: GridFunction,
    phi: GridFunction,
    k: PropagatorKernel,
    method: str = "slice",
    eta: float | None = None,
    t_ref: float | None = None,
) -> complex:
    """<psi | P | phi>: double kernel quadrature over both supports.

    method "slice" (default) exploits the identity that the product
    equals the ordinary L2 product of the two projections on any common
    reference slice (unitarity of the kernel); the collapse to
    ``t_ref`` (default: latest support time) is done spectrally, which
    stays accurate at arbitrarily small time offsets.  method "direct"
    performs the raw double quadrature with the kernel itself, which
    needs a positive ``eta`` whenever the supports share time slices.
    Two single-slice states on a common slice reduce to the plain L2
    product (the delta channel).
    """
    _common_x(psi, phi)
    xw = psi.x_weights()
    sup_psi = psi.grid.t[psi.support_slices()]
    sup_phi = phi.grid.t[phi.support_slices()]
    if (
        psi.single_slice
        and phi.single_slice
        and abs(sup_psi[0] - sup_phi[0]) < 1e-12
    ):
        jp = psi.support_slices()[0]
        jq = phi.support_slices()[0]
        return complex(np.sum(xw * np.conj(psi.values[:, jp]) * phi.values[:, jq]))

    if method == "slice":
        if t_ref is None:
            t_ref = float(max(sup_psi.max(), sup_phi.max()))
        a = collapse_to_slice(psi, k, t_ref)
        b = collapse_to_slice(phi, k, t_ref)
        return complex(np.sum(xw * np.conj(a) * b))

    if method == "direct":
        if eta is None:
            eta = k.regularization_eta or 1e-3 * min(psi.grid.dt, phi.grid.dt)
        xa, ta, va, wa = psi.support_points()
        xb, tb, vb, wb = phi.support_points()
        overlap = np.isin(np.round(ta, 12), np.round(tb, 12)).any()
        if overlap and eta <= 0:
            raise NumericalValidationError(
                "direct double quadrature across shared time slices needs eta > 0"
            )
        return complex(
            _kernels.double_quad(
                xa, ta, va * wa, xb, tb, vb * wb, k.mass, k.hbar, eta
            )
        )
    raise ValueError(f"unknown method {method!r}")


def physical_norm(phi: GridFunction, k: PropagatorKernel, **kw) -> float:
    """sqrt of the physical norm squared of a kinematical state."""
    val = physical_inner_product(phi, phi, k, **kw)
    return float(np.sqrt(max(val.real, 0.0)))


def spectral_evolve(
    values_x: np.ndarray,
    dx: float,
    k: PropagatorKernel,
    t_total: float,
    n_steps: int = 1,
    potential: np.ndarray | None = None,
) -> np.ndarray:
    """Split-step Fourier integration of the Schroedinger equation.

    For the free particle a single step is exact up to the grid's
    momentum cutoff; with a potential a symmetric Strang splitting is
    used.  Periodic boundary conditions apply, so states must stay away
    from the grid edges.  This integrator is independent of the kernel
    quadrature path and serves as its cross-check.
    """
    psi = np.asarray(values_x, dtype=complex).copy()
    n = psi.size
    kvec = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    dt = t_total / n_steps
    exp_kin = np.exp(-1j * k.hbar * kvec**2 * dt / (2.0 * k.mass))
    if potential is None:
        for _ in range(n_steps):
            psi = np.fft.ifft(exp_kin * np.fft.fft(psi))
        return psi
    exp_v_half = np.exp(-0.5j * potential * dt / k.hbar)
    for _ in range(n_steps):
        psi = exp_v_half * psi
        psi = np.fft.ifft(exp_kin * np.fft.fft(psi))
        psi = exp_v_half * psi
    return psi


def gaussian_packet(
    x: np.ndarray, center: float, width: float, momentum: float = 0.0
) -> np.ndarray:
    """L2-normalized Gaussian (pi a^2)^(-1/4) exp(-(x-c)^2/(2a^2) + i k (x-c)).

    ``width`` is the amplitude width a; the density |psi|^2 then has
    variance a^2/2 and spreads as a^2 -> a^2 + (hbar t / (m a))^2.
    """
    a = float(width)
    return (np.pi * a**2) ** -0.25 * np.exp(
        -((x - center) ** 2) / (2.0 * a**2) + 1j * momentum * (x - center)
    )
