"""Ideal unidirectional (cascaded) chain in the Markovian limit.

Emitter ``n`` is driven only by emitters ``m < n``::

    dC_n/dt = -i Omega C_n - (gamma_g / 2) sum_{m<n} exp(i phi_nm) C_m

with ``Omega = delta_L - i gamma_tot / 2`` and ``phi_nm = k_g (z_n - z_m)``.
The propagator of this lower-triangular system is known in closed form::

    U_kl(t) = exp(-i Omega t) L_{k-l}^{(-1)}(gamma_g t / 2) exp(i phi_kl)

Times are in units of ``1/gamma_0``, lengths in units of the free-space
transition wavelength, so the free-space wavenumber is ``2 pi``.
Emitter labels ``n`` in the public functions are 1-based.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import GeometryError, GridError, ModelError, NormalizationError
from .specfun import bessel_j_zero, laguerre_gen, laguerre_sequence

__all__ = [
    "ModeModel",
    "ChainGeometry",
    "Trajectory",
    "phase_matrix",
    "amplitude_from_first",
    "propagator",
    "propagators",
    "evolve",
    "count_local_maxima",
    "front_zero_times",
    "exact_zero_times",
    "default_times",
]

K0 = 2 * np.pi


@dataclass(frozen=True)
class ModeModel:
    """Parameters of the ideal waveguide mode.

    ``gamma_r`` is the part of the total decay not attributed to the guided
    coupling constant. It may be negative for calibrated models, where
    ``gamma_g`` is fitted to a coupling amplitude rather than a decay rate;
    only ``gamma_g >= 0`` and ``gamma_tot >= 0`` are enforced.
    """

    gamma_g: float = 1.0
    gamma_r: float = 0.0
    delta_L: float = 0.0
    k_g: complex = K0
    beta: float = 1.0

    def __post_init__(self):
        if self.gamma_g < 0:
            raise ModelError(f"gamma_g must be >= 0, got {self.gamma_g}")
        if self.gamma_tot < 0:
            raise ModelError(f"gamma_tot must be >= 0, got {self.gamma_tot}")
        if complex(self.k_g).imag < 0:
            raise ModelError(f"Im(k_g) must be >= 0, got {self.k_g}")
        if not 0.0 <= self.beta <= 1.0:
            raise ModelError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def gamma_tot(self):
        return self.gamma_g + self.gamma_r

    @property
    def omega(self):
        """Complex single-emitter frequency; the imaginary part is ``-gamma_tot / 2``."""
        return complex(self.delta_L, -0.5 * self.gamma_tot)


@dataclass(frozen=True)
class ChainGeometry:
    """Emitter positions along the wire axis and transverse offset from its surface."""

    z: np.ndarray
    delta_rho: float = 0.0

    def __post_init__(self):
        z = np.array(self.z, dtype=float).ravel()
        if z.size < 1:
            raise GeometryError("a chain needs at least one emitter")
        if np.any(np.diff(z) <= 0):
            raise GeometryError("positions must be strictly increasing")
        if self.delta_rho < 0:
            raise GeometryError(f"delta_rho must be >= 0, got {self.delta_rho}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @classmethod
    def regular(cls, N, spacing, delta_rho=0.0, z0=0.0):
        return cls(z0 + spacing * np.arange(N), delta_rho)

    @property
    def N(self):
        return self.z.size

    def with_positions(self, z):
        return ChainGeometry(z, self.delta_rho)


@dataclass
class Trajectory:
    """Per-emitter complex amplitudes on a time grid (shape ``N x T``)."""

    times: np.ndarray
    amplitudes: np.ndarray
    probabilities: np.ndarray = field(init=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.probabilities = np.abs(self.amplitudes) ** 2

    @property
    def total(self):
        return self.probabilities.sum(axis=0)


def default_times(gamma_tot, points=600, span=20.0):
    """Uniform grid over ``[0, span / gamma_tot]``."""
    return np.linspace(0.0, span / gamma_tot, points)


def phase_matrix(geom, k_g):
    """Propagation phases ``k_g (z_n - z_m)`` on the strictly lower triangle."""
    dz = geom.z[:, None] - geom.z[None, :]
    return np.tril(complex(k_g) * dz, k=-1)


def _require_unidirectional(mode):
    if mode.beta != 1.0:
        raise ModelError(
            f"the Laguerre propagator needs beta = 1, got beta = {mode.beta}; "
            "use chiralchain.evolution for partial directionality"
        )


def amplitude_from_first(n, t, mode, geom):
    """Amplitude of emitter ``n`` (1-based) when only emitter 1 starts excited."""
    _require_unidirectional(mode)
    if not 1 <= n <= geom.N:
        raise IndexError(f"emitter {n} outside 1..{geom.N}")
    t = np.asarray(t, dtype=float)
    phase = complex(mode.k_g) * (geom.z[n - 1] - geom.z[0])
    val = np.exp(-1j * mode.omega * t + 1j * phase) * laguerre_gen(n - 1, -1.0, mode.gamma_g * t / 2)
    return complex(val) if val.ndim == 0 else val


def propagators(times, mode, geom):
    """Closed-form propagators for a batch of times, shape ``(T, N, N)``."""
    _require_unidirectional(mode)
    times = np.asarray(times, dtype=float).ravel()
    N = geom.N
    lag = laguerre_sequence(N - 1, -1.0, mode.gamma_g * times / 2)  # (N, T)
    k, l = np.tril_indices(N)
    phase = np.exp(1j * complex(mode.k_g) * (geom.z[k] - geom.z[l]))
    U = np.zeros((times.size, N, N), dtype=complex)
    U[:, k, l] = lag[k - l].T * phase
    U *= np.exp(-1j * mode.omega * times)[:, None, None]
    return U


def propagator(t, mode, geom):
    """Lower-triangular propagator ``U(t)``; column ``l`` evolves ``e_l``."""
    return propagators([t], mode, geom)[0]


def _check_normalized(c0, tol=1e-9):
    c0 = np.asarray(c0, dtype=complex).ravel()
    norm = np.sum(np.abs(c0) ** 2)
    if abs(norm - 1.0) > tol:
        raise NormalizationError(f"sum |c|^2 = {norm!r}, expected 1")
    return c0


def evolve(c0, times, mode, geom):
    """Evolve an arbitrary normalized single-excitation state."""
    c0 = _check_normalized(c0)
    if c0.size != geom.N:
        raise ValueError(f"c0 has {c0.size} entries for {geom.N} emitters")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    U = propagators(times, mode, geom)
    return Trajectory(times, (U @ c0).T)


def _strict_maxima(p):
    inner = p[1:-1]
    return int(np.count_nonzero((inner > p[:-2]) & (inner > p[2:])))


def count_local_maxima(p):
    """Number of strict interior local maxima of a sampled probability curve.

    The count is repeated on the grid with every other sample dropped; a
    different answer means the grid does not resolve the curve.
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.size < 5:
        raise GridError("need at least 5 samples")
    fine = _strict_maxima(p)
    coarse = _strict_maxima(p[::2])
    if fine != coarse:
        raise GridError(f"maxima count unstable under refinement ({coarse} -> {fine})")
    return fine


def front_zero_times(N, gamma_g, k):
    """Zero times of the Bessel asymptote ``J_1(2 sqrt((N-1) gamma_g t / 2))``.

    Returns ``j_{1,k}^2 / (2 (N - 1) gamma_g)``; ``k`` may be an int or a
    sequence of ints.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    ks = np.atleast_1d(k)
    out = np.array([bessel_j_zero(1, int(kk)) ** 2 for kk in ks]) / (2 * (N - 1) * gamma_g)
    return float(out[0]) if np.ndim(k) == 0 else out


def exact_zero_times(n, gamma_g):
    """Positive zero times of ``P_n(t)`` in the unidirectional chain.

    These are the zeros of ``L_{n-1}^{(-1)}(gamma_g t / 2)`` for ``t > 0``,
    located by bracketing on a grid finer than the smallest zero gap and
    refined with Brent's method. Returns an ascending array of ``n - 2``
    times (empty for ``n <= 2``).
    """
    deg = n - 1
    if deg < 2:
        return np.empty(0)
    # all zeros of L_deg^{(-1)} lie in [0, 4 deg + 2]
    xs = np.linspace(0.0, 4.0 * deg + 6.0, 64 * deg * deg + 512)[1:]
    vals = laguerre_gen(deg, -1.0, xs)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = [
        optimize.brentq(lambda s: laguerre_gen(deg, -1.0, s), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)
        for i in idx
    ]
    if len(roots) != deg - 1:
        raise GridError(f"found {len(roots)} zeros of L_{deg}^(-1), expected {deg - 1}")
    return 2.0 * np.asarray(roots) / gamma_g
