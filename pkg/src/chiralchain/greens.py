"""Dyadic Green's tensors of free space and of a metallic cylinder.

Conventions
-----------
Lengths are in units of the free-space transition wavelength, so the
free-space wavenumber is ``k0 = 2 pi``. Time dependence is ``exp(-i w t)``
and the Green's tensor solves ``curl curl G - k0^2 eps G = I delta``, so
that ``Im G0(r, r) = k0 / (6 pi) I``. The coupling matrix is reported in
units of the free-space decay rate::

    Sigma_kl = -4 pi k0^2 d_k^* . G(r_k, r_l) . d_l / gamma_0,   gamma_0 = 4 k0^3 / 3

which puts the free-space diagonal at ``-i / 2``.

The wire lies along ``z`` with radius ``rho_c``. Its scattered tensor is an
azimuthal sum over cylindrical orders ``n`` and an integral over the axial
wavenumber ``k_z``. For each ``(n, k_z)`` the incident regular wave is
matched to an outgoing wave outside and a regular wave inside through the
continuity of ``E_z, E_phi, H_z, H_phi``. The ``k_z`` integral runs along
the real axis, dipped slightly below it for ``k_z > 0`` and above it for
``k_z < 0``. This keeps the path clear of the branch points at ``+-k0`` and
of the guided-mode poles at ``+-k_g`` without crossing any singularity, so
the value equals the real-axis integral.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ConvergenceError, NoRootError, SingularityError

__all__ = [
    "K0",
    "NanowireSpec",
    "DipoleSpec",
    "SelfEnergyMatrix",
    "SppMode",
    "free_space_green",
    "free_space_green_coincident_imag",
    "spp_dispersion",
    "spp_mode",
    "WireGreen",
    "wire_green",
    "scattered_green",
    "self_energy_pair",
    "self_energy_matrix",
    "coupling_pairs",
    "asymmetry_ratio",
]

K0 = 2 * np.pi
GAMMA0 = 4 * K0**3 / 3
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class NanowireSpec:
    """Metallic wire of radius ``rho_c`` and permittivity ``epsilon`` in vacuum."""

    rho_c: float = 0.05
    epsilon: complex = complex(-16.0, 0.44)

    def __post_init__(self):
        if self.rho_c <= 0:
            raise ValueError(f"rho_c must be positive, got {self.rho_c}")
        object.__setattr__(self, "epsilon", complex(self.epsilon))
        if self.epsilon.imag < 0:
            raise ValueError(f"Im(epsilon) must be >= 0 for a passive wire, got {self.epsilon}")


_POLARIZATIONS = {
    "sigma_plus": -np.array([1j, 0, 1]) / np.sqrt(2),
    "sigma_minus": np.array([1j, 0, 1]).conj() / np.sqrt(2),
}


@dataclass(frozen=True)
class DipoleSpec:
    """Transition dipole: circular about ``e_y`` or linear along ``direction``."""

    polarization: str = "sigma_plus"
    direction: tuple = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.polarization not in ("sigma_plus", "sigma_minus", "linear"):
            raise ValueError(f"unknown polarization {self.polarization!r}")

    @property
    def vector(self):
        if self.polarization == "linear":
            d = np.asarray(self.direction, dtype=complex)
            return d / np.linalg.norm(d)
        return _POLARIZATIONS[self.polarization].copy()


@dataclass(frozen=True)
class SelfEnergyMatrix:
    """Coupling matrix in units of ``hbar gamma_0`` at the transition frequency."""

    values: np.ndarray
    frequency: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def decay_rates(self):
        return -2.0 * np.diag(self.values).imag


def free_space_green(r1, r2, k0=K0):
    """Vacuum dyadic Green's tensor ``(I + grad grad / k0^2) exp(i k0 R) / (4 pi R)``."""
    R = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
    dist = np.linalg.norm(R)
    if dist == 0:
        raise SingularityError("free-space Green's tensor is singular at r1 = r2")
    u = R / dist
    x = k0 * dist
    a = 1 + 1j / x - 1 / x**2
    b = -1 - 3j / x + 3 / x**2
    return np.exp(1j * x) / (4 * np.pi * dist) * (a * np.eye(3) + b * np.outer(u, u))


def free_space_green_coincident_imag(k0=K0):
    """``Im G0(r, r)``, the finite part of the vacuum tensor at coincident points."""
    return k0 / (6 * np.pi) * np.eye(3)


# -- guided mode --------------------------------------------------------------


def spp_dispersion(k_z, spec):
    """Dispersion function of the rotationally symmetric (n = 0) TM wire mode.

    ``eps I1(q1 a) / (q1 I0(q1 a)) + K1(q0 a) / (q0 K0(q0 a))`` with
    ``q0^2 = k_z^2 - k0^2`` and ``q1^2 = k_z^2 - eps k0^2``; zeros are bound modes.
    """
    k_z = np.asarray(k_z, dtype=complex)
    a, eps = spec.rho_c, spec.epsilon
    q0 = np.sqrt(k_z**2 - K0**2)
    q1 = np.sqrt(k_z**2 - eps * K0**2)
    inner = eps * special.ive(1, q1 * a) / (q1 * special.ive(0, q1 * a))
    outer = special.kve(1, q0 * a) / (q0 * special.kve(0, q0 * a))
    return inner + outer


@dataclass(frozen=True)
class SppMode:
    k_g: complex

    @property
    def wavelength(self):
        """Plasmon wavelength ``2 pi / Re k_g`` (units of the vacuum wavelength)."""
        return 2 * np.pi / self.k_g.real


def _winding(f, corners, per_side=2000, max_step=0.25, max_depth=30):
    """Winding number of ``f`` around a closed polygon, plus the sampled contour.

    Segments whose phase increment exceeds ``max_step`` are bisected until
    the phase is resolved.
    """
    zs = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        zs.append(a + (b - a) * np.linspace(0.0, 1.0, per_side, endpoint=False))
    z = np.concatenate(zs + [np.array([corners[0]])])
    vals = f(z)
    for _ in range(max_depth):
        dphase = np.abs(np.angle(vals[1:] / vals[:-1]))
        bad = np.nonzero(dphase > max_step)[0]
        if bad.size == 0:
            break
        mid = 0.5 * (z[bad] + z[bad + 1])
        z = np.insert(z, bad + 1, mid)
        vals = np.insert(vals, bad + 1, f(mid))
    else:
        raise NoRootError("contour passes too close to a zero; cannot count roots")
    dphase = np.angle(vals[1:] / vals[:-1])
    return int(round(dphase.sum() / (2 * np.pi))), z, vals


@lru_cache(maxsize=64)
def spp_mode(spec, re_max=30.0, im_max=2.0):
    """Fundamental guided mode of the wire.

    The number of zeros of :func:`spp_dispersion` in the rectangle
    ``Re k_z in (k0, re_max k0]``, ``Im k_z in [0, im_max k0]`` is counted
    with the argument principle; a single zero is located from the contour
    moment ``(1/2 pi i) \\oint z f'/f dz`` and polished by complex Newton.
    """
    if spec.epsilon.real >= -1:
        raise NoRootError(f"Re(eps) = {spec.epsilon.real} does not support a surface plasmon")
    f = lambda z: spp_dispersion(z, spec)  # noqa: E731
    lo, hi = K0 * (1 + 1e-4), K0 * re_max
    bottom = -1e-9 * K0
    corners = [complex(lo, bottom), complex(hi, bottom), complex(hi, im_max * K0), complex(lo, im_max * K0)]
    count, z, vals = _winding(f, corners)
    if count < 1:
        raise NoRootError("no n = 0 guided mode in the search strip")
    if count > 1:
        raise NoRootError(f"{count} zeros in the search strip; expected a single guided mode")
    dlog = np.log(np.abs(vals[1:] / vals[:-1])) + 1j * np.angle(vals[1:] / vals[:-1])
    guess = np.sum(0.5 * (z[1:] + z[:-1]) * dlog) / (2j * np.pi)
    root = _newton(f, guess)
    if not (lo < root.real <= hi) or root.imag < bottom:
        raise NoRootError(f"Newton iteration left the search strip (k_z = {root})")
    return SppMode(complex(root))


def _newton(f, z, tol=1e-14, maxiter=50):
    for _ in range(maxiter):
        h = 1e-6 * max(abs(z), 1.0)
        fz = complex(f(z))
        deriv = (complex(f(z + h)) - complex(f(z - h))) / (2 * h)
        step = fz / deriv
        z = z - step
        if abs(step) < tol * abs(z):
            return z
    raise NoRootError(f"Newton iteration did not converge (last step {abs(step):.2e})")


# -- scattered part -------------------------------------------------------------


def _bessel_table(func, nmax, z):
    """``func(n, z)`` for ``n = 0..nmax+1``, shape ``(len(z), nmax + 2)``."""
    if func is special.hankel1e:
        # upward recurrence is stable for outgoing waves and much cheaper than AMOS per order
        table = np.empty((z.size, nmax + 2), dtype=complex)
        table[:, 0] = func(0, z)
        table[:, 1] = func(1, z)
        for n in range(1, nmax + 1):
            table[:, n + 1] = (2 * n / z) * table[:, n] - table[:, n - 1]
        return table
    orders = np.arange(nmax + 2)
    return func(orders[None, :], z[:, None])


def _signed(table, ns, odd_sign):
    """Gather order ``n`` (possibly negative) from a table of non-negative orders."""
    idx = np.abs(ns)
    vals = table[:, idx]
    sign = np.where((ns < 0) & (idx % 2 == 1), -1.0, 1.0) if odd_sign else 1.0
    return vals * sign


def _cyl(func, nmax, z, ns):
    """Value and logarithmic derivative of a cylinder function for orders ``ns``."""
    table = _bessel_table(func, nmax, z)
    val = _signed(table, ns, True)
    lower = _signed(table, ns - 1, True)
    upper = _signed(table, ns + 1, True)
    return val, 0.5 * (lower - upper) / val


class WireGreen:
    """Precomputed spectral data for the scattered tensor of one wire.

    The quadrature nodes on the ``k_z`` path and the per-mode reflection
    coefficients depend only on the wire, so they are built once; each
    point pair then costs one set of Hankel evaluations. Instances are
    immutable after construction and safe to share between threads.

    Parameters
    ----------
    spec : NanowireSpec
    n_max : int
        azimuthal orders ``-n_max..n_max``
    k_max : float
        the path ends at ``|Re k_z| = k_max`` (units of ``k0``)
    width : float
        largest panel width along the path (units of ``1/lambda_0``)
    depth : float
        largest excursion of the path off the real axis
    refine : int
        node multiplier, used for convergence checks
    """

    def __init__(self, spec, n_max=12, k_max=50.0, width=0.5, depth=0.15, refine=1):
        self.spec = spec
        self.n_max = int(n_max)
        self.k_max = float(k_max)
        self.width = float(width)
        self.depth = float(depth)
        self.refine = int(refine)
        try:
            self.k_g = spp_mode(spec).k_g
        except NoRootError:
            self.k_g = None
        self.kz, self.weights = self._nodes()
        self.ns = np.arange(-self.n_max, self.n_max + 1)
        self.kappa = np.sqrt(K0**2 - self.kz**2)
        self.kappa_in = np.sqrt(spec.epsilon * K0**2 - self.kz**2)
        self._reflection()

    def _nodes(self):
        L = 3.0 * K0
        if self.k_g is not None:
            L = max(L, 2.0 * self.k_g.real)
        T = self.k_max * K0
        marks = [0.0, K0, L, T]
        if self.k_g is not None:
            marks.append(self.k_g.real)
        marks = sorted({m for m in marks if m <= T})
        breaks = sorted({s * m for m in marks for s in (1.0, -1.0)})
        fine = min(self.width, self.depth) / self.refine
        coarse = self.width / self.refine
        ts, ws = [], []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            near = any(abs(abs(x) - m) < 1e-12 for x in (lo, hi) for m in marks[1:-1])
            h = fine if near and hi - lo <= 4 * K0 else coarse
            m = max(1, int(np.ceil((hi - lo) / h)))
            e = np.linspace(lo, hi, m + 1)
            a, b = e[:-1, None], e[1:, None]
            ts.append((0.5 * (b - a) * _GL_X + 0.5 * (b + a)).ravel())
            ws.append((0.5 * (b - a) * _GL_W + 0.0 * a).ravel())
        t = np.concatenate(ts)
        w = np.concatenate(ws)
        inside = np.abs(t) < L
        dip = np.where(inside, -self.depth * np.sin(np.pi * t / L), 0.0)
        slope = np.where(inside, -self.depth * np.pi / L * np.cos(np.pi * t / L), 0.0)
        return t + 1j * dip, w * (1 + 1j * slope)

    def _reflection(self):
        parts = [self._reflection_chunk(sl) for sl in _chunks(self.kz.size)]
        self._refl = np.concatenate(parts)
        self._refl_exp = np.abs((self.kappa * self.spec.rho_c).imag) - 1j * self.kappa * self.spec.rho_c

    def _reflection_chunk(self, sl):
        """Scattered amplitudes per unit incident amplitude, normalized at the surface."""
        rc, eps = self.spec.rho_c, self.spec.epsilon
        kappa, kappa_in = self.kappa[sl], self.kappa_in[sl]
        k, k1, kz, ns = kappa[:, None], kappa_in[:, None], self.kz[sl, None], self.ns[None, :]
        jo_val, jo = _cyl(special.jve, self.n_max, kappa * rc, self.ns)
        ho_val, ho = _cyl(special.hankel1e, self.n_max, kappa * rc, self.ns)
        _, ji = _cyl(special.jve, self.n_max, kappa_in * rc, self.ns)
        nkz = ns * kz / rc
        shape = jo.shape
        M = np.zeros(shape + (4, 4), dtype=complex)
        # unknowns: scattered (E_z, H_z), transmitted (E_z, H_z), all scaled to their value at rho_c
        M[..., 0, 0] = 1
        M[..., 0, 2] = -1
        M[..., 1, 1] = 1
        M[..., 1, 3] = -1
        M[..., 2, 0] = -nkz / k**2
        M[..., 2, 1] = -1j * K0 * ho / k
        M[..., 2, 2] = nkz / k1**2
        M[..., 2, 3] = 1j * K0 * ji / k1
        M[..., 3, 0] = 1j * K0 * ho / k
        M[..., 3, 1] = -nkz / k**2
        M[..., 3, 2] = -1j * K0 * eps * ji / k1
        M[..., 3, 3] = nkz / k1**2
        # incident unit E_z wave (column 0) and unit H_z wave (column 1)
        rhs = np.zeros(shape + (4, 2), dtype=complex)
        rhs[..., 0, 0] = -1
        rhs[..., 1, 1] = -1
        rhs[..., 2, 0] = nkz / k**2
        rhs[..., 2, 1] = 1j * K0 * jo / k
        rhs[..., 3, 0] = -1j * K0 * jo / k
        rhs[..., 3, 1] = nkz / k**2
        sol = np.linalg.solve(M, rhs)[..., :2, :]
        # incident J_n(k rc), scattered H_n(k rc) normalizations, exponent scalings kept apart
        return sol * (jo_val / ho_val)[..., None, None]

    def spectral(self, rho_o, rho_s, dphi):
        """Spectral tensor per node, shape ``(nodes, 3, 3)``, cylindrical components.

        Rows are ``(rho, phi, z)`` components at the observer, columns the
        ``(rho, phi, z)`` components of the source dipole.
        """
        return self._spectral_cached(float(rho_o), float(rho_s), float(dphi))

    @lru_cache(maxsize=32)
    def _spectral_cached(self, rho_o, rho_s, dphi):
        rc = self.spec.rho_c
        if rho_o <= rc or rho_s <= rc:
            raise ValueError("both points must lie outside the wire")
        out = np.concatenate([self._spectral_chunk(sl, rho_o, rho_s, dphi) for sl in _chunks(self.kz.size)])
        out.setflags(write=False)
        return out

    def _spectral_chunk(self, sl, rho_o, rho_s, dphi):
        kappa = self.kappa[sl]
        k, kz, ns = kappa[:, None], self.kz[sl, None], self.ns[None, :]
        hs_val, hs = _cyl(special.hankel1e, self.n_max, kappa * rho_s, self.ns)
        ho_val, ho = _cyl(special.hankel1e, self.n_max, kappa * rho_o, self.ns)
        scale = hs_val * ho_val * np.exp(self._refl_exp[sl] + 1j * kappa * (rho_s + rho_o))[:, None]
        scale = scale * np.exp(1j * ns * dphi)
        # source dipole -> incident (E_z, H_z) amplitudes; columns p_rho, p_phi, p_z
        src = np.zeros(scale.shape + (2, 3), dtype=complex)
        d_rho, d_phi, d_z = k * hs, -1j * ns / rho_s, -1j * kz * np.ones_like(hs)
        for c, d in enumerate((d_rho, d_phi, d_z)):
            src[..., 0, c] = -1j * kz * d / K0**2
        src[..., 0, 2] += 1.0
        src[..., 1, 0] = -(1j * ns / rho_s) / (1j * K0) * np.ones_like(hs)
        src[..., 1, 1] = -(k * hs) / (1j * K0)
        # outgoing (E_z, H_z) amplitudes -> field components at the observer
        obs = np.zeros(scale.shape + (3, 2), dtype=complex)
        obs[..., 0, 0] = 1j * kz * ho / k
        obs[..., 0, 1] = -ns * K0 / rho_o / k**2
        obs[..., 1, 0] = -ns * kz / rho_o / k**2
        obs[..., 1, 1] = -1j * K0 * ho / k
        obs[..., 2, 0] = 1.0
        full = obs @ self._refl[sl] @ src
        return np.einsum("jn,jnab->jab", scale, full)

    def tensor_from_spectral(self, spec_tensor, dz):
        """Integrate a spectral tensor against ``exp(i k_z dz)`` for each ``dz``."""
        dz = np.atleast_1d(np.asarray(dz, dtype=float))
        phase = self.weights[None, :] * np.exp(1j * np.outer(dz, self.kz))
        return 1j / (8 * np.pi) * np.einsum("dj,jab->dab", phase, spec_tensor)

    def cylindrical(self, rho_o, rho_s, dphi, dz):
        return self.tensor_from_spectral(self.spectral(rho_o, rho_s, dphi), dz)

    def cartesian(self, r_o, r_s):
        """Scattered tensor between two Cartesian points."""
        x1, y1, z1 = r_o
        x2, y2, z2 = r_s
        rho_o, phi_o = np.hypot(x1, y1), np.arctan2(y1, x1)
        rho_s, phi_s = np.hypot(x2, y2), np.arctan2(y2, x2)
        g = self.cylindrical(rho_o, rho_s, phi_o - phi_s, z1 - z2)[0]
        return _rotation(phi_o) @ g @ _rotation(phi_s).T


def _chunks(n, size=2048):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def _rotation(phi):
    """Columns are the unit vectors ``rho, phi, z`` at azimuth ``phi`` in Cartesian axes."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@lru_cache(maxsize=16)
def wire_green(spec, n_max=12, refine=1):
    """Shared, cached :class:`WireGreen` for a wire."""
    return WireGreen(spec, n_max=n_max, refine=refine)


def scattered_green(r1, r2, spec, n_max=12, check=False, tol=1e-5):
    """Wire-scattered part of the Green's tensor between two Cartesian points.

    With ``check`` on, the value is recomputed with doubled ``n_max`` and
    doubled node density; a relative change above ``tol`` raises
    :class:`ConvergenceError`.
    """
    g = wire_green(spec, n_max).cartesian(r1, r2)
    if check:
        ref = wire_green(spec, 2 * n_max, 2).cartesian(r1, r2)
        scale = max(np.abs(ref).max(), 1e-300)
        err = np.abs(g - ref).max() / scale
        if err > tol:
            raise ConvergenceError(f"scattered tensor changed by {err:.2e} under refinement")
    return g


# -- coupling matrix ------------------------------------------------------------


def _project(d, g):
    return -3 * np.pi / K0 * np.einsum("i,...ij,j->...", d.conj(), g, d)


def coupling_pairs(dz, spec, dipoles, delta_rho, n_max=12, free_space_coupling=True):
    """``Sigma`` between two emitters separated axially by each ``dz`` (observer minus source).

    Both emitters sit on the ``+x`` side of the wire at radius
    ``rho_c + delta_rho``. ``dz = 0`` gives the diagonal element: wire-induced
    part plus ``-i / 2`` from vacuum.
    """
    d = dipoles.vector if isinstance(dipoles, DipoleSpec) else np.asarray(dipoles, dtype=complex)
    dz = np.atleast_1d(np.asarray(dz, dtype=float))
    rho = spec.rho_c + delta_rho
    wg = wire_green(spec, n_max)
    g = wg.cylindrical(rho, rho, 0.0, dz)  # at azimuth 0 the cylindrical and Cartesian axes coincide
    out = _project(d, g)
    for i, s in enumerate(dz):
        if s == 0:
            out[i] += -0.5j
        elif free_space_coupling:
            out[i] += _project(d, free_space_green([rho, 0.0, s], [rho, 0.0, 0.0]))
    return out


def self_energy_pair(k, l, geom, spec, dipoles, n_max=12, free_space_coupling=True):
    """Single element ``Sigma_kl`` (0-based emitter indices)."""
    dz = geom.z[k] - geom.z[l]
    return complex(coupling_pairs([dz], spec, dipoles, geom.delta_rho, n_max, free_space_coupling)[0])


def self_energy_matrix(geom, spec, dipoles, n_max=12, free_space_coupling=True):
    """All couplings ``Sigma_kl`` of a chain alongside the wire."""
    dz = geom.z[:, None] - geom.z[None, :]
    vals = coupling_pairs(dz.ravel(), spec, dipoles, geom.delta_rho, n_max, free_space_coupling)
    return SelfEnergyMatrix(vals.reshape(geom.N, geom.N))


def asymmetry_ratio(delta_z, spec, dipoles, delta_rho, n_max=12, free_space_coupling=False):
    """``|Sigma_forward| / |Sigma_backward|`` at axial separation ``delta_z > 0``.

    By default only the wire-mediated coupling is compared.
    """
    dz = np.atleast_1d(np.asarray(delta_z, dtype=float))
    if np.any(dz <= 0):
        raise ValueError("delta_z must be positive")
    fwd = coupling_pairs(dz, spec, dipoles, delta_rho, n_max, free_space_coupling)
    bwd = coupling_pairs(-dz, spec, dipoles, delta_rho, n_max, free_space_coupling)
    ratio = np.abs(fwd) / np.abs(bwd)
    return float(ratio[0]) if np.ndim(delta_z) == 0 else ratio
