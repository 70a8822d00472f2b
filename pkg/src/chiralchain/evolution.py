"""Single-excitation dynamics under a general complex coupling matrix.

In the pole approximation the resolvent of the single-excitation subspace
has a frequency-independent self-energy, and the evolution operator is
``exp(-i h t)`` with ``h = delta_L + Sigma`` (units of ``gamma_0``).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .chiral import ChainGeometry, ModeModel, Trajectory, _check_normalized, evolve
from .errors import GeometryError, NumericalError, StepSizeError
from .greens import DipoleSpec, NanowireSpec, SelfEnergyMatrix, self_energy_matrix, spp_mode

__all__ = [
    "EffectiveHamiltonian",
    "DisorderConfig",
    "NanowireModel",
    "EnsembleResult",
    "Calibration",
    "ideal_selfenergy",
    "effective_hamiltonian",
    "evolve_matrix_exp",
    "evolve_ode_oracle",
    "perturbed_positions",
    "realization_seed",
    "disorder_ensemble",
    "calibrate",
    "peak_times",
]


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Non-Hermitian single-excitation Hamiltonian in the rotating frame."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def N(self):
        return self.matrix.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvals(self.matrix)

    def is_dissipative(self, tol=1e-10):
        return bool(np.all(self.eigenvalues().imag <= tol))


def ideal_selfenergy(mode, geom):
    """Coupling matrix of the ideal waveguide with directionality ``beta``.

    The dominant direction couples with amplitude ``gamma_g / 2`` and the
    other one is reduced by the contrast ``min(beta, 1-beta) / max(beta, 1-beta)``,
    so ``beta = 1`` is the cascaded chain and ``beta = 0.5`` the symmetric
    waveguide with coupling ``gamma_g / 2`` both ways.
    """
    beta = mode.beta
    top = max(beta, 1.0 - beta)
    fwd, bwd = 0.5 * mode.gamma_g * beta / top, 0.5 * mode.gamma_g * (1.0 - beta) / top
    dz = geom.z[:, None] - geom.z[None, :]
    phase = np.exp(1j * complex(mode.k_g) * np.abs(dz))
    lower = np.tril(np.ones((geom.N, geom.N), dtype=bool), k=-1)
    sigma = np.where(lower, -1j * fwd * phase, np.where(lower.T, -1j * bwd * phase, 0.0))
    np.fill_diagonal(sigma, -0.5j * mode.gamma_tot)
    return SelfEnergyMatrix(sigma)


def effective_hamiltonian(sigma, delta_L=0.0):
    values = sigma.values if isinstance(sigma, SelfEnergyMatrix) else np.asarray(sigma, dtype=complex)
    return EffectiveHamiltonian(values + delta_L * np.eye(values.shape[0]))


def _matrix(h):
    return h.matrix if isinstance(h, EffectiveHamiltonian) else np.asarray(h, dtype=complex)


def evolve_matrix_exp(h, c0, times, check=True, tol=1e-7):
    """``C(t) = exp(-i h t) c0`` on a time grid.

    With ``check`` on, each sample is compared with the previous one
    propagated across the gap, ``exp(-i h (t_j - t_{j-1})) C(t_{j-1})``;
    a discrepancy above ``tol`` raises :class:`NumericalError`.
    """
    m = _matrix(h)
    c0 = _check_normalized(c0)
    times = np.asarray(times, dtype=float).ravel()
    amps = np.empty((m.shape[0], times.size), dtype=complex)
    for j, t in enumerate(times):
        amps[:, j] = expm(-1j * m * t) @ c0
    if check and times.size > 1:
        steps = np.diff(times)
        for j, dt in enumerate(steps):
            pred = expm(-1j * m * dt) @ amps[:, j]
            err = np.max(np.abs(pred - amps[:, j + 1]))
            if err > tol:
                raise NumericalError(f"matrix exponential residual {err:.3e} at t = {times[j + 1]}")
    return Trajectory(times, amps)


def evolve_ode_oracle(h, c0, times, rtol=1e-11, atol=1e-13):
    """Adaptive Runge-Kutta (DOP853) integration of ``dC/dt = -i h C``.

    Meant for cross-validation only. ``times`` may run backwards.
    """
    m = _matrix(h)
    c0 = np.asarray(c0, dtype=complex).ravel()
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 1 or np.all(times == times[0]):
        return Trajectory(times, np.repeat(c0[:, None], times.size, axis=1))
    sol = solve_ivp(
        lambda t, y: -1j * (m @ y),
        (times[0], times[-1]),
        c0,
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepSizeError(sol.message)
    return Trajectory(times, sol.y)


@dataclass(frozen=True)
class DisorderConfig:
    """Uniform axial disorder ``z_n + U(-a, a)`` for ``realizations`` draws."""

    realizations: int = 20
    amplitude: float = 0.0
    master_seed: int = 0
    max_retries: int = 100


def realization_seed(master_seed, index):
    """Independent stream for realization ``index``; does not depend on scheduling."""
    return np.random.SeedSequence([int(master_seed), int(index)])


def perturbed_positions(z, amplitude, seed, max_retries=100):
    """Draw strictly increasing positions ``z + U(-a, a)``, resampling if needed."""
    z = np.asarray(z, dtype=float)
    if amplitude == 0:
        return z.copy()
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        cand = z + rng.uniform(-amplitude, amplitude, size=z.size)
        if np.all(np.diff(cand) > 0):
            return cand
    raise GeometryError(f"no increasing position vector after {max_retries} draws (a = {amplitude})")


@dataclass(frozen=True)
class NanowireModel:
    """Emitters coupled through the full Green's tensor of a metallic wire."""

    spec: NanowireSpec
    dipole: DipoleSpec = field(default_factory=DipoleSpec)
    free_space_coupling: bool = True
    n_max: int = 12

    def self_energy(self, geom):
        return self_energy_matrix(
            geom,
            self.spec,
            self.dipole,
            free_space_coupling=self.free_space_coupling,
            n_max=self.n_max,
        )


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray  # N x T, averaged probabilities
    positions: list
    probabilities: list  # per-realization N x T arrays, in realization order


def _run_realization(model, geom, c0, times):
    if isinstance(model, ModeModel):
        if model.beta == 1.0:
            return evolve(c0, times, model, geom).probabilities
        h = effective_hamiltonian(ideal_selfenergy(model, geom), model.delta_L)
    else:
        h = effective_hamiltonian(model.self_energy(geom))
    return evolve_matrix_exp(h, c0, times).probabilities


def _exact_mean(stack):
    """Correctly rounded mean along axis 0 (independent of summation order)."""
    flat = stack.reshape(stack.shape[0], -1)
    sums = np.array([math.fsum(col) for col in flat.T])
    return (sums / stack.shape[0]).reshape(stack.shape[1:])


def disorder_ensemble(geom, cfg, model, c0, times, threads=1):
    """Average ``P_n(t)`` over randomly displaced copies of ``geom``.

    ``model`` is a :class:`ModeModel` (ideal waveguide) or a
    :class:`NanowireModel`. Realization ``i`` uses the seed derived from
    ``(cfg.master_seed, i)``, and the mean is correctly rounded, so the
    result is bit-identical for any thread count.
    """
    times = np.asarray(times, dtype=float)
    positions = [
        perturbed_positions(geom.z, cfg.amplitude, realization_seed(cfg.master_seed, i), cfg.max_retries)
        for i in range(cfg.realizations)
    ]

    def work(z):
        return _run_realization(model, geom.with_positions(z), c0, times)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            probs = list(pool.map(work, positions))
    else:
        probs = [work(z) for z in positions]
    return EnsembleResult(times, _exact_mean(np.stack(probs)), positions, probs)


@dataclass(frozen=True)
class Calibration:
    """Ideal-model parameters extracted from a computed coupling matrix."""

    gamma_g: float
    gamma_tot: float
    delta_L: float
    k_g: complex
    lambda_pl: float
    forward_phase: float

    def mode_model(self):
        return ModeModel(
            gamma_g=self.gamma_g,
            gamma_r=self.gamma_tot - self.gamma_g,
            delta_L=self.delta_L,
            k_g=self.k_g,
            beta=1.0,
        )

    def as_dict(self):
        return {
            "gamma_g": self.gamma_g,
            "gamma_tot": self.gamma_tot,
            "gamma_r": self.gamma_tot - self.gamma_g,
            "delta_L": self.delta_L,
            "k_g": [self.k_g.real, self.k_g.imag],
            "lambda_pl": self.lambda_pl,
            "forward_phase": self.forward_phase,
        }


def calibrate(sigma, geom, k_g):
    """Match the ideal cascaded model to a coupling matrix on a regular chain.

    ``gamma_tot`` and the shift come from the mean diagonal; the coupling
    comes from the mean nearest-neighbour forward element, written as
    ``-i (gamma_g / 2) exp(i k_g dz)`` with the guided-mode ``k_g``.
    """
    values = sigma.values if isinstance(sigma, SelfEnergyMatrix) else np.asarray(sigma)
    if geom.N < 2:
        raise ValueError("calibration needs at least two emitters")
    diag = np.diag(values)
    fwd = np.diag(values, k=-1)
    spacing = float(np.mean(np.diff(geom.z)))
    k_g = complex(k_g)
    mean_fwd = np.mean(fwd)
    gamma_g = 2.0 * abs(mean_fwd) * math.exp(k_g.imag * spacing)
    return Calibration(
        gamma_g=float(gamma_g),
        gamma_tot=float(-2.0 * diag.imag.mean()),
        delta_L=float(diag.real.mean()),
        k_g=k_g,
        lambda_pl=2 * math.pi / k_g.real,
        forward_phase=float(np.angle(2j * mean_fwd)),
    )


def peak_times(times, p):
    """Time of the global maximum of each row of ``p``, refined by a parabola."""
    times = np.asarray(times, dtype=float)
    p = np.atleast_2d(p)
    out = []
    for row in p:
        i = int(np.argmax(row))
        if 0 < i < row.size - 1:
            y0, y1, y2 = row[i - 1 : i + 2]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            out.append(times[i] + shift * (times[i + 1] - times[i - 1]) / 2)
        else:
            out.append(times[i])
    return np.array(out)
