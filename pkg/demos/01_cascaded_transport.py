"""Transport of a single excitation along a unidirectional chain.

The first emitter starts excited. Every downstream emitter is driven only by
the field leaking from upstream, so its population is a Laguerre polynomial
times the single-emitter decay. The n-th emitter shows n - 1 humps, separated
by exact zeros that move outward as the excitation spreads.

Run with ``python demos/01_cascaded_transport.py``.
"""

import numpy as np

from chiralchain import ChainGeometry, ModeModel, evolve
from chiralchain.chiral import count_local_maxima, exact_zero_times, front_zero_times

mode = ModeModel(gamma_g=1.0, gamma_r=0.0, k_g=2 * np.pi)
chain = ChainGeometry.regular(10, spacing=0.25)
# the outermost humps of long chains arrive late, so the window is wide
times = np.linspace(0.0, 60.0, 30001)

traj = evolve(np.eye(chain.N)[0], times, mode, chain)

print("emitter  peak time  peak P    humps")
for n, p in enumerate(traj.probabilities, start=1):
    i = int(np.argmax(p))
    print(f"{n:7d}  {times[i]:9.3f}  {p[i]:.4f}  {count_local_maxima(p):5d}")

# The first zero of the propagator marks the leading wave front. Its
# Bessel-function estimate converges to the exact Laguerre root as n grows.
print("\nfirst wave front")
for n in (4, 8, 10):
    exact = exact_zero_times(n, mode.gamma_g)[0]
    approx = front_zero_times(n, mode.gamma_g, 1)
    print(f"  n = {n:2d}: exact {exact:.4f}, Bessel estimate {approx:.4f}")

print(f"\ntotal population left at t = {times[-1]:g}: {traj.total[-1]:.2e}")
