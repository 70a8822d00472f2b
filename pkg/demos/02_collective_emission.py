"""Super- and subradiance of a phased excitation on a chiral chain.

A state with a uniform phase ramp along the chain radiates at an initial
rate that depends only on the mismatch ``xi`` between the ramp and the
guided-mode phase. At ``xi = 0`` the emitters add up constructively. At
``xi = 2 pi m / N`` they interfere destructively and the guided contribution
drops to its floor of ``-gamma_g / 2``.

Run with ``python demos/02_collective_emission.py``.
"""

import numpy as np

from chiralchain import ChainGeometry, ModeModel, PhasedDickeState, gamma_init_closed, gamma_init_slope

N = 10
mode = ModeModel(gamma_g=1.0, gamma_r=1.0, k_g=2 * np.pi)
chain = ChainGeometry.regular(N, spacing=0.3)

print("xi / pi   closed form   finite-difference slope")
for xi in np.linspace(0, 2 * np.pi, 9):
    psi = mode.k_g.real * 0.3 - xi
    slope = gamma_init_slope(PhasedDickeState(N, psi), mode, chain)
    print(f"{xi / np.pi:6.2f}   {gamma_init_closed(xi, N, mode):11.5f}   {slope:11.5f}")

# Large chains: a unidirectional mode collects only half of the symmetric
# Dicke enhancement, because each emitter talks to its upstream neighbours only.
big = 400
uni = ModeModel(gamma_g=1.0, gamma_r=1e-3)
sym = ModeModel(gamma_g=1.0, gamma_r=1e-3, k_g=2 * np.pi, beta=0.5)
print(f"\nN = {big}, in phase:")
print(f"  unidirectional Gamma / (N gamma_g) = {gamma_init_closed(0.0, big, uni) / big:.3f}")
rate = gamma_init_slope(PhasedDickeState(40, 0.0), sym, ChainGeometry.regular(40, 1.0))
print(f"  symmetric (N = 40)  Gamma / (N gamma_g) = {rate / 40:.3f}")
