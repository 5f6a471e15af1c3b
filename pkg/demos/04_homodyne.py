"""
Reading the swapped pair with weak local oscillators
====================================================

Instead of photon counters, Alice and Bob mix their modes with weak
coherent states. The coincidence rate of two homodyne outputs carries the
same cos(phi) dependence, on top of a small offset from the oscillators
themselves.
"""

import numpy as np

from swapsim import fringe_probability, homodyne_probability, homodyne_simulate

alpha = 0.1
rng = np.random.default_rng(2)

print(" phi    simulated              closed form   normalized   fringe")
for phi in np.linspace(0, 2 * np.pi, 7):
    est = homodyne_simulate(alpha, alpha, phi, 1_000_000, rng)
    exact = homodyne_probability(alpha, 0.0, 0.0, phi)
    normalized = (est.rate - alpha**4 / 4) / (alpha**2 / 2)
    print(f"{phi:5.2f}   {est.rate:.6f} +/- {est.stderr:.6f}   {exact:.6f}      "
          f"{normalized:.3f}        {fringe_probability(phi):.3f}")

# %%
# The oscillator offset limits the homodyne visibility to 1 / (1 + |alpha|^2).
hi = homodyne_probability(alpha, 0, 0, 0.0)
lo = homodyne_probability(alpha, 0, 0, np.pi)
print(f"\nhomodyne visibility at |alpha| = {alpha}: {(hi - lo) / (hi + lo):.4f}")
