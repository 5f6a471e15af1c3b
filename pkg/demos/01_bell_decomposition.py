"""
Two independent photons, two entangled mode pairs
=================================================

One photon enters station A and one enters station B. Each station splits
its photon on a balanced beam splitter, so A shares a single excitation
with A' and B shares one with B'. Nothing ever connects A with B, yet the
four-mode state can be rewritten as a sum of products of Bell states in
the (A, B) and (A', B') sectors.
"""

import itertools

from swapsim import bell_states, born_distribution, inner_product, prepare_source, tensor

source = prepare_source()
print(source)

# The photon-number statistics of the source: one photon per station,
# found in either arm with equal weight.
for pattern, p in born_distribution(source, ["A", "A'", "B", "B'"]).items():
    print(f"  n(A, A', B, B') = {pattern}: {p:.3f}")

# %%
# Project onto every product of an (A, B) Bell state with an (A', B') one.
ab, eve = bell_states("AB"), bell_states("Eve")
print("\n<Bell_AB x Bell_Eve | source>")
for i, j in itertools.product(ab, eve):
    c = inner_product(tensor(ab[i], eve[j]), source)
    if abs(c) > 1e-12:
        print(f"  {i:>4} x {j:<4}  {c.real:+.3f}")

# Only the four matching pairs survive, each with weight 1/4. A Bell
# measurement on (A', B') therefore leaves (A, B) in the same Bell state.
