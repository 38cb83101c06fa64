# %% [markdown]
# # Pucci spectrum on an interval
#
# For the maximal Pucci operator with ellipticity constants (1, 2) every
# eigenfunction is a chain of sine arches.  Positive arches see the lower
# constant, negative ones the upper, so the eigenvalues have a closed form
# that the node solver should reproduce.

# %%
import math

import numpy as np

from radialeig import pucci_plus, spectrum
from radialeig.nehari import piece_signs

spec = pucci_plus(1.0, 2.0)
sp = spectrum(spec, 3, (0.0, 1.0))

# %%
for pair in sorted(sp, key=lambda p: (p.n, -p.sign)):
    signs = piece_signs(pair.n, pair.sign)
    pos = sum(s > 0 for s in signs)
    closed = math.pi ** 2 * (pos + (len(signs) - pos) * math.sqrt(2.0)) ** 2
    nodes = ", ".join(f"{t:.6f}" for t in (pair.nodes.t if pair.nodes else ()))
    print(f"n={pair.n} {'+' if pair.sign > 0 else '-'}  {pair.lam:14.9f}  "
          f"closed {closed:14.9f}  nodes [{nodes}]")

# %% [markdown]
# The two families split from n = 0 on and meet again whenever the number
# of positive and negative arches is equal (odd n).

# %%
ts = np.linspace(0.0, 1.0, 11)
pair = [p for p in sp if p.n == 2 and p.sign == 1][0]
print(np.round(pair.eigenfunction(ts), 4))
