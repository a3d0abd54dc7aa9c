# %% [markdown]
# # Link success under fading
#
# One transmitter, one receiver 25 m away and a handful of vehicles that may
# transmit in the same slot.  How often does the packet clear an 8 dB SIR
# threshold?

# %%
import numpy as np

from vanet_safety import (FadingModel, LinkScenario, asyncize, ps_enumeration_oracle,
                          ps_nakagami_laplace, ps_nakagami_mc, ps_rayleigh_exact)

link = LinkScenario.from_pairs(25.0, [(50.0, 0.1), (75.0, 0.1), (100.0, 0.1)])
print("Rayleigh, closed form:  ", round(ps_rayleigh_exact(link), 6))
print("Rayleigh, 2^n states:   ", round(ps_enumeration_oracle(link), 6))

# %% [markdown]
# A Monte Carlo estimate is the only route for arbitrary shapes; for integer
# m the Laplace-transform series gives the exact value to compare with.

# %%
rng = np.random.default_rng(0)
for m in (1, 2, 3, 5):
    nak = LinkScenario.from_pairs(25.0, [(50.0, 0.1), (75.0, 0.1), (100.0, 0.1)],
                                  fading=FadingModel.nakagami(m))
    est = ps_nakagami_mc(nak, 200_000, rng)
    print(f"m={m}: MC {est.value:.5f} +/- {est.std_error:.5f}   exact {ps_nakagami_laplace(nak):.5f}")

# %% [markdown]
# Without slot alignment an interferer overlaps two of our slots, so its
# per-slot activity rises from p to 2p - p^2.

# %%
p = np.array([0.1, 0.1, 0.1])
print("aligned:  ", round(ps_rayleigh_exact(link), 5))
print("unaligned:", round(ps_rayleigh_exact(link.with_probs(asyncize(p))), 5))
