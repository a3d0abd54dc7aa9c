# %% [markdown]
# # How far away does an interferer matter?
#
# The interference radius is the distance at which a single always-on
# interferer, averaged over fading, drags the SIR down to the threshold.

# %%
from vanet_safety import FadingModel, PathLoss, interference_radius

beta = 10 ** 0.8
for alpha in (2.0, 3.0, 4.0):
    row = [interference_radius(25.0, beta, PathLoss(alpha), FadingModel.none())]
    row += [interference_radius(25.0, beta, PathLoss(alpha), FadingModel.nakagami(m)) for m in (1, 2, 3, 10)]
    print(f"alpha={alpha}: " + "  ".join(f"{x:7.2f}" for x in row))

# %% [markdown]
# Columns: no fading, then m = 1, 2, 3, 10.  Fading always widens the radius,
# and the widening shrinks as m grows and the channel becomes deterministic.
