# %% [markdown]
# # Collision probability versus channel access
#
# The full experiment: 25 vehicles, four of them blocking line of sight,
# lognormal drivers.  A coarse grid and few trials keep this quick; the CLI
# ``vanet-safety sweep`` runs the full version.

# %%
from vanet_safety import ChainScenario, FadingModel, estimate_collision_probability, sweep_channel_access

grid = [0.01, 0.03, 0.07, 0.12, 0.20]
res = sweep_channel_access(ChainScenario(), grid, trials=1500, seed=1,
                           fadings=[FadingModel.rayleigh(), FadingModel.nakagami(3)])
for scheme in ("independent", "cs"):
    for m in (1, 3):
        p, mean, ci = res.curve(scheme, m)
        print(f"{scheme:11s} m={m}: " + "  ".join(f"{x:.4f}" for x in mean) + f"   (+/- {ci.max():.4f})")

# %% [markdown]
# The curves are nearly flat.  Sub-chain heads behind an obstructive vehicle
# only see brake lights, and those reaction-time chains dominate the count.
# Remove obstructions or silence the radio to see the two extremes.

# %%
for label, sc in (("no obstructions", ChainScenario(obstructions=0)),
                  ("radio silent", ChainScenario(access=0.0))):
    mean, ci = estimate_collision_probability(sc, 1500, seed=1)
    print(f"{label:16s} {mean:.4f} +/- {ci:.4f}")
