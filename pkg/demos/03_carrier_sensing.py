# %% [markdown]
# # Carrier sensing on a lane
#
# Vehicles sit every 25 m.  The transmitter is at the front and its receiver is
# one slot behind.  Vehicles within r_CS of the transmitter defer; the rest may
# collide with us as hidden nodes.

# %%
import numpy as np

from vanet_safety import CsConfig, LinkScenario, cs_components, interference_radius
from vanet_safety.mac import count_hidden_nodes, cs_validity_floor

link = LinkScenario.lattice(25.0, rx_index=1, extent=40, p=0.05)
r_i = interference_radius(link.r, link.beta, link.pathloss, link.fading)
print(f"r_I = {r_i:.1f} m, smallest valid r_CS = {cs_validity_floor(link.r, r_i):.1f} m")

# %% [markdown]
# Growing r_CS removes hidden nodes but also silences more of our own slots.

# %%
for r_cs in np.arange(75.0, 201.0, 25.0):
    access, given_t = cs_components(link, CsConfig(r_cs, p_t=0.05))
    hidden = count_hidden_nodes(25.0, link.r, r_i, r_cs)
    print(f"r_CS={r_cs:5.0f}  hidden={hidden}  P(access)={access:.4f}  P(ok|sent)={given_t:.4f}  "
          f"P_s={access * given_t:.5f}")
