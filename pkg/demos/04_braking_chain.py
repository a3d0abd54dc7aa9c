# %% [markdown]
# # A braking chain
#
# Five cars at 20 m/s, 25 m apart.  The leader brakes at t = 0; each follower
# starts braking 1.1 s after its predecessor.

# %%
from vanet_safety import VehicleMotion, simulate_chain
from vanet_safety.kinematics import max_safe_brake_delay, transmission_budget

decels = [7.5, 6.2, 8.8, 6.0, 7.1]
motions = [VehicleMotion(-25.0 * k, 20.0, a, 1.1 * k) for k, a in enumerate(decels)]
for ev in simulate_chain(motions):
    print(f"vehicle {ev.follower_index} hits the car ahead at t={ev.time:.3f} s, x={ev.position:.2f} m")

# %% [markdown]
# How late may a follower react?  With equal deceleration the answer is gap/v0;
# a harder-braking follower buys some slack.  Dividing by the packet airtime
# gives the number of transmission opportunities that fit.

# %%
for lead, foll in ((7.5, 7.5), (6.0, 9.0), (9.0, 6.0)):
    t = max_safe_brake_delay(25.0, 20.0, lead, foll)
    print(f"leader {lead} m/s^2, follower {foll} m/s^2: {t:.3f} s, {transmission_budget(t, 6e6, 2000)} slots")
