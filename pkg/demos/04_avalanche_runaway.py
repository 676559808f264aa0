"""Impact-ionization runaway under reverse bias.

The shipped avalanche deck multiplies the ionization production by a
factor of a thousand, which makes the reverse-biased junction unstable:
the carrier norm grows without bound and the stepper refuses to follow
it past the configured threshold.  This is a detected outcome, not a
crash; the result object says when and why integration stopped.
"""

import pathlib

from driftsim import build_models, load_config, run

deck = (pathlib.Path(__file__).resolve().parent.parent
        / "decks" / "avalanche_runaway.yaml")
config = load_config(deck)

result = run(config.device, build_models(config), config.stepper)

print(f"completed      : {result.completed}")
print(f"accepted steps : {result.steps_accepted}")
print(f"rejected steps : {result.steps_rejected}")
print(f"stopped at t   : {result.final.t:.4f} (t_end was {config.stepper.t_end})")

assert result.blowup is not None
print(f"\nreason    : {result.blowup.reason}")
print(f"threshold : {result.blowup.threshold}")
print("trailing norm proxies:")
for t, proxy in list(zip(result.blowup.times, result.blowup.proxies))[-6:]:
    print(f"  t = {t:.4f}  proxy = {proxy:8.3f}")

print("\nevery accepted state stayed positive on the way up:")
floor = min(float(state.u.min()) for state in result.states)
print(f"  min density over the whole run: {floor:.4f}")
