"""
Grid convergence of the residuals
=================================

Every residual here is a finite-difference evaluation, so on exact states it
is pure truncation error.  With order-4 stencils the error should drop 16x per
halving of h.  This is also why excited states sit a little above 1e-6 at
the default spacing of 0.05.
"""
from entangle_verify import NATURAL, eigenstate, ground_state, make_grid, residual_entangled, residual_relative
from entangle_verify.diffcalc import observed_order
from entangle_verify.residuals import oscillator_potential

params = NATURAL
reference = ground_state(params)
potential = oscillator_potential(params)
spacings = [0.1, 0.05, 0.025]

for l in [(1, 0, 0), (2, 1, 0), (6, 0, 0)]:
    state = eigenstate(l, params)
    rel, ent = [], []
    for h in spacings:
        grid = make_grid(8.0, h, 3)
        rel.append(residual_relative(state, potential, params, grid, mask=reference.node_mask(grid)).residual_rms)
        ent.append(residual_entangled(state, reference, params, grid).residual_rms)
    print(f"state {state.label}")
    print("  relative ", "  ".join(f"{e:.2e}" for e in rel), " orders",
          ", ".join(f"{o:.2f}" for o in observed_order(spacings, rel)))
    print("  entangled", "  ".join(f"{e:.2e}" for e in ent), " orders",
          ", ".join(f"{o:.2f}" for o in observed_order(spacings, ent)))
