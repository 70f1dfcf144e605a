"""
Beyond the oscillator: a quartic well
=====================================

Nothing in the entangled equation is specific to the oscillator.  Here the
spectral oracle (Sturm bisection plus inverse iteration) solves v = x^4 in
1D, its ground state becomes the reference, and the excited states are
checked against the entangled equation without ever passing v to it.
"""
from entangle_verify import NATURAL, make_grid, make_reference_from_numeric, residual_entangled, separable_compose
from entangle_verify.residuals import quartic_potential, residual_reference
from entangle_verify.spectral_oracle import auto_extent, solve_1d

params = NATURAL
potential = quartic_potential()
v = potential.axes[0]

extent = auto_extent(v, params, energy=8.0)
grid = make_grid(round(round(extent / 0.04) * 0.04, 10), 0.01)
pairs = solve_1d(v(grid.axis(0)), grid, params, k=4)
for p in pairs:
    print(f"state {p.index}: E = {p.energy:.7f}, nodes {p.node_count}")

reference = make_reference_from_numeric(pairs[0], params=params)
inner = make_grid(round(int(reference.domain[0] / 0.01) * 0.01, 10), 0.01)
print(f"reference domain |x| <= {reference.domain[0]:.2f}")
print(f"reference residual {residual_reference(reference, potential, params, inner, tolerance=1e-4).residual_rms:.2e}")

for p in pairs[1:]:
    state = separable_compose([p], params)
    report = residual_entangled(state, reference, params, inner, tolerance=1e-4)
    print(f"entangled residual, state {p.index}: {report.residual_rms:.2e} pass={report.passed}")
