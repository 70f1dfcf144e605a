"""
Ladder operators from entangled derivatives
===========================================

a_i = sqrt(hbar / 2 m_r omega) d/dz_i lowers l_i by one with coefficient
sqrt(l_i), and a_i^dag = -sqrt(hbar / 2 m_r omega) d/dz_i* raises it with
sqrt(l_i + 1).  The number operator rebuilt from them returns E_n.
"""
import math

from entangle_verify import NATURAL, eigenstate, ground_state, ladder_apply, make_grid, number_operator_check

params = NATURAL
grid = make_grid(8.0, 0.05, 3)
reference = ground_state(params)

state = eigenstate((2, 1, 0), params)
for axis in (1, 2, 3):
    li = state.quantum_numbers.as_tuple()[axis - 1]
    for direction, want in (("lower", math.sqrt(li)), ("raise", math.sqrt(li + 1))):
        res = ladder_apply(state, reference, axis, direction, params, grid)
        target = res.target.label if res.target else "zero"
        print(f"axis {axis} {direction:5} -> {target:6} coefficient {res.coefficient:.8f} (want {want:.8f})")

###############################################################################
# Lowering the ground state gives the zero field.

zero = ladder_apply(eigenstate((0, 0, 0), params), reference, 1, "lower", params, grid)
print(f"|a_1 Psi_0| / |Psi_0| = {zero.orthogonal_residual:.2e}")

for l in [(0, 0, 0), (1, 1, 0), (2, 1, 1)]:
    check = number_operator_check(eigenstate(l, params), reference, params, grid)
    print(f"N + 3/2 on {l}: {check.lhs_energy:.8f}")
