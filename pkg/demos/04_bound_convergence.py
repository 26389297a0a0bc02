"""Normalized log of the finite-length bound approaching the exponent.

Single uniform class, BSC(0.1), p=[0.9, 0.1], t=1. The bound's prefactor is 1
here, so -(1/n) log bound equals the exponent at every n; with two classes the
prefactor 5/2 shows up as a 1/n correction.

Run:  python3 demos/04_bound_convergence.py
"""
import numpy as np

from jsccexp import (
    DistributionSet,
    PartitionSpec,
    best_pair_search,
    csiszar_jscc_exponent_dual,
    example_6x4,
    gallager_jscc_exponent,
    theorem1_bound,
    to_bits,
    uniform_input,
    validate_channel,
    validate_source,
)

src = validate_source([0.9, 0.1])
w = validate_channel([[0.9, 0.1], [0.1, 0.9]])
u = uniform_input(2)
e = gallager_jscc_exponent(src, w, 1.0, DistributionSet.of(u)).value
print(f"single-class exponent: {e:.6e} nats")
for n in (10, 50, 100, 200, 400):
    b = theorem1_bound(src, w, PartitionSpec.single(u, n), n)
    print(f"  n={n:4d}  -(1/n) log bound = {-b.log_bound / n:.6e}")

# the example channel at t=2 with its best two-class partition
w6 = example_6x4()
s6 = validate_source([0.972, 0.028])
bp = best_pair_search(s6, w6, 2.0)
ecs = csiszar_jscc_exponent_dual(s6, w6, 2.0).value
print(f"\nexample channel, E_J^Cs = {to_bits(ecs):.5f} bits")
for n in (25, 50, 100, 200):
    k = 2 * n
    part = PartitionSpec(bp.gamma, bp.pair[0], bp.pair[1], k)
    b = theorem1_bound(s6, w6, part, n)
    print(f"  n={n:4d} k={k:4d}  -(1/n) log2 bound = {to_bits(-b.log_bound / n):.5f}")
