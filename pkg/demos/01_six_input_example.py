"""Exponents of the 6-input/4-output example channel.

The channel mixes a symmetric 4-ary block with two "half-split" inputs.
Below rho ~ 0.31 the E0 maximizer spreads over the 4-ary block; above it
jumps to the two split inputs, so E0(rho, W) is not concave and the Csiszar
exponent beats Gallager's single-distribution exponent.

Run:  python3 demos/01_six_input_example.py
"""
import numpy as np

from jsccexp import (
    best_pair_search,
    capacity,
    class_exponents,
    critical_rate,
    csiszar_jscc_exponent_dual,
    csiszar_jscc_exponent_primal,
    entropy,
    example_6x4,
    gallager_jscc_exponent,
    jscc_sphere_packing_exponent,
    maximize_e0,
    to_bits,
    validate_source,
)

w = example_6x4(xi1=0.065, xi2=0.01)
src = validate_source([0.972, 0.028])
t = 2.0

print("W =")
print(w.matrix)
print(f"H(V) = {to_bits(entropy(src)):.4f} bits")
print(f"C    = {to_bits(capacity(w)[0]):.4f} bits/use")
print(f"Rcr  = {to_bits(critical_rate(w)):.4f} bits/use")

# the maximizing input distribution switches between two supports
for rho in (0.2, 0.25, 0.3, 0.31, 0.32, 0.4, 0.6):
    v, q = maximize_e0(rho, w)
    print(f"  rho={rho:4.2f}  E0={to_bits(v):.5f}  Q*={np.round(q.probs, 4)}")

g = gallager_jscc_exponent(src, w, t)
d = csiszar_jscc_exponent_dual(src, w, t)
p = csiszar_jscc_exponent_primal(src, w, t)
sp = jscc_sphere_packing_exponent(src, w, t)
print(f"E_J^G   = {to_bits(g.value):.6f}  (rho*={g.rho:.4f})")
print(f"E_J^Cs  = {to_bits(d.value):.6f}  dual, hull support rho1={d.rho1:.4f}, rho2={d.rho2:.4f}")
print(f"E_J^Cs  = {to_bits(p.value):.6f}  primal, R*={to_bits(p.rate):.4f} bits")
print(f"E_J^sp  = {to_bits(sp.value):.6f}  tight={sp.tight}")

bp = best_pair_search(src, w, t)
print("two-class construction:")
print(f"  Q  (class 1, P(v) < gamma^k) = {np.round(bp.pair[0].probs, 4)}")
print(f"  Q' (class 2)                 = {np.round(bp.pair[1].probs, 4)}")
print(f"  rho0={bp.rho:.4f}  gamma0={bp.gamma0:.4f}  exponent={to_bits(bp.value):.6f}")
e1, e2 = class_exponents(src, w, t, bp)
print(f"  per-class exponents: {to_bits(e1):.6f}, {to_bits(e2):.6f}")
