"""Evaluate F_A several ways and compare them.

Run with ``python3 demos/lauricella_tour.py``.
"""
import numpy as np

from holmgren import hyperfun as hf

p = hf.FAParams(1.5, (0.3, 0.4), (0.7, 0.9))

print("small arguments: every route should agree")
for z in ([-0.2, -0.25], [0.1, -0.3], [0.2, 0.2]):
    direct = hf.fa_direct(p, z, 1e-15).value
    tri = hf.fa_decompose_lemma1(p, z).value
    lap = hf.fa_laplace(p, z).value
    print(f"  z={z}: direct={direct:.15f}  triangular={tri:.15f}  laplace={lap:.15f}")

print("\nlarger arguments: the dispatcher switches strategy")
for z in ([-0.6, -0.9], [0.3, -0.5], [-4.0, -6.0]):
    r = hf.fa(p, z, 1e-12)
    print(f"  z={z}: value={r.value:.12f}  strategy={r.strategy}")

print("\n2F1 on the negative axis, series vs transformed")
for z in (-0.5, -0.95, -3.0):
    t = hf.gauss_2f1(0.8, 1.3, 2.1, z, method="transform")
    try:
        s = f"{hf.gauss_2f1(0.8, 1.3, 2.1, z, method='series').value:.15f}"
    except hf.DomainError:
        s = "diverges"
    print(f"  z={z:5.2f}: series={s:17s}  transformed={t.value:.15f}")

print("\nlimit of the rescaled function as the arguments go to -inf")
q = hf.FAParams(3.9, (0.4, 0.5), (1.1, 0.8))
for t in (10.0, 100.0, 1000.0):
    z = -t * np.ones(2)
    val = hf.fa(q, z, 1e-12).value * t ** sum(q.b)
    print(f"  t={t:7.1f}: t^(sum b) F_A = {val:.8f}")
print(f"  closed form: {hf.lemma3_limit(q):.8f}")
