"""Feeding the adversarial stream to a bounded-space algorithm.

The stream lists 2*M*N copies of the packing class by class.  An algorithm
that may keep only M bins open cannot mix classes, so it pays about one
bin's worth per class and copy, while offline one bin per copy suffices.
"""

from fractions import Fraction

from cubeadv import assemble, build_instance, ratio_check, run, warmup_family, weight
from cubeadv.adversary import instance_to_text, offline_bound, validate_assignment

p = assemble(warmup_family(3), Fraction(1, 9))
i = build_instance(p, M=2)
print(instance_to_text(i))

cert = offline_bound(i)
print(f"offline: {cert.bin_count} bins, explicit assignment valid={validate_assignment(cert, i)}")

rep = run(i, "ClassNextFit")
chk = ratio_check(rep, p)
print(f"ClassNextFit: {rep.total_bins} bins, ratio {rep.ratio}, weight {weight(p)}")
print(f"any M-bounded algorithm: >= {rep.universal_lb} bins, ratio >= {chk.universal_ratio}")

print("\nlarger d, exact big-integer counts:")
for d, M in [(4, 3), (8, 2), (20, 2)]:
    q = assemble(warmup_family(d), mode="counted")
    r = run(build_instance(q, M))
    print(f"  d={d} M={M}: {len(str(r.total_bins))}-digit bin count, ratio {r.ratio}")

per = run(build_instance(assemble(warmup_family(4), mode="counted"), 1), mode="peritem")
cnt = run(build_instance(assemble(warmup_family(4), mode="counted"), 1), mode="counted")
print(f"\nper-item and counted runs agree: {per.to_json() == cnt.to_json()}")
