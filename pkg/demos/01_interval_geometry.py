"""Where the cubes of one size class sit along an axis.

Every class-k cube has side (1+eps)/k.  Letters 1..k pick one of k slots on
each axis; consecutive slots touch end to end, the last slot is pulled back
so it ends exactly at 1, and therefore only slots k-1 and k collide.
"""

from fractions import Fraction

from cubeadv import boxes_overlap, check_gap_fact, interval_of, intervals_overlap
from cubeadv.geometry import AxisBox

k, eps = 4, Fraction(1, 16)
print(f"class k={k}, eps={eps}, side={(1 + eps) / k}")
for v in range(1, k + 1):
    iv = interval_of(k, v, eps)
    print(f"  letter {v}: ({iv.lo}, {iv.hi})")

print("\nwhich letter pairs collide?")
for v in range(1, k + 1):
    for w in range(v + 1, k + 1):
        if intervals_overlap(interval_of(k, v, eps), interval_of(k, w, eps)):
            print(f"  {v} and {w}")

# A smaller cube that stays below letter k-1 never reaches the top slot of a
# larger class, as long as eps <= 1/S^2.
S = 6
print(f"\ngap between classes with S={S}, eps=1/{S * S}:")
for small, large in [(2, 3), (3, 6), (5, 6)]:
    print(f"  k={small} vs k'={large}: {check_gap_fact(small, large, S, Fraction(1, S * S))}")

k, eps = 6, Fraction(1, 36)
a = AxisBox(tuple(interval_of(k, v, eps) for v in (2, 2)))
b = AxisBox(tuple(interval_of(k, v, eps) for v in (3, 5)))
print(f"\nwords (2,2) and (3,5) at k=6 overlap: {boxes_overlap(a, b)}")
