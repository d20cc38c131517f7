"""The warm-up construction: one code per class, weight a harmonic sum.

Class k uses the words with letter k at coordinate k and smaller letters
elsewhere.  Each class then fills 1/(k-1) of a bin's worth of its own kind.
"""

from fractions import Fraction

from cubeadv import assemble, validate, warmup_family, weight

fam = warmup_family(3)
for k, code in fam.codes.items():
    print(f"L_{k}: {sorted(code.words)}")

p = assemble(fam, Fraction(1, 9))
rep = validate(p)
print(f"\n{len(p.cubes)} cubes, valid={rep.valid}, weight={weight(p)}")
for c in p.cubes:
    print(f"  k={c.k} word={c.word} box=" + " x ".join(f"({iv.lo},{iv.hi})" for iv in c.box.dims))

print("\nweight by dimension (counted mode):")
for d in range(2, 10):
    w = weight(assemble(warmup_family(d), mode="counted"))
    print(f"  d={d}: {w}  (~{float(w):.4f})")
