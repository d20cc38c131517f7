"""Gapped codes and separated families of codes.

A ``k``-code is a set of words in ``[k]^d``.  Each word places one copy of
the size-``k`` cube (see :mod:`cubeadv.packing`).  Two constructions are
provided:

* the warm-up family, with ``L_k`` the words having letter ``k`` at
  coordinate ``k`` and letters below ``k`` elsewhere;
* the randomized family, built from ``ceil(d/2)``-subsets ``F_k`` of the
  coordinates with small pairwise intersections.

Both are stored in the same *implicit* form ``(F, J)``: a word is a member
iff its letters lie in ``[k] \\ {k-1}`` on ``F``, in ``[k-1]`` off ``F``, and
for every smaller class ``l`` it carries the letter ``k`` somewhere in
``J[l]``.  The warm-up family is the special case ``F_k = {k}``.  Small codes
can be enumerated into an *explicit* word set.

Coordinates are 1-based throughout, matching the word letters.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

from .numeric import ceil_upward, ln_enclosure
from .rng import Pcg64Stream

Word = tuple[int, ...]

DEFAULT_THRESHOLD = Fraction(10, 11)


@dataclass(frozen=True)
class Caps:
    explicit_words: int = 10**6
    ie_events: int = 20
    per_item: int = 10**5

    def __post_init__(self) -> None:
        if min(self.explicit_words, self.ie_events, self.per_item) <= 0:
            raise ValueError("caps must be positive")


DEFAULT_CAPS = Caps()


class CapExceeded(RuntimeError):
    pass


class RetriesExhausted(RuntimeError):
    def __init__(self, message: str, worst_pair: tuple[int, int, int] | None = None):
        super().__init__(message)
        self.worst_pair = worst_pair


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a certificate check.

    ``kind`` is ``"proven"`` for exhaustive checks and ``"certified"`` when a
    structural argument was verified (plus random spot checks).
    """

    ok: bool
    kind: str
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


# --------------------------------------------------------------------------
# codes


@dataclass
class Code:
    k: int
    d: int
    words: frozenset[Word] | None = None
    F: frozenset[int] | None = None
    J: dict[int, frozenset[int]] | None = None
    count: int = 0
    count_kind: str = "exact"
    certified: bool | None = None
    refused: bool = False

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if (self.words is None) == (self.F is None):
            raise ValueError("a code is either explicit (words) or implicit (F, J)")
        if self.words is not None:
            self.words = frozenset(tuple(w) for w in self.words)
            for w in self.words:
                check_word(w, self.k, self.d)
            self.count = len(self.words)
            self.count_kind = "exact"
        else:
            self.F = frozenset(self.F)
            self.J = {int(l): frozenset(s) for l, s in (self.J or {}).items()}

    @property
    def is_explicit(self) -> bool:
        return self.words is not None

    @property
    def repr(self) -> str:
        return "explicit" if self.is_explicit else "implicit"

    @property
    def exact(self) -> bool:
        return self.count_kind == "exact"

    def __contains__(self, word: Word) -> bool:
        if self.is_explicit:
            return tuple(word) in self.words
        return implicit_member(self.k, self.d, self.F, self.J, word)

    def iter_words(self) -> Iterator[Word]:
        """Members in lexicographic order."""
        if self.is_explicit:
            yield from sorted(self.words)
        else:
            yield from enumerate_implicit(self.k, self.d, self.F, self.J)

    def sample_many(self, rng: Pcg64Stream, n: int, max_rounds: int = 1000) -> np.ndarray:
        """``n`` random members as an ``(n, d)`` array of letters.

        Explicit codes draw uniformly from the sorted word list; implicit
        codes draw candidates uniformly and keep the good ones, which is
        uniform on the code.
        """
        if self.is_explicit:
            if not self.words:
                raise ValueError("empty code")
            pool = np.array(sorted(self.words), dtype=np.int64).reshape(len(self.words), self.d)
            return pool[rng.below_array(len(pool), n)]
        if self.count == 0 and self.exact:
            raise ValueError("empty code")
        k, d = self.k, self.d
        onF = np.zeros(d, dtype=bool)
        onF[[i - 1 for i in self.F]] = True
        on_letters = np.array([v for v in range(1, k + 1) if v != k - 1], dtype=np.int64)
        Jcols = [np.array(sorted(i - 1 for i in Jl), dtype=np.int64) for Jl in self.J.values()]
        found: list[np.ndarray] = []
        have = 0
        for _ in range(max_rounds):
            batch = max(n - have, 16)
            off = 1 + rng.below_array(k - 1, batch * d).reshape(batch, d)
            on = on_letters[rng.below_array(len(on_letters), batch * d).reshape(batch, d)]
            w = np.where(onF, on, off)
            good = np.ones(batch, dtype=bool)
            for cols in Jcols:
                good &= (w[:, cols] == k).any(axis=1) if len(cols) else False
            found.append(w[good])
            have += int(good.sum())
            if have >= n:
                return np.concatenate(found)[:n]
        raise RuntimeError(f"could not draw {n} members of L_{k}")

    def materialize(self, caps: Caps = DEFAULT_CAPS) -> "Code":
        """Explicit copy of an implicit code, subject to the word cap."""
        if self.is_explicit:
            return self
        if self.count > caps.explicit_words or (self.k - 1) ** self.d > caps.explicit_words * 10:
            raise CapExceeded(f"L_{self.k} too large to enumerate")
        words = frozenset(self.iter_words())
        if self.exact and len(words) != self.count:
            raise AssertionError("enumeration disagrees with the exact count")
        return Code(self.k, self.d, words=words, certified=self.certified)


def check_word(w: Iterable[int], k: int, d: int) -> None:
    w = tuple(w)
    if len(w) != d:
        raise ValueError(f"word {w} has length {len(w)}, expected {d}")
    if any(not 1 <= v <= k for v in w):
        raise ValueError(f"word {w} has letters outside [1, {k}]")


def _is_bad(k: int, J: Mapping[int, frozenset[int]], w: Word) -> bool:
    return any(all(w[i - 1] != k for i in Jl) for Jl in J.values())


def implicit_member(k: int, d: int, F, J, w: Word) -> bool:
    w = tuple(w)
    if len(w) != d:
        return False
    for i, v in enumerate(w, start=1):
        if i in F:
            if not (1 <= v <= k and v != k - 1):
                return False
        elif not 1 <= v <= k - 1:
            return False
    return not _is_bad(k, J, w)


def enumerate_implicit(k: int, d: int, F, J) -> Iterator[Word]:
    on = [v for v in range(1, k + 1) if v != k - 1]
    off = list(range(1, k))
    choices = [on if i in F else off for i in range(1, d + 1)]
    for w in itertools.product(*choices):
        if not _is_bad(k, J, w):
            yield w


# --------------------------------------------------------------------------
# certificates


def is_gapped(c: Code) -> bool:
    """Every coordinate misses ``k-1`` or misses ``k``."""
    k = c.k
    if c.is_explicit:
        seen = [set() for _ in range(c.d)]
        for w in c.words:
            for i, v in enumerate(w):
                seen[i].add(v)
        return all(not (k - 1 in s and k in s) for s in seen)
    # Re-derive the letters each coordinate admits from the representation.
    for i in range(1, c.d + 1):
        allowed = {v for v in range(1, k + 1) if v != k - 1} if i in c.F else set(range(1, k))
        if k - 1 in allowed and k in allowed:
            return False
    return all(1 <= i <= c.d for i in c.F)


def are_separated(
    a: Code,
    b: Code,
    samples: int = 1000,
    seed: int = 0,
) -> CheckResult:
    """Check that every ``u`` in ``a`` and ``w`` in ``b`` have a coordinate
    with ``u_i < a.k`` and ``w_i = b.k``.

    Two explicit codes are compared exhaustively.  Otherwise the structure
    of ``b`` is checked against ``a`` (``b`` forces letter ``b.k`` inside
    ``J[a.k]``, which lies off ``F_a`` where ``a`` only uses letters below
    ``a.k``), and ``samples`` random pairs are verified directly.
    """
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    if not a.k < b.k:
        raise ValueError(f"need a.k < b.k, got {a.k}, {b.k}")

    def sep(u: Word, w: Word) -> bool:
        return any(x < a.k and y == b.k for x, y in zip(u, w))

    if a.is_explicit and b.is_explicit:
        for u in sorted(a.words):
            for w in sorted(b.words):
                if not sep(u, w):
                    return CheckResult(False, "proven", (u, w), "no separating coordinate")
        return CheckResult(True, "proven", detail=f"{len(a.words) * len(b.words)} pairs")

    structural = True
    detail = ""
    if not a.is_explicit and not b.is_explicit:
        Jl = b.J.get(a.k)
        if not Jl:
            structural, detail = False, f"J({a.k},{b.k}) missing or empty"
        elif Jl & a.F:
            structural, detail = False, f"J({a.k},{b.k}) meets F_{a.k}"
        elif not Jl <= b.F:
            structural, detail = False, f"J({a.k},{b.k}) not inside F_{b.k}"
    elif a.is_explicit:
        # Explicit small class against an implicit large one: every word of
        # ``a`` must sit below a.k on all of J[a.k].
        Jl = b.J.get(a.k)
        if not Jl or not Jl <= b.F:
            structural, detail = False, f"J({a.k},{b.k}) unusable"
        else:
            for u in sorted(a.words):
                if any(u[i - 1] >= a.k for i in Jl):
                    return CheckResult(False, "certified", (u, None), f"{u} reaches {a.k} on J")
    else:
        structural, detail = False, "implicit small class against explicit large class"
    if not structural:
        return CheckResult(False, "certified", None, detail)

    if a.count == 0 or b.count == 0:
        return CheckResult(True, "certified", detail="empty operand")
    if samples > 0:
        rng = Pcg64Stream(seed)
        U = a.sample_many(rng, samples)
        W = b.sample_many(rng, samples)
        ok = ((U < a.k) & (W == b.k)).any(axis=1)
        if not ok.all():
            j = int(np.argmin(ok))
            u, w = tuple(U[j].tolist()), tuple(W[j].tolist())
            return CheckResult(False, "certified", (u, w), "spot check failed")
    return CheckResult(True, "certified", detail=f"structure + {samples} samples")


def count_good_exact(
    k: int,
    F: Iterable[int],
    J: Mapping[int, Iterable[int]],
    cap: int = DEFAULT_CAPS.ie_events,
) -> int:
    """Number of ``v`` in ``([k] \\ {k-1})^F`` that avoid every bad event.

    Inclusion-exclusion over subsets ``T`` of the events, with
    ``|union of J over T|`` read off a subset-sum transform of the
    per-coordinate event masks.
    """
    F = sorted(set(F))
    events = [l for l in range(2, k)]
    m = len(events)
    if m > cap:
        raise CapExceeded(f"{m} bad events exceed the inclusion-exclusion cap {cap}")
    missing = [l for l in events if l not in J]
    if missing:
        raise ValueError(f"J undefined for l in {missing}")
    pos = {i: n for n, i in enumerate(F)}
    masks = np.zeros(len(F), dtype=np.int64)
    for bit, l in enumerate(events):
        for i in J[l]:
            if i not in pos:
                raise ValueError(f"J({l},{k}) has coordinate {i} outside F")
            masks[pos[i]] |= 1 << bit

    size = 1 << m
    # z[U] = number of coordinates whose event mask is a subset of U
    z = np.bincount(masks, minlength=size).astype(np.int64)
    for bit in range(m):
        v = z.reshape(-1, 2, 1 << bit)
        v[:, 1, :] += v[:, 0, :]
    T = np.arange(size, dtype=np.int64)
    union = len(F) - z[(size - 1) ^ T]
    parity = np.zeros(1, dtype=np.int64)
    for _ in range(m):
        parity = np.concatenate([parity, parity ^ 1])
    even = np.bincount(union[parity == 0], minlength=len(F) + 1)
    odd = np.bincount(union[parity == 1], minlength=len(F) + 1)
    total = 0
    for a, c in enumerate((even - odd).tolist()):
        if c:
            total += c * (k - 2) ** a * (k - 1) ** (len(F) - a)
    return total


def count_good_bruteforce(k: int, F: Iterable[int], J: Mapping[int, Iterable[int]]) -> int:
    """Enumerate ``([k] \\ {k-1})^F`` directly; test oracle for small cases."""
    F = sorted(set(F))
    idx = {i: n for n, i in enumerate(F)}
    Js = [[idx[i] for i in J[l]] for l in range(2, k)]
    alphabet = [v for v in range(1, k + 1) if v != k - 1]
    n = 0
    for v in itertools.product(alphabet, repeat=len(F)):
        if all(any(v[i] == k for i in Jl) for Jl in Js):
            n += 1
    return n


def bound_good_fraction(k: int, J: Mapping[int, Iterable[int]]) -> Fraction:
    """Union-bound lower bound on the fraction of good words (may be <= 0)."""
    q = 1 - Fraction(1, k - 1) if k > 2 else Fraction(0)
    return 1 - sum((q ** len(set(J[l])) for l in range(2, k)), Fraction(0))


# --------------------------------------------------------------------------
# families


def S_of(d: int) -> int:
    """``max(2, ceil(2d / (9 ln d)))``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    lo, hi = ln_enclosure(d)
    return max(2, ceil_upward(Fraction(2 * d) / (9 * hi), Fraction(2 * d) / (9 * lo)))


@dataclass(frozen=True)
class FFamily:
    d: int
    S: int
    seed: int
    sets: dict[int, frozenset[int]]
    intersections: dict[tuple[int, int], int]
    attempts: int

    @property
    def max_intersection(self) -> int:
        return max(self.intersections.values(), default=0)


def intersection_ok(size: int, d: int) -> bool:
    """``size < 7d/26`` as an integer comparison."""
    return 26 * size < 7 * d


def gen_F_family(d: int, S: int, seed: int, max_retries: int = 100_000) -> FFamily:
    """Random ``ceil(d/2)``-subsets ``F_2..F_S`` of ``[1, d]`` with all
    pairwise intersections below ``7d/26``.

    Whole-family rejection: a violating pair discards every set drawn in
    that attempt.  Checking each new set against the earlier ones lets an
    attempt stop as soon as it is doomed, which does not change the
    distribution of the accepted family.
    """
    if d < 2 or S < 2:
        raise ValueError("need d >= 2 and S >= 2")
    r = -(-d // 2)
    rng = Pcg64Stream(seed)
    coords = range(1, d + 1)
    worst: tuple[int, int, int] | None = None
    for attempt in range(1, max_retries + 1):
        sets: dict[int, frozenset[int]] = {}
        masks: dict[int, int] = {}
        inter: dict[tuple[int, int], int] = {}
        failed = False
        for k in range(2, S + 1):
            s = rng.sample(coords, r)
            mask = 0
            for i in s:
                mask |= 1 << i
            for k0, m0 in masks.items():
                n = (mask & m0).bit_count()
                inter[(k0, k)] = n
                if not intersection_ok(n, d):
                    if worst is None or n > worst[2]:
                        worst = (k0, k, n)
                    failed = True
                    break
            if failed:
                break
            sets[k] = frozenset(s)
            masks[k] = mask
        if not failed:
            return FFamily(d, S, seed, sets, inter, attempt)
    raise RetriesExhausted(
        f"no valid F-family for d={d}, S={S} within {max_retries} attempts; "
        f"worst pair {worst}",
        worst,
    )


@dataclass
class CodeFamily:
    d: int
    S: int
    codes: dict[int, Code]
    kind: str
    seed: int | None = None
    F: dict[int, frozenset[int]] = field(default_factory=dict)
    threshold: Fraction = DEFAULT_THRESHOLD

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.codes.values())

    def check(self, samples: int = 200, seed: int = 0) -> dict[str, object]:
        """Re-verify gappedness of every code and separation of every pair."""
        gapped = {k: is_gapped(c) for k, c in self.codes.items()}
        separated = {}
        ks = sorted(self.codes)
        for x, y in itertools.combinations(ks, 2):
            a, b = self.codes[x], self.codes[y]
            if a.count == 0 or b.count == 0:
                separated[(x, y)] = CheckResult(True, "proven", detail="empty operand")
                continue
            separated[(x, y)] = are_separated(a, b, samples=samples, seed=seed)
        return {
            "gapped": gapped,
            "separated": separated,
            "ok": all(gapped.values()) and all(r.ok for r in separated.values()),
        }


def _certify(count: int, k: int, d: int, threshold: Fraction) -> bool:
    return count >= threshold * (k - 1) ** d


def _implicit_code(
    k: int,
    d: int,
    F: frozenset[int],
    J: dict[int, frozenset[int]],
    threshold: Fraction,
    caps: Caps,
) -> Code:
    refused = any(not Jl for Jl in J.values())
    outside = (k - 1) ** (d - len(F))
    if refused:
        good, kind = 0, "exact"
    elif k - 2 <= caps.ie_events:
        good, kind = count_good_exact(k, F, J, cap=caps.ie_events), "exact"
    else:
        frac = bound_good_fraction(k, J)
        good = max(0, math.ceil(frac * (k - 1) ** len(F)))
        kind = "lowerBound"
    count = good * outside
    return Code(
        k,
        d,
        F=F,
        J=J,
        count=count,
        count_kind=kind,
        certified=_certify(count, k, d, threshold),
        refused=refused,
    )


def _family_from_F(
    d: int,
    S: int,
    Fsets: dict[int, frozenset[int]],
    kind: str,
    seed: int | None,
    explicit: bool,
    threshold: Fraction,
    caps: Caps,
) -> CodeFamily:
    codes: dict[int, Code] = {}
    for k in range(2, S + 1):
        J = {l: Fsets[k] - Fsets[l] for l in range(2, k)}
        code = _implicit_code(k, d, Fsets[k], J, threshold, caps)
        if explicit:
            if code.count > caps.explicit_words or not code.exact:
                raise CapExceeded(f"L_{k} has {code.count} words, cap {caps.explicit_words}")
            code = code.materialize(caps)
            code.certified = _certify(code.count, k, d, threshold)
        codes[k] = code
    fam = CodeFamily(d, S, codes, kind, seed, dict(Fsets), threshold)
    return fam


def warmup_family(d: int, caps: Caps = DEFAULT_CAPS) -> CodeFamily:
    """Codes ``L_k`` (``2 <= k <= d``) with letter ``k`` at coordinate ``k``
    and letters below ``k`` elsewhere; ``|L_k| = (k-1)^(d-1)``.

    Codes within the word cap are enumerated, the rest stay implicit.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    Fsets = {k: frozenset({k}) for k in range(2, d + 1)}
    codes: dict[int, Code] = {}
    for k in range(2, d + 1):
        J = {l: frozenset({k}) for l in range(2, k)}
        size = (k - 1) ** (d - 1)
        if size <= caps.explicit_words:
            words = frozenset(
                w[: k - 1] + (k,) + w[k - 1 :]
                for w in itertools.product(range(1, k), repeat=d - 1)
            )
            code = Code(k, d, words=words)
        else:
            code = Code(k, d, F=Fsets[k], J=J, count=size, count_kind="exact")
        code.certified = _certify(code.count, k, d, DEFAULT_THRESHOLD)
        codes[k] = code
    return CodeFamily(d, d, codes, "warmup", None, Fsets)


def build_separated_family(
    d: int,
    seed: int = 0,
    mode: str = "implicit",
    threshold: Fraction = DEFAULT_THRESHOLD,
    caps: Caps = DEFAULT_CAPS,
    max_retries: int = 100_000,
    S: int | None = None,
) -> CodeFamily:
    """Randomized separated family of gapped codes ``L_2..L_S``.

    Each code carries an exact size (inclusion-exclusion, when at most
    ``caps.ie_events`` bad events) or a union-bound lower bound, and a flag
    telling whether ``|L_k| >= threshold * (k-1)^d`` is certified.
    """
    if mode not in ("implicit", "explicit"):
        raise ValueError(f"unknown mode {mode!r}")
    S = S_of(d) if S is None else S
    ff = gen_F_family(d, S, seed, max_retries)
    return _family_from_F(d, S, ff.sets, "probabilistic", seed, mode == "explicit", threshold, caps)


# --------------------------------------------------------------------------
# JSON


def family_to_json(fam: CodeFamily) -> dict:
    codes = []
    for k in sorted(fam.codes):
        c = fam.codes[k]
        entry: dict[str, object] = {"k": k, "repr": c.repr}
        if c.is_explicit:
            entry["words"] = [list(w) for w in sorted(c.words)]
        entry["count"] = str(c.count)
        entry["countKind"] = c.count_kind
        entry["certified1011"] = bool(c.certified)
        if c.refused:
            entry["refused"] = True
        codes.append(entry)
    return {
        "d": fam.d,
        "S": fam.S,
        "kind": fam.kind,
        "seed": fam.seed,
        "F": [sorted(fam.F[k]) for k in sorted(fam.F)],
        "codes": codes,
    }


def family_from_json(data: Mapping) -> CodeFamily:
    d, S, kind = int(data["d"]), int(data["S"]), data["kind"]
    if kind not in ("warmup", "probabilistic"):
        raise ValueError(f"unknown family kind {kind!r}")
    Flist = data.get("F") or []
    Fsets = {k: frozenset(s) for k, s in zip(range(2, S + 1), Flist)}
    codes: dict[int, Code] = {}
    for entry in data["codes"]:
        k = int(entry["k"])
        if entry["repr"] == "explicit":
            code = Code(k, d, words=frozenset(tuple(w) for w in entry["words"]))
            if code.count != int(entry["count"]):
                raise ValueError(f"L_{k}: count field disagrees with the word list")
        else:
            if k not in Fsets:
                raise ValueError(f"implicit L_{k} needs F_{k}")
            J = {l: Fsets[k] - Fsets[l] for l in range(2, k)}
            code = Code(
                k,
                d,
                F=Fsets[k],
                J=J,
                count=int(entry["count"]),
                count_kind=entry["countKind"],
                refused=bool(entry.get("refused", False)),
            )
        code.certified = bool(entry.get("certified1011", False))
        codes[k] = code
    return CodeFamily(d, S, codes, kind, data.get("seed"), Fsets)
