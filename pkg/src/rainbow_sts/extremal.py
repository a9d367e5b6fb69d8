"""A dense 3-graph without a Steiner triple system, and its parity certificate.

The vertex set is split into blocks V_0..V_3 (|V_0| even, the rest odd).
Triples inside V_0, triples with one V_0 vertex and two from the same
V_i, and rainbow triples across V_1, V_2, V_3 are all missing.  Every
pair still has codegree about 3n/4, but counting the cross pairs between
V_1, V_2, V_3 gives an odd number that would have to be covered two at
a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

from .errors import SpecViolation
from .hypercore import DegreeReport, TripleSystem, degree_report


@dataclass(frozen=True)
class ExtremalSpec:
    n: int
    sizes: tuple[int, int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        problems = spec_problems(self.n, self.sizes)
        if problems:
            raise SpecViolation("; ".join(problems))

    def blocks(self) -> list[range]:
        out, start = [], 0
        for s in self.sizes:
            out.append(range(start, start + s))
            start += s
        return out

    def block_of(self) -> list[int]:
        lab = []
        for i, s in enumerate(self.sizes):
            lab.extend([i] * s)
        return lab


def spec_problems(n: int, sizes) -> list[str]:
    out = []
    if len(sizes) != 4:
        return ["need exactly four block sizes"]
    if sum(sizes) != n:
        out.append(f"sizes sum to {sum(sizes)}, not n={n}")
    if any(s < 0 for s in sizes):
        out.append("negative block size")
    if sizes[0] % 2 != 0:
        out.append("|V_0| must be even")
    if any(s % 2 == 0 for s in sizes[1:]):
        out.append("|V_1|, |V_2|, |V_3| must be odd")
    if any(4 * s < n - 32 for s in sizes):
        out.append("every block needs at least n/4 - 8 vertices")
    if n % 6 not in (1, 3):
        out.append(f"n={n} is not 1 or 3 mod 6")
    return out


def is_valid(n: int, sizes) -> bool:
    return not spec_problems(n, tuple(sizes))


def valid_specs(n: int):
    """All valid size vectors for ``n``, in lexicographic order."""
    for s0 in range(0, n + 1, 2):
        for s1 in range(1, n - s0 + 1, 2):
            for s2 in range(1, n - s0 - s1 + 1, 2):
                s3 = n - s0 - s1 - s2
                if s3 >= 1 and is_valid(n, (s0, s1, s2, s3)):
                    yield ExtremalSpec(n, (s0, s1, s2, s3))


def default_spec(n: int) -> ExtremalSpec:
    """Lexicographically least valid size vector closest (in L1) to (n/4, n/4, n/4, n/4)."""
    best = None
    for sp in valid_specs(n):
        dist = sum(abs(4 * s - n) for s in sp.sizes)
        key = (dist, sp.sizes)
        if best is None or key < best[0]:
            best = (key, sp)
    if best is None:
        raise SpecViolation(f"no valid block sizes for n={n}")
    return best[1]


def triple_kind(blocks: tuple[int, int, int]) -> str | None:
    """Which of E_0..E_3 a triple with these block labels belongs to (None if excluded)."""
    zeros = blocks.count(0)
    rest = sorted(b for b in blocks if b != 0)
    if zeros == 2:
        return "E0"
    if zeros == 1:
        return "E1" if rest[0] != rest[1] else None
    if zeros == 0:
        if rest[0] == rest[2]:
            return "E2"
        if rest[0] == rest[1] or rest[1] == rest[2]:
            return "E3"
    return None


def build_extremal(spec: ExtremalSpec) -> TripleSystem:
    lab = spec.block_of()
    keep = [t for t in combinations(range(spec.n), 3)
            if triple_kind((lab[t[0]], lab[t[1]], lab[t[2]])) is not None]
    return TripleSystem(spec.n, keep)


def kind_counts(spec: ExtremalSpec) -> dict[str, int]:
    lab = spec.block_of()
    out = {"E0": 0, "E1": 0, "E2": 0, "E3": 0}
    for t in combinations(range(spec.n), 3):
        k = triple_kind((lab[t[0]], lab[t[1]], lab[t[2]]))
        if k:
            out[k] += 1
    return out


def parity_certificate(spec: ExtremalSpec) -> int:
    """Cross pairs among V_1, V_2, V_3 left for the 2-1 split triples; odd means no STS."""
    v0, v1, v2, v3 = spec.sizes
    return (v1 * v2 + v2 * v3 + v3 * v1) - (v0 // 2) * (spec.n - 2 * v0 + 1)


def codegree_bound(n: int) -> int:
    return math.ceil(3 * n / 4 - 10)


def exact_min_codegree(spec: ExtremalSpec) -> int:
    """Closed form of the minimum codegree, counting third vertices per block pattern."""
    sizes = spec.sizes
    best = None
    for a, b in product(range(4), repeat=2):
        if a > b:
            continue
        avail = list(sizes)
        avail[a] -= 1
        avail[b] -= 1
        if min(avail) < 0:
            continue
        d = sum(avail[c] for c in range(4) if triple_kind((a, b, c)) is not None)
        best = d if best is None else min(best, d)
    return best


def audit_extremal(spec: ExtremalSpec) -> DegreeReport:
    rep = degree_report(build_extremal(spec))
    bound = codegree_bound(spec.n)
    if rep.min_codegree < bound:
        raise AssertionError(f"min codegree {rep.min_codegree} below 3n/4 - 10 = {bound}")
    return rep
