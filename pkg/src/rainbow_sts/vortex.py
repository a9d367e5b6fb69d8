"""Nested vertex sets (vortices) with a codegree condition per color.

A transversal-vortex is a chain U_0 ⊇ U_1 ⊇ … ⊇ U_ℓ, each level an ε
fraction of the previous one, such that every pair inside U_i still has
at least α|U_{i+1}| neighbours in U_{i+1} in every member whose color is
in C_i.  The sampler draws each level uniformly at random and rejects
until the condition holds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import RetriesExhausted
from .hypercore import ComplementTripleSystem, Family


def as_fraction(x) -> Fraction:
    """Exact value of a user-supplied rational; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def levels(n: int, m_prime: int, eps) -> tuple[int, list[int]]:
    """ℓ(n; m') and the sizes n_0..n_ℓ with n_{i+1} = ⌊ε n_i⌋."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    if m_prime < 1:
        raise ValueError("m' must be positive")
    sizes = [n]
    while sizes[-1] > m_prime:
        sizes.append(math.floor(eps * sizes[-1]))
    return len(sizes) - 1, sizes


def restricted_codegrees(H, in_u: np.ndarray) -> np.ndarray:
    """Matrix of d_H(ab; U) for every pair, U given as a boolean mask."""
    if isinstance(H, ComplementTripleSystem):
        return H.restricted_codegree_matrix(in_u)
    n = H.n
    out = np.zeros((n, n), dtype=np.int64)
    if H.mult:
        arr = np.array(list(H.mult.keys()), dtype=np.int64)
        w = np.array(list(H.mult.values()), dtype=np.int64)
        a, b, c = arr[:, 0], arr[:, 1], arr[:, 2]
        iu = np.asarray(in_u, dtype=np.int64)
        np.add.at(out, (a, b), w * iu[c])
        np.add.at(out, (a, c), w * iu[b])
        np.add.at(out, (b, c), w * iu[a])
        out = out + out.T
    return out


def color_vortex_ok(color_sets, N: int, eps) -> bool:
    """Nested, inside [N], and |C_i| <= ε^(i-100) N."""
    eps = as_fraction(eps)
    prev = None
    for i, C in enumerate(color_sets):
        C = set(C)
        if any(not 0 <= c < N for c in C):
            return False
        if prev is not None and not C <= prev:
            return False
        if len(C) > eps ** (i - 100) * N:
            return False
        prev = C
    return True


@dataclass
class VortexChain:
    vertex_sets: list
    color_sets: list
    alpha: Fraction
    eps: Fraction
    m: int
    report: dict = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return len(self.vertex_sets) - 1

    def as_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "eps": str(self.eps),
            "m": self.m,
            "levels": [len(U) for U in self.vertex_sets],
            "vertex_sets": [sorted(int(v) for v in U) for U in self.vertex_sets],
            "color_sets": [sorted(int(c) for c in C) for C in self.color_sets],
            "report": self.report,
        }

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "VortexChain":
        d = json.loads(text)
        return cls([tuple(U) for U in d["vertex_sets"]], [tuple(C) for C in d["color_sets"]],
                   Fraction(d["alpha"]), Fraction(d["eps"]), int(d["m"]), d.get("report", {}))


def _worst_pair(H, U_prev, U_next, n: int):
    """Smallest d_H(e; U_next) over pairs e inside U_prev, with a pair achieving it."""
    mask = np.zeros(n, dtype=bool)
    mask[list(U_next)] = True
    D = restricted_codegrees(H, mask)
    idx = np.array(sorted(U_prev), dtype=np.int64)
    sub = D[np.ix_(idx, idx)]
    iu = np.triu_indices(len(idx), 1)
    vals = sub[iu]
    if not len(vals):
        return None, None
    k = int(np.argmin(vals))
    return int(vals[k]), (int(idx[iu[0][k]]), int(idx[iu[1][k]]))


def _level_check(fam: Family, colors, U_prev, U_next, alpha: Fraction):
    """First (color, pair, value) violating the codegree condition, else the level's minimum."""
    need = alpha * len(U_next)
    groups = fam.distinct_members()
    cset = set(colors)
    worst = None
    for rep, cols in groups.items():
        hit = [c for c in cols if c in cset]
        if not hit:
            continue
        val, pair = _worst_pair(fam[rep], U_prev, U_next, fam.n)
        if val is None:
            continue
        if worst is None or val < worst[2]:
            worst = (hit[0], pair, val)
        if val < need:
            return False, (hit[0], pair, val)
    return True, worst


def sample_transversal_vortex(fam: Family, eps, m_prime: int, alpha, colors=None,
                              seed: int = 0, retries: int = 100) -> VortexChain:
    """Draw U_{i+1} uniformly inside U_i; resample a level until the codegree condition holds.

    ``colors`` is the color chain C_0 ⊇ … ⊇ C_{ℓ-1}; by default every level
    uses all colors.
    """
    eps, alpha = as_fraction(eps), as_fraction(alpha)
    n = fam.n
    ell, sizes = levels(n, m_prime, eps)
    if colors is None:
        colors = [tuple(range(fam.N))] * ell
    if len(colors) < ell:
        raise ValueError(f"need {ell} color sets, got {len(colors)}")
    rng = np.random.default_rng(seed)
    U = [tuple(range(n))]
    attempts = []
    minima = []
    for i in range(ell):
        last = None
        for attempt in range(1, retries + 1):
            nxt = tuple(sorted(int(v) for v in rng.choice(U[-1], size=sizes[i + 1], replace=False)))
            ok, info = _level_check(fam, colors[i], U[-1], nxt, alpha)
            if ok:
                U.append(nxt)
                attempts.append(attempt)
                minima.append(None if info is None else info[2])
                break
            last = info
        else:
            color, pair, val = last
            raise RetriesExhausted(
                f"level {i + 1}: pair {pair} has {val} < {alpha}*{sizes[i + 1]} neighbours for color {color}"
                f" after {retries} draws", level=i + 1, pair=pair, color=color, value=val,
                needed=float(alpha * sizes[i + 1]))
    chain = VortexChain(U, [tuple(c) for c in colors[:ell]], alpha, eps, sizes[-1])
    chain.report = {"attempts": attempts, "min_codegree_per_level": minima, "sizes": sizes}
    chain.report["verification"] = verify_vortex(chain, fam)
    return chain


def verify_vortex(chain: VortexChain, fam: Family) -> dict:
    """Re-check the four vortex conditions and the color-vortex bound from scratch."""
    n = fam.n
    U = [set(x) for x in chain.vertex_sets]
    eps, alpha = as_fraction(chain.eps), as_fraction(chain.alpha)
    failures = []
    if U[0] != set(range(n)):
        failures.append("U_0 is not the whole vertex set")
    for i in range(1, len(U)):
        if not U[i] <= U[i - 1]:
            failures.append(f"U_{i} is not inside U_{i - 1}")
        if len(U[i]) != math.floor(eps * len(U[i - 1])):
            failures.append(f"|U_{i}| = {len(U[i])}, expected ⌊ε|U_{i - 1}|⌋ = {math.floor(eps * len(U[i - 1]))}")
    if len(U[-1]) != chain.m:
        failures.append(f"|U_ℓ| = {len(U[-1])} but m = {chain.m}")
    if not color_vortex_ok(chain.color_sets, fam.N, eps):
        failures.append("color sets are not a color-vortex")
    minima = []
    for i in range(len(U) - 1):
        if i >= len(chain.color_sets):
            failures.append(f"no color set for level {i}")
            break
        ok, info = _level_check(fam, chain.color_sets[i], U[i], U[i + 1], alpha)
        minima.append(None if info is None else info[2])
        if not ok:
            color, pair, val = info
            failures.append(f"level {i}: d(e; U_{i + 1}) = {val} < α|U_{i + 1}| for pair {pair}, color {color}")
    return {"passed": not failures, "failures": failures, "min_codegree_per_level": minima}
