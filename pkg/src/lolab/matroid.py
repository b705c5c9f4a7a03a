"""Basis packing numbers of linear matroids and the subspace-dropping reduction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from lolab.anticoncentration import VectorSequence
from lolab.config import PreconditionError
from lolab.exactmath import as_vector, is_zero_vector, kernel_basis, rank, solve_linear

__all__ = [
    "BasisPacking",
    "SubspaceDrop",
    "basis_packing_number",
    "greedy_packing",
    "verify_packing",
    "coordinates_in",
    "drop_to_subspace",
]


@dataclass(frozen=True)
class BasisPacking:
    b: int
    index_sets: tuple

    def __int__(self):
        return self.b


@dataclass(frozen=True)
class SubspaceDrop:
    basis: tuple  # spanning vectors of V' in ambient coordinates
    indices: tuple  # surviving index set I_0
    packing: float  # packing number of A[I_0] inside V' (inf when V' = {0})
    steps: int

    @property
    def dim(self) -> int:
        return len(self.basis)


def _fundamental_circuit(vectors: Sequence, members: Sequence[int], y: int, k: int):
    """None if vectors[members] + vectors[y] is independent, else the positions in
    ``members`` of the circuit created by adding y."""
    if not members:
        return None if not is_zero_vector(vectors[y]) else []
    cols = [[vectors[i][r] for i in members] for r in range(k)]
    sol = solve_linear(cols, vectors[y], ncols=len(members))
    if sol is None:
        return None
    return [pos for pos, c in enumerate(sol) if c]


def _augment(x: int, sets: list, owner: dict, vectors: Sequence, k: int) -> bool:
    """Shortest augmenting path for matroid partition; mutates ``sets``/``owner``."""
    parent = {x: None}
    queue = deque([x])
    while queue:
        y = queue.popleft()
        for j, members in enumerate(sets):
            if owner.get(y) == j:
                continue
            circuit = _fundamental_circuit(vectors, members, y, k)
            if circuit is None:
                moves = []
                node, target = y, j
                while True:
                    moves.append((node, target))
                    link = parent[node]
                    if link is None:
                        break
                    node, target = link
                for elem, _ in moves:
                    old = owner.get(elem)
                    if old is not None:
                        sets[old].remove(elem)
                for elem, tgt in moves:
                    sets[tgt].append(elem)
                    owner[elem] = tgt
                return True
            for pos in circuit:
                z = members[pos]
                if z not in parent:
                    parent[z] = (y, j)
                    queue.append(z)
    return False


def _greedy_bases(vectors: Sequence, k: int, available: Sequence[int]) -> list:
    """Repeatedly take the lowest-index basis among unused elements."""
    remaining = list(available)
    bases = []
    while len(remaining) >= k:
        chosen: list = []
        for i in remaining:
            if _fundamental_circuit(vectors, chosen, i, k) is None:
                chosen.append(i)
                if len(chosen) == k:
                    break
        if len(chosen) < k:
            break
        bases.append(chosen)
        used = set(chosen)
        remaining = [i for i in remaining if i not in used]
    return bases


def greedy_packing(A: VectorSequence) -> BasisPacking:
    """Fast lower bound: greedy extraction of disjoint bases."""
    if A.k == 0:
        raise PreconditionError("basis packing is undefined in the zero space")
    bases = _greedy_bases(A.vectors, A.k, range(A.n))
    return BasisPacking(len(bases), tuple(tuple(sorted(b)) for b in bases))


def _canonical(sets) -> tuple:
    return tuple(sorted(tuple(sorted(s)) for s in sets))


def basis_packing_number(A: VectorSequence) -> BasisPacking:
    """Maximum number of pairwise disjoint bases of F^k inside A, with witnesses.

    Starts from the greedy packing and grows it by matroid-partition
    augmentation until b + 1 disjoint bases are impossible.
    """
    k = A.k
    if k == 0:
        raise PreconditionError("basis packing is undefined in the zero space")
    vectors = A.vectors
    nonzero = [i for i, v in enumerate(vectors) if not is_zero_vector(v)]
    if rank([vectors[i] for i in nonzero], ncols=k) < k:
        return BasisPacking(0, ())
    best = [list(b) for b in _greedy_bases(vectors, k, nonzero)]
    upper = len(nonzero) // k
    while len(best) < upper:
        sets = [list(b) for b in best] + [[]]
        owner = {i: j for j, b in enumerate(sets) for i in b}
        target = len(sets) * k
        covered = len(owner)
        for x in nonzero:
            if covered == target:
                break
            if x in owner:
                continue
            if _augment(x, sets, owner, vectors, k):
                covered += 1
        if covered < target:
            break
        best = sets
    return BasisPacking(len(best), _canonical(best))


def verify_packing(A: VectorSequence, packing: BasisPacking) -> bool:
    seen: set = set()
    for I in packing.index_sets:
        if len(I) != A.k or seen.intersection(I):
            return False
        seen.update(I)
        if rank([A.vectors[i] for i in I], ncols=A.k) != A.k:
            return False
    return len(packing.index_sets) == packing.b


def coordinates_in(basis: Sequence[Sequence], v: Sequence):
    """Coordinates of v in the given independent spanning list, or None if v is outside."""
    k = len(v)
    cols = [[b[r] for b in basis] for r in range(k)]
    return solve_linear(cols, as_vector(v), ncols=len(basis)) if basis else (
        () if is_zero_vector(as_vector(v)) else None
    )


def _independent_spanning(vectors: Sequence, k: int) -> list:
    chosen: list = []
    for v in vectors:
        if rank(chosen + [v], ncols=k) > len(chosen):
            chosen.append(v)
    return chosen


def drop_to_subspace(A: VectorSequence, b: int) -> SubspaceDrop:
    """Subsequence A[I_0] inside a subspace V' with packing number >= b there.

    Guarantees |I_0| >= n - (b - 1) k (k + 1) / 2.  Each step removes a
    maximum packing and restricts to the span of what is left.
    """
    n, k = A.n, A.k
    if b < 1:
        raise PreconditionError("b must be positive")
    if any(is_zero_vector(v) for v in A.vectors):
        raise PreconditionError("all vectors must be nonzero")
    if 2 * n - (b - 1) * k * (k + 1) < 0:
        raise PreconditionError("need n - (b-1) k (k+1) / 2 >= 0")
    basis = [tuple(1 if i == j else 0 for j in range(k)) for i in range(k)]
    basis = [as_vector(v) for v in basis]
    indices = list(range(n))
    steps = 0
    while True:
        if not basis:
            return SubspaceDrop((), tuple(indices), float("inf"), steps)
        coords = VectorSequence(len(basis), [coordinates_in(basis, A.vectors[i]) for i in indices])
        packing = basis_packing_number(coords)
        if packing.b >= b:
            return SubspaceDrop(tuple(basis), tuple(indices), packing.b, steps)
        used = {indices[p] for I in packing.index_sets for p in I}
        indices = [i for i in indices if i not in used]
        basis = _independent_spanning([A.vectors[i] for i in indices], k)
        steps += 1
