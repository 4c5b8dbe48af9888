"""
Level-by-level classification of generalised domain walls.

A wall is an automorphism of the excitation content: a map from every
eigenstate generator to a composite excitation that preserves braiding (S),
exchange (T) and the dimension rule, and is invertible.  Clifford walls
(level 2) send generators to eigenstate composites; a wall of level L >= 3
appends products of level L-1 wall labels to flux generators.

The search runs in the swapped-species frame (every factor has M >= E);
reported actions and gates are mapped back to the code's own frame.
"""

import hashlib
import itertools
import logging
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import galois
import numpy as np

from bounds import BoundReport, check_records, max_level as bound_max_level, min_excitation_dimension
from config import config
from errors import SearchCapExceeded, SpecValidationError, SynthesisError, ValidationIssue
from excitation_theory import (
    CodeSpec, CompositeExcitation, ExcitationModel, Factor, Species, WallLabel, format_turn,
    normalize_spec, to_actual, to_normalized,
)
from logging_config import PerformanceProfiler
from metrics import get_metrics
from phase_algebra import (
    HierarchyOperator, conjugate, equal_up_to_phase, inverse, multiply, phase_turn, render, strip_phase,
)
from synthesis import (
    GateRecord, LogicalGate, group_closure, synthesize_clifford, synthesize_diagonal,
)

logger = logging.getLogger('walls.wall_search')

FAMILY_PRIORITY = {'h': 0, 's': 1, 'c': 2, 'w': 3, 'p': 4, 'product': 5, 'wall': 6}


@lru_cache(maxsize=None)
def _field(p: int):
    return galois.GF(p)


def required_wall_dimension(d: int, j: int, l: int) -> int:
    """Wall dimension needed to append an l-dimensional excitation to a j-dimensional one."""
    return d - 1 - j + l


@dataclass(frozen=True)
class WallRejection:
    axiom: str
    detail: str
    residue: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {'axiom': self.axiom, 'detail': self.detail}
        if self.residue is not None:
            data['residue'] = self.residue
        return data


@dataclass(frozen=True)
class DomainWall:
    """Wall action in the swapped-species frame, one image per eigenstate generator."""

    name: str
    family: str
    images: Tuple[CompositeExcitation, ...]
    wall_dimension: int
    level: int
    support: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.images) // 2

    def is_identity(self) -> bool:
        return all(img == CompositeExcitation.generator(self.n, k) for k, img in enumerate(self.images))

    def eigen_matrix(self, p: int) -> np.ndarray:
        """Column k is the eigenstate part of the image of generator k."""
        if not self.images:
            return np.zeros((0, 0), dtype=np.int64)
        return np.array([img.eigen for img in self.images], dtype=np.int64).T % p

    def moved(self) -> List[int]:
        return [k for k, img in enumerate(self.images) if img != CompositeExcitation.generator(self.n, k)]


def apply_wall(images: Sequence[CompositeExcitation], x: CompositeExcitation, p: int) -> CompositeExcitation:
    """Linear extension to composites; wall labels in ``x`` are left in place."""
    result = CompositeExcitation(tuple([0] * len(x.eigen)), x.labels)
    for img, power in zip(images, x.eigen):
        if power:
            result = result.times(img.power(power, p), p)
    return result


def compose(outer: DomainWall, inner: DomainWall, p: int) -> Tuple[CompositeExcitation, ...]:
    """Images of outer after inner."""
    return tuple(apply_wall(outer.images, img, p) for img in inner.images)


def identity_images(n: int) -> Tuple[CompositeExcitation, ...]:
    return tuple(CompositeExcitation.generator(n, k) for k in range(2 * n))


def inverse_images(wall: DomainWall, p: int) -> Tuple[CompositeExcitation, ...]:
    """Inverse of a Clifford wall."""
    if wall.level > 2:
        raise ValueError('inverse_images is defined on Clifford walls')
    GF = _field(p)
    inv = np.asarray(np.linalg.inv(GF(wall.eigen_matrix(p))), dtype=np.int64)
    return tuple(CompositeExcitation(tuple(int(v) for v in inv[:, k])) for k in range(inv.shape[1]))


# -- admissibility ---------------------------------------------------------

def _residue(after: HierarchyOperator, before: HierarchyOperator) -> str:
    ratio = multiply(after, inverse(before))
    turn = phase_turn(ratio)
    if turn is not None:
        return format_turn(turn)
    return render(strip_phase(ratio))


def image_dimension(model: ExcitationModel, gen, image: CompositeExcitation) -> Tuple[Optional[int], Optional[str]]:
    """(wall dimension required by this image, rejection detail)."""
    base = model.generator(gen.index)
    if image == base:
        return None, None
    parts = model.components(image)
    j = gen.dimension
    for name, dim, _ in parts:
        if dim > j:
            return None, f'{gen.name} -> {image.to_text()}: {name} has dimension {dim} > {j}'
    own = [pt for pt in parts if pt[0] == gen.name and pt[2] == 1]
    others = [pt for pt in parts if pt[0] != gen.name]
    if own and others:
        return max(required_wall_dimension(model.d, j, dim) for _, dim, _ in others), None
    if not any(dim == j for _, dim, _ in parts):
        return None, f'{gen.name} -> {image.to_text()} changes excitation dimension'
    return model.d - 1, None


def wall_dimension(model: ExcitationModel, images: Sequence[CompositeExcitation]) -> Tuple[int, Optional[str]]:
    dims = [0]
    for gen, img in zip(model.generators, images):
        k, problem = image_dimension(model, gen, img)
        if problem:
            return 0, problem
        if k is not None:
            dims.append(k)
    k = max(dims)
    if k > model.d - 1:
        return k, f'needs a wall of dimension {k} > {model.d - 1}'
    return k, None


def _invertible(images: Sequence[CompositeExcitation], p: int) -> bool:
    if not images:
        return True
    mat = np.array([img.eigen for img in images], dtype=np.int64).T % p
    return int(np.linalg.det(_field(p)(mat))) != 0


def check_wall(model: ExcitationModel, wall) -> Optional[WallRejection]:
    """None when admissible, otherwise the first failing axiom.

    Checked in order: dimension rule, braiding of every generator pair,
    exchange of every generator; for odd p, exchange of generator pairs and
    commutators of their representatives; invertibility on the eigenstate
    sector.
    """
    images = wall.images if isinstance(wall, DomainWall) else tuple(wall)
    gens = model.generators
    p = model.p
    _, problem = wall_dimension(model, images)
    if problem:
        return WallRejection('dimension', problem)
    base = [model.generator(g.index) for g in gens]
    for a, b in itertools.combinations(range(len(gens)), 2):
        before = model.braiding(base[a], base[b])
        after = model.braiding(images[a], images[b])
        if after != before:
            return WallRejection('braiding', f'S[{gens[a].name},{gens[b].name}] is not preserved',
                                 _residue(after, before))
    for a, gen in enumerate(gens):
        before = model.exchange(base[a])
        after = model.exchange(images[a])
        if after != before:
            return WallRejection('exchange', f'T[{gen.name}] is not preserved', _residue(after, before))
    if p != 2:
        for a, b in itertools.combinations(range(len(gens)), 2):
            before = model.exchange(base[a].times(base[b], p))
            after = model.exchange(images[a].times(images[b], p))
            if after != before:
                return WallRejection('exchange', f'T[{gens[a].name}*{gens[b].name}] is not preserved',
                                     _residue(after, before))
        for a, b in itertools.combinations(range(len(gens)), 2):
            before = model.commutator(base[a], base[b])
            after = model.commutator(images[a], images[b])
            if after != before:
                return WallRejection('commutation', f'K[{gens[a].name},{gens[b].name}] is not preserved',
                                     _residue(after, before))
    if not _invertible(images, p):
        return WallRejection('invertibility', 'eigenstate action is singular')
    return None


def wall_level(model: ExcitationModel, images: Sequence[CompositeExcitation]) -> int:
    level = 1
    for img in images:
        for name, _ in img.labels:
            level = max(level, model.labels[name].level)
    return level + 1


# -- naming ------------------------------------------------------------------

def _support(model: ExcitationModel, images: Sequence[CompositeExcitation]) -> Tuple[int, ...]:
    n = model.n
    factors: Set[int] = set()
    for k, img in enumerate(images):
        if img == model.generator(k):
            continue
        factors.add(k % n + 1)
        factors.update(idx % n + 1 for idx, v in enumerate(img.eigen) if v)
        for name, _ in img.labels:
            factors.update(model.labels[name].factors)
    return tuple(sorted(factors))


def _vector(n: int, p: int, **powers) -> CompositeExcitation:
    eigen = [0] * (2 * n)
    for key, power in powers.items():
        species, factor = key[0], int(key[1:])
        eigen[(factor - 1) + (n if species == 'm' else 0)] = power % p
    return CompositeExcitation(tuple(eigen))


def template_name(model: ExcitationModel, images: Sequence[CompositeExcitation],
                  support: Tuple[int, ...]) -> Tuple[str, str]:
    """(family, name) for the standard wall shapes, else a stable hashed name."""
    n, p = model.n, model.p
    base = [model.generator(k) for k in range(2 * n)]

    def e(i):
        return i - 1

    def m(i):
        return n + i - 1

    def fixed_except(indices):
        return all(images[k] == base[k] for k in range(2 * n) if k not in indices)

    def v(**powers):
        return _vector(n, p, **powers)

    if any(img.labels for img in images):
        k = len(support)
        ok = k >= 2 and fixed_except([m(i) for i in support])
        for i in support if ok else ():
            rest = [j for j in support if j != i]
            label = f's{k - 1}{{{",".join(map(str, rest))}}}' if k > 2 else None
            if label is None or label not in model.labels:
                ok = False
                break
            want = base[m(i)].times(CompositeExcitation.label(n, label), p)
            if images[m(i)] != want:
                ok = False
        if ok:
            return 's', f's{k}{{{",".join(map(str, support))}}}'
    elif len(support) == 1:
        i = support[0]
        if (images[e(i)] == base[m(i)] and images[m(i)] in (v(**{f'e{i}': -1}), base[e(i)])
                and fixed_except([e(i), m(i)])):
            return 'h', f'h{i}'
        if images[e(i)] == base[e(i)] and images[m(i)] == v(**{f'e{i}': 1, f'm{i}': 1}) \
                and fixed_except([m(i)]):
            return 'p', f'p{i}'
    elif len(support) == 2:
        i, j = support
        if (images[e(i)] == base[e(j)] and images[e(j)] == base[e(i)]
                and images[m(i)] == base[m(j)] and images[m(j)] == base[m(i)]):
            return 'w', f'w{{{i},{j}}}'
        if (fixed_except([m(i), m(j)])
                and images[m(i)] == v(**{f'm{i}': 1, f'e{j}': 1})
                and images[m(j)] == v(**{f'm{j}': 1, f'e{i}': 1})):
            return 's', f's2{{{i},{j}}}'
        for a, b in ((i, j), (j, i)):
            if (fixed_except([m(a), e(b)])
                    and images[m(a)] == v(**{f'm{a}': 1, f'm{b}': 1})
                    and images[e(b)] == v(**{f'e{a}': -1, f'e{b}': 1})):
                return 'c', f'c{{{a},{b}}}'
    digest = hashlib.sha1(';'.join(img.to_text() for img in images).encode()).hexdigest()[:8]
    return 'wall', f'wall-{digest}'


def _make_wall(model: ExcitationModel, images: Tuple[CompositeExcitation, ...]) -> DomainWall:
    support = _support(model, images)
    family, name = template_name(model, images, support)
    dim, _ = wall_dimension(model, images)
    return DomainWall(name, family, images, dim, wall_level(model, images), support)


# -- candidate enumeration ---------------------------------------------------

class _CandidateBudget:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0
        self._lock = threading.Lock()

    def spend(self, count: int = 1):
        with self._lock:
            self.used += count
            if self.used > self.cap:
                raise SearchCapExceeded('candidate', self.cap, self.used)


def _clifford_candidates(model: ExcitationModel, subset: Tuple[int, ...],
                         budget: _CandidateBudget) -> List[Tuple[CompositeExcitation, ...]]:
    """Admissible eigenstate actions moving only generators of ``subset``."""
    n, p = model.n, model.p
    metrics = get_metrics()
    base = [model.generator(k) for k in range(2 * n)]
    gens = [g for g in model.generators if g.factor in subset]
    slots = [k for k in range(2 * n) if k % n + 1 in subset]
    dims = {g.index: g.dimension for g in model.generators}

    options: Dict[int, List[CompositeExcitation]] = {}
    for g in gens:
        opts = []
        for powers in itertools.product(range(p), repeat=len(slots)):
            if not any(powers):
                continue
            eigen = [0] * (2 * n)
            for k, v in zip(slots, powers):
                eigen[k] = v
            # components above the source dimension can never pass the dimension rule
            if any(v and dims[k] > g.dimension for k, v in zip(slots, powers)):
                continue
            x = CompositeExcitation(tuple(eigen))
            if model.exchange(x) == model.exchange(base[g.index]):
                opts.append(x)
        options[g.index] = opts

    found = []

    def extend(pos: int, chosen: Dict[int, CompositeExcitation]):
        if pos == len(gens):
            images = tuple(chosen.get(k, base[k]) for k in range(2 * n))
            if all(images[k] == base[k] for k in range(2 * n)):
                return
            budget.spend()
            metrics.record_candidates()
            rejection = check_wall(model, images)
            if rejection is None:
                found.append(images)
            else:
                metrics.record_rejection(rejection.axiom)
            return
        g = gens[pos]
        for x in options[g.index]:
            if all(model.braiding(chosen[h.index], x) == model.braiding(base[h.index], base[g.index])
                   for h in gens[:pos]):
                chosen[g.index] = x
                extend(pos + 1, chosen)
                del chosen[g.index]

    extend(0, {})
    return found


def _labelled_candidates(model: ExcitationModel, subset: Tuple[int, ...], labels: Sequence[WallLabel],
                         budget: _CandidateBudget) -> List[Tuple[CompositeExcitation, ...]]:
    """Reduced-form walls m_i -> m_i * lambda_i with lambda a product of ``labels``."""
    n, p = model.n, model.p
    metrics = get_metrics()
    base = [model.generator(k) for k in range(2 * n)]
    usable = [lab for lab in labels if set(lab.factors) <= set(subset)]
    if not usable:
        return []
    fluxes = [g for g in model.generators if g.species is Species.FLUX and g.factor in subset]

    options: Dict[int, List[CompositeExcitation]] = {}
    for g in fluxes:
        fitting = [lab for lab in usable if lab.dimension <= g.dimension]
        opts = [base[g.index]]
        for powers in itertools.product(range(p), repeat=len(fitting)):
            if not any(powers):
                continue
            appended = tuple(sorted((lab.name, v) for lab, v in zip(fitting, powers) if v))
            x = base[g.index].times(CompositeExcitation((0,) * (2 * n), appended), p)
            if model.exchange(x) == model.exchange(base[g.index]):
                opts.append(x)
        options[g.index] = opts

    found = []
    for choice in itertools.product(*(options[g.index] for g in fluxes)):
        images = list(base)
        for g, x in zip(fluxes, choice):
            images[g.index] = x
        images = tuple(images)
        if not any(img.labels for img in images):
            continue
        budget.spend()
        metrics.record_candidates()
        rejection = check_wall(model, images)
        if rejection is None:
            found.append(images)
        else:
            metrics.record_rejection(rejection.axiom)
    return found


def _run_subsets(fn, subsets: List[Tuple[int, ...]], parallelism: int) -> List[Tuple[CompositeExcitation, ...]]:
    if parallelism > 1 and len(subsets) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            batches = list(pool.map(fn, subsets))
    else:
        batches = [fn(s) for s in subsets]
    seen: Dict[Tuple[CompositeExcitation, ...], None] = {}
    for batch in batches:
        for images in batch:
            seen.setdefault(images, None)
    return list(seen)


# -- generator selection -----------------------------------------------------

def _sort_key(wall: DomainWall):
    return (wall.level, FAMILY_PRIORITY[wall.family], len(wall.support), wall.support, wall.name)


def _in_clifford_closure(candidate: DomainWall, pool: Sequence[DomainWall], p: int, cap: int) -> bool:
    if not pool:
        return False
    mats = [w.eigen_matrix(p) for w in pool]
    group = group_closure(mats, lambda a, b: (a @ b) % p, lambda a: a.tobytes(), cap)
    if group is None:
        logger.warning('closure cap reached during generator selection',
                       extra={'extra_fields': {'wall': candidate.name, 'cap': cap}})
        return False
    return candidate.eigen_matrix(p).tobytes() in group


def select_clifford_generators(walls: Sequence[DomainWall], p: int, cap: int) -> List[DomainWall]:
    """Greedy in family order h, s, c, w, p, hashed; keep a wall unless walls on its factors generate it."""
    selected: List[DomainWall] = []
    for wall in sorted(walls, key=_sort_key):
        pool = [w for w in selected if set(w.support) <= set(wall.support)]
        if not _in_clifford_closure(wall, pool, p, cap):
            selected.append(wall)
    return selected


def select_labelled_generators(walls: Sequence[DomainWall], p: int) -> List[DomainWall]:
    """Reduced-form walls compose by multiplying appendices, so selection is a rank test over Z_p."""
    if not walls:
        return []
    coords = sorted({(k, name) for w in walls for k, img in enumerate(w.images) for name, _ in img.labels})
    index = {c: i for i, c in enumerate(coords)}

    def vector(wall: DomainWall) -> List[int]:
        vec = [0] * len(coords)
        for k, img in enumerate(wall.images):
            for name, power in img.labels:
                vec[index[(k, name)]] = power % p
        return vec

    GF = _field(p)
    selected: List[DomainWall] = []
    for wall in sorted(walls, key=_sort_key):
        pool = [vector(w) for w in selected if set(w.support) <= set(wall.support)]
        before = np.linalg.matrix_rank(GF(np.array(pool, dtype=np.int64))) if pool else 0
        after = np.linalg.matrix_rank(GF(np.array(pool + [vector(wall)], dtype=np.int64)))
        if after > before:
            selected.append(wall)
    return selected


def generator_words(pool: Sequence[DomainWall], n: int, p: int,
                    cap: int) -> Dict[Tuple[CompositeExcitation, ...], Tuple[str, ...]]:
    """Shortest word in ``pool`` for every wall it generates, up to ``cap`` walls; the last name acts first."""
    start = identity_images(n)
    words: Dict[Tuple[CompositeExcitation, ...], Tuple[str, ...]] = {start: ()}
    queue = deque([start])
    while queue:
        images = queue.popleft()
        for g in pool:
            nxt = tuple(apply_wall(g.images, img, p) for img in images)
            if nxt in words:
                continue
            if len(words) >= cap:
                return words
            words[nxt] = (g.name,) + words[images]
            queue.append(nxt)
    return words


def name_products(walls: Sequence[DomainWall], generators: Sequence[DomainWall], p: int,
                  cap: int) -> List[DomainWall]:
    """Give walls without a standard shape the name of their generator word."""
    chosen = {w.name for w in generators}
    closures: Dict[Tuple[str, ...], Dict] = {}
    named = []
    for wall in walls:
        if wall.family == 'wall' and wall.name not in chosen:
            pool = [g for g in generators if set(g.support) <= set(wall.support)]
            key = tuple(g.name for g in pool)
            if key not in closures:
                closures[key] = generator_words(pool, wall.n, p, cap)
            word = closures[key].get(wall.images)
            if word is None:
                logger.debug('no generator word within cap', extra={'extra_fields': {'wall': wall.name}})
            else:
                wall = replace(wall, name='*'.join(word), family='product')
        named.append(wall)
    return named


# -- gates -------------------------------------------------------------------

def clifford_matrix(wall: DomainWall, p: int) -> np.ndarray:
    """Symplectic matrix of the gate: X_i follows m_i, Z_i follows e_i."""
    n = wall.n
    mat = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for i in range(n):
        for row, img in ((i, wall.images[n + i]), (n + i, wall.images[i])):
            mat[row] = list(img.eigen[n:]) + list(img.eigen[:n])
    return mat % p


def normalized_gate(model: ExcitationModel, wall: DomainWall) -> LogicalGate:
    """Gate realising ``wall`` in the swapped-species frame."""
    if model.spec.representative_table:
        raise SynthesisError('gates of tabled codes come from their boundary tables')
    n = model.n
    if wall.level <= 2:
        return synthesize_clifford(clifford_matrix(wall, model.p), model.ring)
    appended = {}
    for g in model.generators:
        img = wall.images[g.index]
        if not img.labels:
            continue
        if g.species is not Species.FLUX:
            raise SynthesisError(f'{wall.name} appends to charge {g.name}; only flux appendices are diagonal')
        lam = CompositeExcitation((0,) * (2 * n), img.labels)
        appended[g.factor - 1] = model.representative(lam)
    return synthesize_diagonal(appended, n, model.ring)


def gate_matches_wall(model: ExcitationModel, wall: DomainWall, gate: LogicalGate) -> bool:
    """Conjugating each generator's representative by the gate gives the image's representative."""
    if not gate.is_operator() and wall.level > 2:
        return False
    op = gate.as_operator() if gate.is_operator() else None
    for g in model.generators:
        before = model.representative(model.generator(g.index))
        after = model.representative(wall.images[g.index])
        image = conjugate(op, before) if op is not None else gate.conjugate_pauli(before)
        if not equal_up_to_phase(image, after):
            return False
    return True


# -- results -----------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorPrediction:
    name: str
    family: str
    factors: Tuple[int, ...]
    dimension: int
    level: int
    decorated: Tuple[int, ...] = ()
    independent: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name, 'family': self.family, 'factors': list(self.factors),
            'dimension': self.dimension, 'level': self.level,
            'decorated': list(self.decorated), 'independent': self.independent,
        }


@dataclass
class ClassificationResult:
    spec: CodeSpec
    model: ExcitationModel
    decorated: Tuple[int, ...]
    max_level: int
    walls_by_level: Dict[int, List[DomainWall]] = field(default_factory=dict)
    generators: List[DomainWall] = field(default_factory=list)
    gates: List[GateRecord] = field(default_factory=list)
    order: Optional[int] = None
    truncated: bool = False
    bounds: Optional[BoundReport] = None
    elapsed: Optional[float] = None

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def template_walls(self) -> List[DomainWall]:
        return [w for level in sorted(self.walls_by_level) for w in self.walls_by_level[level]
                if w.family not in ('product', 'wall')]

    @property
    def clifford_generators(self) -> List[DomainWall]:
        return [w for w in self.generators if w.level <= 2]

    def wall(self, name: str) -> DomainWall:
        for level in sorted(self.walls_by_level):
            for w in self.walls_by_level[level]:
                if w.name == name:
                    return w
        raise KeyError(name)

    def level_counts(self) -> Dict[int, int]:
        return {level: len(walls) for level, walls in sorted(self.walls_by_level.items())}

    def actual_images(self, wall: DomainWall) -> Tuple[CompositeExcitation, ...]:
        """Wall images in the code's own frame."""
        if not self.decorated:
            return wall.images
        p, n = self.p, self.n
        images = []
        for k in range(2 * n):
            x = to_normalized(CompositeExcitation.generator(n, k), self.decorated, p)
            images.append(to_actual(apply_wall(wall.images, x, p), self.decorated, p))
        return tuple(images)

    def wall_to_dict(self, wall: DomainWall) -> Dict[str, Any]:
        images = self.actual_images(wall)
        action = {}
        for g, img in zip(self.model.generators, images):
            if img != CompositeExcitation.generator(self.n, g.index):
                action[g.name] = img.to_text()
        return {
            'name': wall.name,
            'family': wall.family,
            'level': wall.level,
            'dimension': wall.wall_dimension,
            'support': list(wall.support),
            'action': action,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'code': self.spec.name,
            'd': self.spec.d,
            'p': self.spec.p,
            'factors': [{'M': f.M, 'E': f.E} for f in self.spec.factors],
            'max_level': self.max_level,
            'wall_count': self.order,
            'truncated': self.truncated,
            'levels': {str(k): v for k, v in self.level_counts().items()},
            'walls': [self.wall_to_dict(w) for w in self.generators],
            'template_walls': [w.name for w in self.template_walls],
            'gates': [g.to_dict() for g in self.gates],
            'bounds': self.bounds.to_dict() if self.bounds else None,
        }


def wall_to_gate(result: ClassificationResult, wall: DomainWall,
                 gate: Optional[LogicalGate] = None) -> GateRecord:
    """Stacked-boundary gate for ``wall`` in the code's own frame; support dimension k + 1."""
    gate = gate or normalized_gate(result.model, wall)
    if not gate_matches_wall(result.model, wall, gate):
        raise SynthesisError(f'gate for {wall.name} does not reproduce the wall action')
    gate = gate.conjugated_by_fourier([i - 1 for i in result.decorated])
    return GateRecord(wall.name, gate, wall.wall_dimension + 1)


def _register_labels(model: ExcitationModel, walls: Sequence[DomainWall], gates: Dict[str, LogicalGate]):
    added = []
    for wall in walls:
        if wall.wall_dimension > model.d - 2:
            continue
        rep = model.table_representative(wall.name)
        if rep is None:
            gate = gates.get(wall.name)
            if gate is None or not gate.is_operator():
                continue
            rep = gate.as_operator()
        if not rep.is_diagonal():
            logger.debug('wall skipped as excitation: non-diagonal representative',
                         extra={'extra_fields': {'wall': wall.name}})
            continue
        label = WallLabel(wall.name, wall.wall_dimension, wall.level, rep, wall.support)
        model.register_label(label)
        added.append(label)
    return added


def classify(spec: CodeSpec, max_level: Optional[int] = None, *, parallelism: Optional[int] = None,
             group_cap: Optional[int] = None, candidate_cap: Optional[int] = None,
             enumerate_walls: bool = True, check_bounds: bool = True) -> ClassificationResult:
    """Find every admissible wall level by level until a level adds nothing."""
    parallelism = parallelism or config.get('search.parallelism', 1)
    group_cap = group_cap or config.get('search.group_element_cap', 1000000)
    budget = _CandidateBudget(candidate_cap or config.get('search.candidate_cap', 5000000))
    closure_cap = config.get('search.closure_cap', 4096)
    bound = bound_max_level(spec.d, min_excitation_dimension(spec))
    top = bound if max_level is None else min(max_level, bound)

    normalized, decorated = normalize_spec(spec)
    model = ExcitationModel(normalized)
    result = ClassificationResult(spec, model, decorated, top)
    metrics = get_metrics()
    tabled = bool(spec.representative_table)
    started = time.perf_counter()

    with PerformanceProfiler(logger, 'classify', code=spec.name, d=spec.d, n=spec.n):
        n = spec.n
        labels: List[WallLabel] = []
        gates: Dict[str, LogicalGate] = {}
        for level in range(2, top + 1):
            if level == 2:
                subsets = [s for size in (1, 2) for s in itertools.combinations(range(1, n + 1), size)]
                found = _run_subsets(lambda s: _clifford_candidates(model, s, budget), subsets, parallelism)
            else:
                if not labels:
                    break
                subsets = [s for size in range(1, min(level, n) + 1)
                           for s in itertools.combinations(range(1, n + 1), size)
                           if any(set(lab.factors) <= set(s) for lab in labels)]
                found = _run_subsets(lambda s: _labelled_candidates(model, s, labels, budget),
                                     subsets, parallelism)
            walls = sorted((_make_wall(model, images) for images in found), key=_sort_key)
            if not walls:
                logger.info('level adds no walls; search complete',
                            extra={'extra_fields': {'code': spec.name, 'level': level}})
                break
            metrics.record_admitted(level, len(walls))
            if level == 2:
                chosen = select_clifford_generators(walls, model.p, closure_cap)
            else:
                chosen = select_labelled_generators(walls, model.p)
            result.walls_by_level[level] = name_products(walls, chosen, model.p, closure_cap)
            result.generators.extend(chosen)
            if not tabled:
                for wall in chosen:
                    gates[wall.name] = normalized_gate(model, wall)
            labels = _register_labels(model, chosen, gates)
            logger.info('level classified', extra={'extra_fields': {
                'code': spec.name, 'level': level, 'walls': len(walls),
                'generators': [w.name for w in chosen], 'labels': [lab.name for lab in labels]}})

        result.generators.sort(key=_sort_key)
        if not tabled:
            result.gates = [wall_to_gate(result, w, gates.get(w.name)) for w in result.generators]
        if enumerate_walls:
            enumerate_group(result, group_cap)
        if check_bounds and result.gates:
            result.bounds = check_records(result.gates, spec)

    result.elapsed = time.perf_counter() - started
    metrics.record_classification(spec.name, result.elapsed, result.order, len(result.gates))
    return result


def enumerate_group(result: ClassificationResult, cap: Optional[int] = None,
                    keep_elements: bool = False) -> Optional[Set[bytes]]:
    """Order of the Clifford wall group generated by the level-2 generators.

    On overflow the result keeps its generators, with ``order = None`` and
    ``truncated = True``.
    """
    cap = cap or config.get('search.group_element_cap', 1000000)
    p, n = result.p, result.n
    identity = np.eye(2 * n, dtype=np.int64)
    mats = [w.eigen_matrix(p) for w in result.clifford_generators]
    group = group_closure(mats, lambda a, b: (a @ b) % p, lambda a: a.tobytes(), cap) if mats else {}
    if group is None:
        logger.warning('wall group exceeds element cap; reporting generators only',
                       extra={'extra_fields': {'code': result.spec.name, 'cap': cap}})
        result.order, result.truncated = None, True
        return None
    elements = set(group)
    elements.add(identity.tobytes())
    result.order, result.truncated = len(elements), False
    return elements if keep_elements else None


# -- oracles and closed forms -------------------------------------------------

@dataclass
class OracleResult:
    order: int
    candidates: int
    elements: Set[bytes]


def brute_force_walls(spec: CodeSpec, cap: Optional[int] = None) -> OracleResult:
    """Every invertible linear map of the eigenstate sector that preserves all of S and T
    (and, for odd p, the generator commutators)."""
    dims = {f.M for f in spec.factors} | {f.E for f in spec.factors}
    if len(dims) > 1:
        raise SpecValidationError([ValidationIssue(
            'factors', 'brute force needs every eigenstate excitation to share one dimension')])
    cap = cap or config.get('search.brute_force_cap', 70000)
    p, n = spec.p, spec.n
    size = p ** ((2 * n) ** 2)
    if size > cap:
        raise SearchCapExceeded('brute_force', cap, size)
    model = ExcitationModel(spec)
    vectors = list(model.eigen_vectors())
    exchange = {x: model.exchange(x) for x in vectors}
    base = [model.generator(k) for k in range(2 * n)]
    braid = {(a, b): model.braiding(base[a], base[b]) for a in range(2 * n) for b in range(2 * n)}
    commutators = {(a, b): model.commutator(base[a], base[b]) for a in range(2 * n) for b in range(2 * n)}

    elements: Set[bytes] = set()
    candidates = 0
    for columns in itertools.product(vectors, repeat=2 * n):
        candidates += 1
        if any(exchange[c] != exchange[base[k]] for k, c in enumerate(columns)):
            continue
        if any(model.braiding(columns[a], columns[b]) != braid[(a, b)]
               for a, b in itertools.combinations(range(2 * n), 2)):
            continue
        if p != 2 and any(model.commutator(columns[a], columns[b]) != commutators[(a, b)]
                          for a, b in itertools.combinations(range(2 * n), 2)):
            continue
        if not _invertible(columns, p):
            continue
        if any(exchange[apply_wall(columns, x, p)] != exchange[x] for x in vectors):
            continue
        mat = np.array([c.eigen for c in columns], dtype=np.int64).T % p
        elements.add(mat.tobytes())
    logger.info('brute force complete', extra={'extra_fields': {
        'code': spec.name, 'candidates': candidates, 'walls': len(elements)}})
    return OracleResult(len(elements), candidates, elements)


def closed_form_generators(spec: CodeSpec) -> List[GeneratorPrediction]:
    """Closed-form generators for a stack of arbitrary factors (q_i = max(M_i, E_i))."""
    d = spec.d
    q = [f.q for f in spec.factors]
    decorated = [1 if f.decorated else 0 for f in spec.factors]
    a = min_excitation_dimension(spec)
    top = bound_max_level(d, a)
    n = spec.n
    predictions = []
    for i, f in enumerate(spec.factors, start=1):
        if f.M == f.E:
            predictions.append(GeneratorPrediction(f'h{i}', 'h', (i,), d - 1, 2, (decorated[i - 1],)))
    for i, j in itertools.permutations(range(1, n + 1), 2):
        if q[i - 1] >= q[j - 1]:
            predictions.append(GeneratorPrediction(
                f'c{{{i},{j}}}', 'c', (i, j), d - (q[i - 1] - q[j - 1]) - 1, 2,
                (decorated[i - 1], decorated[j - 1]), independent=2 * q[j - 1] != d - 2))
    for k in range(2, min(n, top) + 1):
        for subset in itertools.combinations(range(1, n + 1), k):
            total = sum(q[i - 1] for i in subset)
            if total >= (k - 1) * d - k:
                predictions.append(GeneratorPrediction(
                    f's{k}{{{",".join(map(str, subset))}}}', 's', subset,
                    sum(d - q[i - 1] - 1 for i in subset) - 1, k,
                    tuple(decorated[i - 1] for i in subset)))
    return predictions


def uniform_stack_generators(d: int, n: int, M: int) -> List[GeneratorPrediction]:
    """Identical factors: s^(k) exists for k <= min(n, d / (d - q - 1))."""
    if d < 2 or n < 1 or not 0 <= M <= d - 2:
        raise ValueError(f'invalid parameters d={d}, n={n}, M={M}')
    spec = CodeSpec(f'stack-d{d}-M{M}-n{n}', d, 2, tuple(Factor(M, d - 2 - M) for _ in range(n)))
    q = max(M, d - 2 - M)
    kmax = min(n, d // (d - q - 1))
    return [pred for pred in closed_form_generators(spec) if pred.family != 's' or pred.level <= kmax]


def independent_names(predictions: Iterable[GeneratorPrediction]) -> List[str]:
    return sorted(p.name for p in predictions if p.independent)
