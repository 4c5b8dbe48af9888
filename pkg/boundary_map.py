"""
Logical gate groups for boundaries other than the plain stack.

attach  codes glued along transparent boundaries; excitations interchangeable
        there are identified, and walls are pushed through the quotient.
torus   periodic boundaries; every factor carries C(d, E+1) qubits, one per
        choice of circles, and walls act on all of them at once.
tabled  explicit orientation tables (Levin-Wen style), checked against the
        admissible walls of the bulk.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from errors import InadmissibleTableEntry, SpecValidationError, SynthesisError, ValidationIssue
from excitation_theory import _ring_for
from phase_algebra import HierarchyOperator, multiply, parse_operator
from synthesis import GateRecord, LogicalGate, gate_name, independent_gates, synthesize_clifford, synthesize_diagonal

logger = logging.getLogger('walls.boundary_map')


class BoundaryVariant(str, Enum):
    STACK = 'stack'
    ATTACH = 'attach'
    TORUS = 'torus'
    TABLED = 'tabled'


@dataclass(frozen=True)
class GateTableEntry:
    wall: str
    orientation: str
    gate: str


@dataclass(frozen=True)
class BoundarySpec:
    variant: BoundaryVariant = BoundaryVariant.STACK
    partition: Tuple[Tuple[str, ...], ...] = ()
    qubits_per_code: int = 1
    gate_table: Tuple[GateTableEntry, ...] = ()

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> 'BoundarySpec':
        if not data:
            return cls()
        return cls(
            variant=BoundaryVariant(data.get('variant', 'stack')),
            partition=tuple(tuple(c) for c in data.get('partition', ())),
            qubits_per_code=int(data.get('qubits_per_code', 1)),
            gate_table=tuple(GateTableEntry(e['wall'], e.get('orientation', ''), e['gate'])
                             for e in data.get('gate_table', ())),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'variant': self.variant.value}
        if self.partition:
            data['partition'] = [list(c) for c in self.partition]
        if self.variant is BoundaryVariant.TABLED:
            data['qubits_per_code'] = self.qubits_per_code
            data['gate_table'] = [{'wall': e.wall, 'orientation': e.orientation, 'gate': e.gate}
                                  for e in self.gate_table]
        return data

    def validate(self, spec, path: str = 'boundary') -> List[ValidationIssue]:
        issues: List[ValidationIssue] = []
        if self.variant is BoundaryVariant.ATTACH:
            issues += _validate_partition(spec, self.partition, f'{path}.partition')
        if self.variant is BoundaryVariant.TABLED:
            if self.qubits_per_code < 1:
                issues.append(ValidationIssue(f'{path}.qubits_per_code', 'must be at least 1'))
            if not spec.representative_table:
                issues.append(ValidationIssue('representative_table', 'tabled boundaries need explicit representatives'))
            slots = spec.n * self.qubits_per_code
            for i, entry in enumerate(self.gate_table):
                try:
                    op = parse_operator(entry.gate, _ring_for(spec), slots)
                except Exception as exc:
                    issues.append(ValidationIssue(f'{path}.gate_table[{i}].gate', str(exc)))
                    continue
                if op.n > slots:
                    issues.append(ValidationIssue(f'{path}.gate_table[{i}].gate', f'acts beyond the {slots} logical qubits'))
        return issues


def _validate_partition(spec, partition, path) -> List[ValidationIssue]:
    issues = []
    if spec.p != 2:
        issues.append(ValidationIssue(path, 'attached boundaries are supported for qubit codes only'))
    if spec.decorated_factors:
        issues.append(ValidationIssue(path, 'attached factors must have M >= E'))
    dims = {}
    for i, f in enumerate(spec.factors, start=1):
        dims[f'e{i}'] = ('e', f.E)
        dims[f'm{i}'] = ('m', f.M)
    seen = set()
    for c, cls in enumerate(partition):
        kinds = set()
        for name in cls:
            if name not in dims:
                issues.append(ValidationIssue(f'{path}[{c}]', f'unknown generator {name!r}'))
                continue
            if name in seen:
                issues.append(ValidationIssue(f'{path}[{c}]', f'{name} appears in two classes'))
            seen.add(name)
            kinds.add(dims[name])
        if len(kinds) > 1:
            issues.append(ValidationIssue(f'{path}[{c}]', 'a class must hold one species of one dimension'))
    if not issues:
        try:
            reduced_qubits(spec, partition)
        except ValueError as exc:
            issues.append(ValidationIssue(path, str(exc)))
    return issues


@dataclass
class GateGroup:
    """Logical gates of a code under its boundary, with an independent generating subset."""

    code: str
    variant: BoundaryVariant
    qubits: List[str]
    gates: List[GateRecord] = field(default_factory=list)
    generators: List[GateRecord] = field(default_factory=list)
    multiplicities: List[Dict[str, Any]] = field(default_factory=list)

    def generator_names(self) -> List[str]:
        return sorted(g.name for g in self.generators)

    def gate_names(self) -> List[str]:
        return sorted({g.name for g in self.gates})

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'variant': self.variant.value,
            'qubits': list(self.qubits),
            'gates': [g.to_dict() for g in self.gates],
            'generators': [g.wall for g in self.generators],
        }
        if self.multiplicities:
            data['multiplicities'] = self.multiplicities
        return data


# -- attached codes ----------------------------------------------------------

def reduced_qubits(spec, partition) -> Tuple[Dict[str, str], List[Tuple[FrozenSet[str], FrozenSet[str]]]]:
    """Map every generator to its class name (E<r> / M<r>) and pair classes into qubits."""
    listed = {name for cls in partition for name in cls}
    classes = [frozenset(cls) for cls in partition]
    for i in range(1, spec.n + 1):
        for name in (f'e{i}', f'm{i}'):
            if name not in listed:
                classes.append(frozenset([name]))

    def factors(cls):
        return frozenset(int(name[1:]) for name in cls)

    e_classes = sorted((c for c in classes if next(iter(c))[0] == 'e'), key=lambda c: min(factors(c)))
    m_classes = {factors(c): c for c in classes if next(iter(c))[0] == 'm'}
    class_of: Dict[str, str] = {}
    pairs = []
    for r, e_cls in enumerate(e_classes, start=1):
        m_cls = m_classes.get(factors(e_cls))
        if m_cls is None:
            raise ValueError(f'charge class {sorted(e_cls)} has no flux class on the same codes')
        pairs.append((e_cls, m_cls))
        for name in e_cls:
            class_of[name] = f'E{r}'
        for name in m_cls:
            class_of[name] = f'M{r}'
    return class_of, pairs


def _reduced_action(result, wall, class_of, label_class) -> Tuple[Optional[Dict[str, FrozenSet[str]]], Optional[Dict]]:
    model = result.model
    per_class: Dict[str, set] = {}
    for g in model.generators:
        img = wall.images[g.index]
        if img == model.generator(g.index):
            continue
        comps = set()
        for idx, power in enumerate(img.eigen):
            if power:
                comps.add(class_of[model.generators[idx].name])
        for name, power in img.labels:
            if label_class.get(name):
                comps.add(label_class[name])
        per_class.setdefault(class_of[g.name], set()).add(frozenset(comps))
    action = {}
    for cls, images in sorted(per_class.items()):
        if len(images) > 1:
            return None, {'wall': wall.name, 'class': cls,
                          'images': sorted('*'.join(sorted(i)) or '1' for i in images)}
        image = next(iter(images))
        if not image:
            return None, {'wall': wall.name, 'class': cls, 'images': ['1']}
        if image != frozenset([cls]):
            action[cls] = image
    return action, None


def _reduced_gate(action, qubit_count: int, ring, label_reps) -> LogicalGate:
    labelled = any(c.startswith('L:') for image in action.values() for c in image)
    if not labelled:
        p = ring.p
        mat = np.zeros((2 * qubit_count, 2 * qubit_count), dtype=np.int64)
        for r in range(1, qubit_count + 1):
            for row, cls in ((r - 1, f'M{r}'), (qubit_count + r - 1, f'E{r}')):
                for c in action.get(cls, frozenset([cls])):
                    s = int(c[1:]) - 1
                    mat[row, s if c[0] == 'M' else qubit_count + s] = 1
        return synthesize_clifford(mat % p, ring)
    appended = {}
    for cls, image in action.items():
        if cls[0] != 'M' or f'M{cls[1:]}' not in image or any(c[0] == 'E' or (c[0] == 'M' and c != cls) for c in image):
            raise SynthesisError(f'reduced action on {cls} is not a diagonal appendix')
        op = HierarchyOperator.identity(ring, qubit_count)
        for c in sorted(image):
            if c.startswith('L:'):
                op = multiply(op, label_reps[c])
        appended[int(cls[1:]) - 1] = op
    return synthesize_diagonal(appended, qubit_count, ring)


def quotient_classify(result) -> GateGroup:
    """Push every named and generating wall through the charge/flux identifications."""
    spec = result.spec
    boundary = spec.boundary or BoundarySpec()
    issues = _validate_partition(spec, boundary.partition, 'boundary.partition')
    if issues:
        raise SpecValidationError(issues)
    class_of, pairs = reduced_qubits(spec, boundary.partition)
    qubit_count = len(pairs)
    ring = result.model.ring
    group = GateGroup(spec.name, BoundaryVariant.ATTACH, [f'q{r}' for r in range(1, qubit_count + 1)])

    label_class: Dict[str, str] = {}
    label_reps: Dict[str, HierarchyOperator] = {}
    classes: Dict[Tuple, Dict[str, Any]] = {}
    for level in sorted(result.walls_by_level):
        seen = set()
        walls = []
        for w in result.template_walls + result.generators:
            if w.level == level and w.name not in seen:
                seen.add(w.name)
                walls.append(w)
        level_classes: Dict[Tuple, Dict[str, Any]] = {}
        for wall in walls:
            action, clash = _reduced_action(result, wall, class_of, label_class)
            if clash:
                logger.info('wall has no consistent reduced action', extra={'extra_fields': clash})
                group.multiplicities.append(clash)
                continue
            if not action:
                continue
            key = tuple(sorted((cls, tuple(sorted(img))) for cls, img in action.items()))
            entry = level_classes.setdefault(key, {'action': action, 'walls': []})
            entry['walls'].append(wall)
        for key, entry in sorted(level_classes.items(), key=lambda kv: kv[1]['walls'][0].name):
            rep_wall = min(entry['walls'], key=lambda w: (w.wall_dimension, w.name))
            gate = _reduced_gate(entry['action'], qubit_count, ring, label_reps)
            record = GateRecord(rep_wall.name, gate, min(w.wall_dimension for w in entry['walls']) + 1,
                                metadata={'equivalent_walls': sorted(w.name for w in entry['walls'])})
            group.gates.append(record)
            classes[key] = entry
            if gate.is_operator() and gate.as_operator().is_diagonal():
                label_key = f'L:{rep_wall.name}'
                label_reps[label_key] = gate.as_operator()
                for w in entry['walls']:
                    if w.name in result.model.labels:
                        label_class[w.name] = label_key

    chosen = independent_gates([g.gate for g in group.gates])
    group.generators = [group.gates[i] for i in chosen]
    return group


# -- torus -------------------------------------------------------------------

@dataclass(frozen=True)
class LogicalQubit:
    factor: int
    circles: Tuple[int, ...]

    @property
    def label(self) -> str:
        return f'({self.factor},{{{",".join(map(str, self.circles))}}})'


def torus_qubits(spec) -> List[LogicalQubit]:
    """Per factor, every choice of E_i + 1 of the d circles, in lexicographic order."""
    return [LogicalQubit(i, circles)
            for i, f in enumerate(spec.factors, start=1)
            for circles in itertools.combinations(range(1, spec.d + 1), f.E + 1)]


class _TorusLayout:
    """Qubit indexing in the swapped-species frame."""

    def __init__(self, result):
        self.result = result
        self.model = result.model
        self.d = result.spec.d
        self.circles = frozenset(range(1, self.d + 1))
        self.slots: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        names = []
        for i, f in enumerate(self.model.spec.factors, start=1):
            for circles in itertools.combinations(range(1, self.d + 1), f.E + 1):
                self.slots[(i, circles)] = len(self.slots)
                shown = circles
                if i in result.decorated:
                    shown = tuple(sorted(self.circles - set(circles)))
                names.append(LogicalQubit(i, shown).label)
        self.names = tuple(names)

    @property
    def size(self) -> int:
        return len(self.slots)

    def complement(self, h) -> Tuple[int, ...]:
        return tuple(sorted(self.circles - set(h)))

    def pauli_slot(self, gen_index: int, h) -> Tuple[str, int]:
        """('z'|'x', slot) carrying the string of generator ``gen_index`` along circles ``h``."""
        gen = self.model.generators[gen_index]
        if gen.index < self.model.n:
            return 'z', self.slots[(gen.factor, tuple(sorted(h)))]
        return 'x', self.slots[(gen.factor, self.complement(h))]

    def image_vector(self, image, h) -> np.ndarray:
        """(x | z) vector of the induced image of a string along ``h``."""
        n = self.size
        vec = np.zeros(2 * n, dtype=np.int64)
        for idx, power in enumerate(image.eigen):
            if not power:
                continue
            dim = self.model.generators[idx].dimension
            for sub in itertools.combinations(sorted(h), dim + 1):
                kind, slot = self.pauli_slot(idx, sub)
                vec[slot if kind == 'x' else n + slot] += power
        return vec % self.model.p


def _torus_appendix(layout: _TorusLayout, labels, h, label_gates) -> HierarchyOperator:
    op = HierarchyOperator.identity(layout.model.ring, layout.size)
    for name, power in labels:
        label = layout.model.labels[name]
        full = label_gates[name]
        for sub in itertools.combinations(sorted(h), label.dimension + 1):
            keep = [slot for (i, circles), slot in layout.slots.items() if set(circles) <= set(sub)]
            op = multiply(op, full.restrict(keep) ** power)
    return op


def _torus_normalized_gate(layout: _TorusLayout, wall, label_gates: Dict[str, HierarchyOperator]) -> LogicalGate:
    model = layout.model
    n_slots = layout.size
    if wall.level <= 2:
        mat = np.zeros((2 * n_slots, 2 * n_slots), dtype=np.int64)
        for (i, circles), slot in layout.slots.items():
            mat[slot] = layout.image_vector(wall.images[model.n + i - 1], layout.complement(circles))
            mat[n_slots + slot] = layout.image_vector(wall.images[i - 1], circles)
        return synthesize_clifford(mat % model.p, model.ring)
    appended = {}
    for (i, circles), slot in layout.slots.items():
        img = wall.images[model.n + i - 1]
        if img.labels:
            appended[slot] = _torus_appendix(layout, img.labels, layout.complement(circles), label_gates)
    return synthesize_diagonal(appended, n_slots, model.ring)


def _torus_record(layout: _TorusLayout, wall, gate: LogicalGate) -> GateRecord:
    """Decorated qubits carry the gate in the Hadamard frame; the name stays that of the frame-free gate."""
    slots = [slot for (i, _), slot in layout.slots.items() if i in layout.result.decorated]
    if not slots:
        return GateRecord(wall.name, gate, wall.wall_dimension + 1, slot_names=layout.names)
    return GateRecord(wall.name, gate.conjugated_by_fourier(slots), wall.wall_dimension + 1,
                      slot_names=layout.names, display_name=gate_name(gate),
                      metadata={'hadamard_frame': [layout.names[s] for s in slots]})


def torus_gate(result, wall, label_gates: Optional[Dict[str, HierarchyOperator]] = None,
               layout: Optional[_TorusLayout] = None) -> GateRecord:
    """Gate induced on the torus qubits; synthesis verifies every Pauli image.

    ``label_gates`` holds the swapped-frame torus gates of lower-level labels
    and is required for walls of level 3 and above.
    """
    layout = layout or _TorusLayout(result)
    if label_gates is None:
        label_gates = {}
        for lower in sorted(result.generators, key=lambda w: (w.level, w.name)):
            if lower.level >= wall.level:
                break
            if lower.name in result.model.labels:
                g = _torus_normalized_gate(layout, lower, label_gates)
                if g.is_operator():
                    label_gates[lower.name] = g.as_operator()
    return _torus_record(layout, wall, _torus_normalized_gate(layout, wall, label_gates))


def torus_gates(result) -> GateGroup:
    layout = _TorusLayout(result)
    group = GateGroup(result.spec.name, BoundaryVariant.TORUS, list(layout.names))
    label_gates: Dict[str, HierarchyOperator] = {}
    for wall in sorted(result.generators, key=lambda w: (w.level, w.name)):
        gate = _torus_normalized_gate(layout, wall, label_gates)
        if wall.name in result.model.labels and gate.is_operator():
            label_gates[wall.name] = gate.as_operator()
        group.gates.append(_torus_record(layout, wall, gate))
    chosen = independent_gates([g.gate for g in group.gates])
    group.generators = [group.gates[i] for i in chosen]
    logger.info('torus gates synthesized', extra={'extra_fields': {
        'code': result.spec.name, 'qubits': layout.size, 'gates': len(group.gates),
        'generators': len(group.generators)}})
    return group


# -- tables --------------------------------------------------------------------

def tabled_gates(result) -> GateGroup:
    """Gates from the boundary's orientation table, for walls the bulk admits."""
    spec = result.spec
    boundary = spec.boundary
    k = boundary.qubits_per_code
    slots = spec.n * k
    names = [f'({c},{q})' for c in range(1, spec.n + 1) for q in range(1, k + 1)]
    admissible = {w.name: w for walls in result.walls_by_level.values() for w in walls}
    group = GateGroup(spec.name, BoundaryVariant.TABLED, names)
    for entry in boundary.gate_table:
        wall = admissible.get(entry.wall)
        if wall is None:
            raise InadmissibleTableEntry(f'table entry {entry.wall!r} ({entry.orientation}) names a wall the bulk rejects')
        op = parse_operator(entry.gate, result.model.ring, slots)
        gate = LogicalGate.of(op, slots)
        group.gates.append(GateRecord(wall.name, gate, wall.wall_dimension + 1,
                                      slot_names=tuple(names), orientation=entry.orientation or None))
    chosen = independent_gates([g.gate for g in group.gates])
    group.generators = [group.gates[i] for i in chosen]
    return group


def stack_gates(result) -> GateGroup:
    group = GateGroup(result.spec.name, BoundaryVariant.STACK,
                      [f'q{i}' for i in range(1, result.spec.n + 1)], list(result.gates))
    chosen = independent_gates([g.gate for g in group.gates])
    group.generators = [group.gates[i] for i in chosen]
    return group


def gate_group(result) -> GateGroup:
    """Dispatch on the code's boundary variant."""
    boundary = result.spec.boundary or BoundarySpec()
    handlers = {
        BoundaryVariant.STACK: stack_gates,
        BoundaryVariant.ATTACH: quotient_classify,
        BoundaryVariant.TORUS: torus_gates,
        BoundaryVariant.TABLED: tabled_gates,
    }
    return handlers[boundary.variant](result)
