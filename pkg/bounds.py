"""
Locality bounds on logical gates.

A gate of hierarchy level p realised by a wall of dimension k has support
dimension m = k + 1, and must satisfy m >= p(a + 1), where a is the smallest
eigenstate excitation dimension of the code.  Consequently p <= d / (a + 1).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

from errors import BoundViolationError

logger = logging.getLogger('walls.bounds')


def max_level(d: int, a: int) -> int:
    if d < 2 or a < 0:
        raise ValueError(f'max_level needs d >= 2 and a >= 0, got d={d}, a={a}')
    return d // (a + 1)


def min_excitation_dimension(spec) -> int:
    """a = min over factors of min(M_i, E_i); 0 for an empty stack."""
    return min((min(f.M, f.E) for f in spec.factors), default=0)


@dataclass
class BoundRecord:
    gate: str
    wall: str
    level: int
    support_dimension: int
    a: int
    d: int

    @property
    def required_support(self) -> int:
        return self.level * (self.a + 1)

    @property
    def satisfied(self) -> bool:
        return (self.support_dimension >= self.required_support
                and self.level <= max_level(self.d, self.a))

    @property
    def saturated(self) -> bool:
        return self.support_dimension == self.required_support

    def to_dict(self) -> Dict[str, Any]:
        return {
            'gate': self.gate,
            'wall': self.wall,
            'level': self.level,
            'support_dimension': self.support_dimension,
            'required_support': self.required_support,
            'satisfied': self.satisfied,
            'saturated': self.saturated,
        }


@dataclass
class BoundReport:
    d: int
    a: int
    records: List[BoundRecord] = field(default_factory=list)

    @property
    def max_level(self) -> int:
        return max_level(self.d, self.a)

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.records)

    def violations(self) -> List[BoundRecord]:
        return [r for r in self.records if not r.satisfied]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'd': self.d,
            'a': self.a,
            'max_level': self.max_level,
            'satisfied': self.satisfied,
            # distance is not computed, only the scaling relation is reported
            'distance_relation': f'delta <= O({self.d}/p)',
            'records': [r.to_dict() for r in self.records],
        }


def check_records(records: Sequence, spec, raise_on_violation: bool = True) -> BoundReport:
    """Bound report over GateRecords; violations raise BoundViolationError by default."""
    a = min_excitation_dimension(spec)
    report = BoundReport(spec.d, a)
    for record in records:
        report.records.append(BoundRecord(
            gate=record.name,
            wall=record.wall,
            level=record.level,
            support_dimension=record.support_dimension,
            a=a,
            d=spec.d,
        ))
    if not report.satisfied:
        logger.error('locality bound violated', extra={'extra_fields': {
            'code': spec.name, 'violations': [r.to_dict() for r in report.violations()]}})
        if raise_on_violation:
            raise BoundViolationError(report)
    return report


def check(result, spec=None, raise_on_violation: bool = True) -> BoundReport:
    """Check every gate of a classification (or boundary gate group) result."""
    spec = spec or result.spec
    return check_records(result.gates, spec, raise_on_violation)
