"""
Exception hierarchy for the domain-wall engine.

Every error knows how to serialise itself so the CLI can print it verbatim
as JSON on stderr.
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional


class WallsError(Exception):
    """Base class for all engine errors."""

    exit_code = 4

    def to_dict(self) -> Dict[str, Any]:
        return {'error': type(self).__name__, 'message': str(self)}


class RingMismatchError(WallsError):
    """Operators over different qudit primes were combined."""


class OperatorParseError(WallsError):
    """Operator text does not follow the canonical grammar."""

    exit_code = 2


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    message: str


class SpecValidationError(WallsError):
    """A code spec (or run configuration) failed validation."""

    exit_code = 2

    def __init__(self, errors: List[ValidationIssue]):
        self.errors = list(errors)
        summary = '; '.join(f'{e.path}: {e.message}' for e in self.errors)
        super().__init__(summary or 'invalid spec')

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['errors'] = [asdict(e) for e in self.errors]
        return data


class SearchCapExceeded(WallsError):
    """A configured enumeration cap was hit."""

    exit_code = 3

    def __init__(self, cap_name: str, cap: int, attempted: Optional[int] = None):
        self.cap_name = cap_name
        self.cap = cap
        self.attempted = attempted
        detail = f' (needed {attempted})' if attempted is not None else ''
        super().__init__(f'{cap_name} cap of {cap} exceeded{detail}')

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({'cap_name': self.cap_name, 'cap': self.cap, 'attempted': self.attempted})
        return data


class SynthesisError(WallsError):
    """No operator realises a wall action that passed every admissibility check."""


class UnresolvedLabelError(WallsError):
    """A composite excitation references a wall label with no known representative."""


class InadmissibleTableEntry(WallsError):
    """A gate table names a wall that the bulk classification rejected."""

    exit_code = 2


class BoundViolationError(WallsError):
    """A gate breaks the support/level bound."""

    def __init__(self, report: Any):
        self.report = report
        bad = [r.gate for r in report.records if not r.satisfied]
        super().__init__(f'bound violated by {", ".join(bad)}')

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['report'] = self.report.to_dict()
        return data


class UnknownCatalogEntry(WallsError):
    """Requested builtin code does not exist."""

    exit_code = 2
