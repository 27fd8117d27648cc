"""Exception hierarchy shared across the package.

Every domain error carries a machine-readable ``code`` so the HTTP layer and
the log validator can map failures without string matching.
"""

from __future__ import annotations


class YardTwinError(Exception):
    """Base class for all domain errors."""

    code = "YARD_ERROR"

    def __init__(self, message: str, *, seq: int | None = None):
        super().__init__(message)
        self.seq = seq  # event sequence number, attached by the replay engine


class AddressOutOfRange(YardTwinError):
    code = "ADDRESS_OUT_OF_RANGE"


class SlotOccupied(YardTwinError):
    code = "SLOT_OCCUPIED"


class FloatingPlacement(YardTwinError):
    code = "FLOATING_PLACEMENT"


class DuplicateContainer(YardTwinError):
    code = "DUPLICATE_CONTAINER"


class SlotEmpty(YardTwinError):
    code = "SLOT_EMPTY"


class NotTopmost(YardTwinError):
    code = "NOT_TOPMOST"


class UnknownContainer(YardTwinError):
    code = "UNKNOWN_CONTAINER"


class ContainerMismatch(YardTwinError):
    """Logged slot holds a different container than the event claims."""

    code = "CONTAINER_MISMATCH"


class UnknownEquipmentLayout(YardTwinError):
    code = "UNKNOWN_EQUIPMENT_LAYOUT"


class NoFeasibleSlot(YardTwinError):
    code = "NO_FEASIBLE_SLOT"


class InvalidStrategy(YardTwinError):
    code = "INVALID_STRATEGY"


class WindowMismatch(YardTwinError):
    code = "WINDOW_MISMATCH"


class ReplayHalted(YardTwinError):
    """Replay stopped at an event that cannot be applied."""

    code = "REPLAY_HALTED"

    def __init__(self, seq: int, cause: YardTwinError):
        super().__init__(f"replay halted at seq {seq}: {cause}", seq=seq)
        self.cause = cause


class ParseError(YardTwinError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedLine(ParseError):
    code = "MALFORMED_LINE"


class UnknownEventKind(ParseError):
    code = "UNKNOWN_EVENT_KIND"


class MissingRequiredField(ParseError):
    code = "MISSING_REQUIRED_FIELD"

    def __init__(self, kind: str, field: str, line_no: int):
        super().__init__(f"{kind} requires field '{field}'", line_no)
        self.kind = kind
        self.field = field


class CapacityExceeded(YardTwinError):
    code = "CAPACITY_EXCEEDED"


class RelocationImpossible(YardTwinError):
    code = "RELOCATION_IMPOSSIBLE"
