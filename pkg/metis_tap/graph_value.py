from dataclasses import dataclass
from enum import Enum

from . import error

VertexId = str

DEFAULT_CHARACTER_TYPE = "person"


class VertexKind(Enum):
    CHARACTER = "character"
    ENTITY = "entity"


@dataclass(frozen=True, order=True)
class TimeInterval:
    """
    The <start, end> temporal attribute of an activity, in integer time points (years unless the dataset manifest
    says otherwise).  Both points are inclusive, so [2000, 2000] is one year of activity.
    """
    start: int
    end: int

    def __post_init__(self):
        if not (isinstance(self.start, int) and isinstance(self.end, int)):
            raise error.InvalidInterval(message="interval points must be integers",
                                        ctx={'start': self.start, 'end': self.end})
        if self.start < 0 or self.end < 0:
            raise error.InvalidInterval(message="negative time point",
                                        ctx={'start': self.start, 'end': self.end})
        if self.end < self.start:
            raise error.InvalidInterval(message="inverted interval",
                                        ctx={'start': self.start, 'end': self.end})

    @property
    def duration(self) -> int:
        return self.end + 1 - self.start

    def shifted(self, by: int) -> "TimeInterval":
        return TimeInterval(self.start + by, self.end + by)


@dataclass(frozen=True)
class Vertex:
    id: VertexId
    kind: VertexKind
    type_label: str
    display_name: str

    @property
    def is_character(self) -> bool:
        return self.kind is VertexKind.CHARACTER

    @property
    def is_entity(self) -> bool:
        return self.kind is VertexKind.ENTITY


@dataclass(frozen=True)
class TemporalEdge:
    relation_id: str
    character: VertexId
    entity: VertexId
    relation_type: str
    interval: TimeInterval

    @property
    def start(self) -> int:
        return self.interval.start

    @property
    def end(self) -> int:
        return self.interval.end

    def fact(self) -> tuple[VertexId, str, TimeInterval]:
        """
        The activity fact of the edge, independent of which character holds it.
        """
        return self.entity, self.relation_type, self.interval

    def reassigned(self, character: VertexId) -> "TemporalEdge":
        return TemporalEdge(relation_id=self.relation_id,
                            character=character,
                            entity=self.entity,
                            relation_type=self.relation_type,
                            interval=self.interval)
