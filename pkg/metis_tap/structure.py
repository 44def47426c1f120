import heapq
import itertools
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from . import error, logger, parallel
from .config import TapConfig
from .graph import NetworkBundle
from .graph_value import VertexId

"""
Structure error screening.

The structure error of two characters is 1 minus the Dice coefficient of their per-entity edge counts, summed over
every subnetwork:

    ε(x, y) = 1 - 2·Σ_β Σ_z min(c_x(z), c_y(z)) / (Σ_β deg(x) + Σ_β deg(y))

so it is 0 exactly when x and y have identical (entity, β, count) neighbour multisets, and 1 when they share nothing
(or have no edges at all).  Zero is decided on the integer counts; the real value is for reporting.
"""

CANDIDATE_COLUMNS = ["x_id", "x_name", "y_id", "y_name", "structure_error"]


class NameFilter(Enum):
    OFF = "off"
    SAME = "same"
    DIFFERENT = "different"

    def admits(self, x_name: str, y_name: str) -> bool:
        match self:
            case NameFilter.SAME:
                return x_name == y_name
            case NameFilter.DIFFERENT:
                return x_name != y_name
            case _:
                return True


@dataclass(frozen=True)
class SubnetworkBreakdown:
    degree_x: int
    degree_y: int
    shared: int


@dataclass(frozen=True)
class StructureError:
    x: VertexId
    y: VertexId
    value: float
    shared: int
    total_degree: int
    breakdown: dict[str, SubnetworkBreakdown] = field(compare=False, hash=False)

    @property
    def is_zero(self) -> bool:
        return self.total_degree > 0 and 2 * self.shared == self.total_degree

    @property
    def reported_value(self) -> float:
        return 0.0 if abs(self.value) <= TapConfig().zero_tolerance else self.value

    def sort_key(self):
        return self.x, self.y


@dataclass(frozen=True)
class StructureProfile:
    character: VertexId
    counts: dict[str, Counter]


@dataclass
class CandidateSet:
    """
    The candidate set H: unordered character pairs with zero structure error, sorted by (x, y) with x < y.
    """
    pairs: tuple[StructureError, ...]
    name_filter: NameFilter = NameFilter.OFF

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def pair_ids(self) -> list[tuple[VertexId, VertexId]]:
        return [(p.x, p.y) for p in self.pairs]


def profile(bundle: NetworkBundle, character: VertexId) -> StructureProfile:
    return StructureProfile(character=character,
                            counts={relation_type: bundle.subnetworks[relation_type].neighbour_counts(character)
                                    for relation_type in bundle.relation_types
                                    if relation_type in bundle.subnetworks})


def structure_error(bundle: NetworkBundle, x: VertexId, y: VertexId) -> StructureError:
    bundle.character(x)
    bundle.character(y)
    if x == y:
        raise error.GraphError(message="structure error needs two distinct characters", ctx={'x': x, 'y': y})
    return structure_error_of(profile(bundle, x), profile(bundle, y))


def structure_error_of(px: StructureProfile, py: StructureProfile) -> StructureError:
    breakdown = {}
    shared = total = 0
    for relation_type in sorted(set(px.counts) | set(py.counts)):
        cx, cy = px.counts.get(relation_type, Counter()), py.counts.get(relation_type, Counter())
        degree_x, degree_y = sum(cx.values()), sum(cy.values())
        common = sum((cx & cy).values())
        breakdown[relation_type] = SubnetworkBreakdown(degree_x=degree_x, degree_y=degree_y, shared=common)
        shared += common
        total += degree_x + degree_y
    value = 1.0 if total == 0 else 1.0 - (2 * shared) / total
    return StructureError(x=px.character,
                          y=py.character,
                          value=value,
                          shared=shared,
                          total_degree=total,
                          breakdown=breakdown)


@logger.with_perf_log(name="screen_candidates")
def screen_candidates(bundle: NetworkBundle,
                      name_filter: NameFilter = NameFilter.OFF,
                      workers: int = 1) -> CandidateSet:
    """
    Exhaustive screening of every unordered character pair admitted by the name filter.
    """
    pairs = sorted(parallel.map_chunks(_zero_error_pairs,
                                       _admitted_pairs(bundle, name_filter),
                                       context=_profile_context(bundle),
                                       workers=workers),
                   key=StructureError.sort_key)
    logger.info("Candidates screened", ctx={'candidates': len(pairs), 'name_filter': name_filter.value})
    return CandidateSet(pairs=tuple(pairs), name_filter=name_filter)


@logger.with_perf_log(name="nearest_pairs")
def nearest_pairs(bundle: NetworkBundle,
                  limit: int,
                  name_filter: NameFilter = NameFilter.OFF,
                  workers: int = 1) -> list[StructureError]:
    """
    The `limit` pairs with the lowest structure error, zero or not; ties are ordered by ids.
    """
    if limit <= 0:
        return []
    scored = parallel.map_chunks(_all_pair_errors,
                                 _admitted_pairs(bundle, name_filter),
                                 context=_profile_context(bundle),
                                 workers=workers)
    return heapq.nsmallest(limit, scored, key=lambda e: (e.value, e.x, e.y))


def candidate_rows(bundle: NetworkBundle, errors) -> list[dict]:
    fmt = TapConfig().fmt
    return [{"x_id": e.x,
             "x_name": bundle.vertices[e.x].display_name,
             "y_id": e.y,
             "y_name": bundle.vertices[e.y].display_name,
             "structure_error": fmt(e.reported_value)}
            for e in errors]


def _admitted_pairs(bundle: NetworkBundle, name_filter: NameFilter) -> list[tuple[VertexId, VertexId]]:
    return [(x.id, y.id)
            for x, y in itertools.combinations(bundle.characters(), 2)
            if name_filter.admits(x.display_name, y.display_name)]


def _profile_context(bundle: NetworkBundle) -> dict:
    return {'profiles': {c.id: profile(bundle, c.id) for c in bundle.characters()}}


def _zero_error_pairs(context: dict, chunk) -> list[StructureError]:
    # zero error ⟺ equal, nonempty neighbour multisets; only those pairs are scored in full
    profiles = context['profiles']
    return [structure_error_of(profiles[x], profiles[y])
            for x, y in chunk
            if profiles[x].counts == profiles[y].counts and any(profiles[x].counts.values())]


def _all_pair_errors(context: dict, chunk) -> list[StructureError]:
    profiles = context['profiles']
    return [structure_error_of(profiles[x], profiles[y]) for x, y in chunk]
