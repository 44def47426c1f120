from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import error
from .config import TapConfig
from .graph import NetworkBundle, TemporalActivityNetwork
from .graph_value import VertexId, VertexKind, TimeInterval, TemporalEdge

"""
Random instances and brute force oracles for the property suites.

The oracles only share the graph types with the production code.  They read the raw edge lists, never the adjacency
index, and compute temporal weights inline.
"""


@dataclass(frozen=True)
class RandomBundleSpec:
    """
    Parameters of a random bundle.  Each (character, β, entity) triple gets 0, 1 or 2 parallel edges drawn
    binomially with p = edge_density.  Characters are then topped up to min_edges_per_subnetwork edges in every
    subnetwork, and max_edges (when set) truncates the edge list, taking precedence over the minimum.
    Intervals fall within [start_year, start_year + interval_span] and now is pinned to the end of that span, so no
    edge is future dated.
    """
    characters: int = 8
    entities_per_type: int = 3
    entity_types: int = 2
    relation_types: int = 2
    edge_density: float = 0.2
    interval_span: int = 20
    start_year: int = 1990
    min_edges_per_subnetwork: int = 0
    max_edges: int | None = None
    seed: int = 0

    def __post_init__(self):
        counts = (self.characters, self.entities_per_type, self.entity_types, self.relation_types, self.interval_span,
                  self.start_year, self.min_edges_per_subnetwork)
        if any(c < 0 for c in counts) or not (0.0 <= self.edge_density <= 1.0):
            raise error.ConfigError(message="random bundle counts must be non-negative and density in [0, 1]")

    @property
    def now(self) -> int:
        return self.start_year + self.interval_span


class PlantMode(Enum):
    EXACT_CLONE = "exact-clone"
    TIME_SHIFTED = "time-shifted"
    PARTIAL_CLONE = "partial-clone"


@dataclass(frozen=True)
class PlantedDuplicate:
    original: VertexId
    duplicate: VertexId
    mode: PlantMode

    @property
    def pair(self) -> tuple[VertexId, VertexId]:
        return tuple(sorted((self.original, self.duplicate)))


def generate(spec: RandomBundleSpec) -> NetworkBundle:
    rng = np.random.default_rng(spec.seed)
    relation_types = [f"beta{i}" for i in range(spec.relation_types)]
    entity_types = [f"type{i}" for i in range(spec.entity_types)]
    bundle = NetworkBundle(relation_types=relation_types, entity_types=entity_types, now=spec.now)
    characters = [bundle.add_vertex(VertexKind.CHARACTER, bundle.character_type, f"Character {i}")
                  for i in range(spec.characters)]
    entities = [bundle.add_vertex(VertexKind.ENTITY, entity_type, f"{entity_type} entity {i}")
                for entity_type in entity_types
                for i in range(spec.entities_per_type)]
    if not (characters and entities and relation_types):
        return bundle.seal()

    counts = rng.binomial(2, spec.edge_density, size=(len(characters), len(relation_types), len(entities)))
    triples = [(c, b, e)
               for c, b, e in np.argwhere(counts > 0).tolist()
               for _ in range(int(counts[c, b, e]))]
    for c in range(len(characters)):
        for b in range(len(relation_types)):
            have = int(counts[c, b].sum())
            for _ in range(max(spec.min_edges_per_subnetwork - have, 0)):
                triples.append((c, b, int(rng.integers(len(entities)))))
    triples.sort()
    if spec.max_edges is not None:
        triples = triples[:spec.max_edges]

    for c, b, e in triples:
        start, end = sorted(int(p) for p in rng.integers(0, spec.interval_span + 1, size=2))
        bundle.add_edge(characters[c],
                        entities[e],
                        relation_types[b],
                        TimeInterval(spec.start_year + start, spec.start_year + end))
    return bundle.seal()


def plant_duplicates(bundle: NetworkBundle,
                     k: int,
                     mode: PlantMode,
                     seed: int = 0) -> tuple[NetworkBundle, list[PlantedDuplicate]]:
    """
    Adds k duplicates of distinct originals, chosen among the characters active in every subnetwork.
    + EXACT_CLONE copies every edge.
    + TIME_SHIFTED copies every edge with the interval moved 1 to 3 time points earlier.
    + PARTIAL_CLONE copies every edge, except that in one subnetwork each edge goes to a fresh entity of the same type.
    """
    eligible = [c.id for c in bundle.characters()
                if all(bundle.subnetwork(b).has_vertex(c.id) for b in bundle.relation_types)]
    if mode is PlantMode.TIME_SHIFTED:
        eligible = [c for c in eligible if min(e.start for e in bundle.edges_of(c)) >= 1]
    if k > len(eligible):
        raise error.ConfigError(message=f"cannot plant {k} duplicates among {len(eligible)} eligible characters",
                                ctx={'k': k, 'eligible': len(eligible)})
    rng = np.random.default_rng(seed)
    originals = sorted(rng.choice(eligible, size=k, replace=False).tolist()) if k else []
    planted = bundle.derive()
    truth = []
    for original in originals:
        edges = bundle.edges_of(original)
        duplicate = planted.add_vertex(VertexKind.CHARACTER,
                                       planted.character_type,
                                       f"{bundle.vertices[original].display_name} II")
        for edge in _planted_edges(planted, edges, mode, rng):
            planted.add_edge(duplicate, edge.entity, edge.relation_type, edge.interval)
        truth.append(PlantedDuplicate(original=original, duplicate=duplicate, mode=mode))
    return planted.seal(), truth


def _planted_edges(planted: NetworkBundle, edges: list[TemporalEdge], mode: PlantMode, rng) -> list[TemporalEdge]:
    match mode:
        case PlantMode.TIME_SHIFTED:
            shift = min(int(rng.integers(1, 4)), min(e.start for e in edges))
            return [TemporalEdge(e.relation_id, e.character, e.entity, e.relation_type, e.interval.shifted(-shift))
                    for e in edges]
        case PlantMode.PARTIAL_CLONE:
            relation_types = sorted({e.relation_type for e in edges})
            replaced = relation_types[int(rng.integers(len(relation_types)))]
            fresh = {}
            result = []
            for e in edges:
                if e.relation_type != replaced:
                    result.append(e)
                    continue
                if e.entity not in fresh:
                    source = planted.vertices[e.entity]
                    fresh[e.entity] = planted.add_vertex(VertexKind.ENTITY,
                                                         source.type_label,
                                                         f"{source.display_name} (replacement)")
                result.append(TemporalEdge(e.relation_id, e.character, fresh[e.entity], e.relation_type, e.interval))
            return result
        case _:
            return list(edges)


#
# Oracles
#
def oracle_enumerate_paths(network: TemporalActivityNetwork,
                           x: VertexId,
                           y: VertexId,
                           now: int) -> list[tuple[VertexId, str, str, int]]:
    """
    Every x -> z -> y path as (z, x relation id, y relation id, path weight), by a double loop over the raw edge list.
    """
    limit = TapConfig().oracle_max_paths
    paths = []
    for first in network.edges:
        if first.character != x:
            continue
        for second in network.edges:
            if second.character != y or second.entity != first.entity:
                continue
            paths.append((first.entity, first.relation_id, second.relation_id,
                          _weight(first, now) * _weight(second, now)))
            if len(paths) > limit:
                raise error.InstanceTooLarge(message=f"more than {limit} paths between {x} and {y}",
                                             ctx={'x': x, 'y': y, 'limit': limit})
    return paths


def oracle_simtap_beta(network: TemporalActivityNetwork, x: VertexId, y: VertexId, now: int) -> float:
    xy = sum(p[3] for p in oracle_enumerate_paths(network, x, y, now))
    xx = sum(p[3] for p in oracle_enumerate_paths(network, x, x, now))
    yy = sum(p[3] for p in oracle_enumerate_paths(network, y, y, now))
    if xx + yy == 0:
        return 0.0
    return (2 * xy) / (xx + yy)


def oracle_same_neighbourhood(bundle: NetworkBundle, x: VertexId, y: VertexId) -> bool:
    """
    True when x and y have the same multiset of (β, entity) edge endpoints, including when both have none.
    """
    def endpoints(character):
        return Counter((e.relation_type, e.entity) for e in bundle.edges() if e.character == character)

    return endpoints(x) == endpoints(y)


def _weight(edge: TemporalEdge, now: int) -> int:
    return (now + 1 - edge.interval.start) * (edge.interval.end + 1 - edge.interval.start)
