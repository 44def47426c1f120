import hashlib
import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator

import networkx as nx
from metis_fn import monad

from . import error
from .graph_value import (VertexId,
                          VertexKind,
                          Vertex,
                          TemporalEdge,
                          TimeInterval,
                          DEFAULT_CHARACTER_TYPE)

"""
In-memory heterogeneous temporal 2-mode networks.

A NetworkBundle owns a vertex registry shared by one TemporalActivityNetwork per relation type (β).  Every edge joins a
Character to an Entity, and parallel edges between the same pair are kept as distinct relations.  A bundle is built
by a single writer and then sealed; sealed bundles are never mutated, derive() gives an unsealed copy to build from.
"""

ID_PREFIXES = {VertexKind.CHARACTER: "c", VertexKind.ENTITY: "e"}
RELATION_PREFIX = "r"
ID_WIDTH = 6


class TemporalActivityNetwork:
    """
    The 2-mode temporal multigraph of a single relation type.  The adjacency index realises both the incident-relations
    mapping (incident) and the neighbour mapping (neighbour_counts, as a multiset).
    """

    def __init__(self, relation_type: str):
        self.relation_type = relation_type
        self._edges: list[TemporalEdge] = []
        self._adjacency: dict[VertexId, list[TemporalEdge]] = defaultdict(list)

    def _append(self, edge: TemporalEdge) -> None:
        self._edges.append(edge)
        self._adjacency[edge.character].append(edge)
        self._adjacency[edge.entity].append(edge)

    @property
    def edges(self) -> tuple[TemporalEdge, ...]:
        return tuple(self._edges)

    def __len__(self):
        return len(self._edges)

    def has_vertex(self, vertex_id: VertexId) -> bool:
        return vertex_id in self._adjacency

    def incident(self, vertex_id: VertexId) -> tuple[TemporalEdge, ...]:
        return tuple(self._adjacency.get(vertex_id, ()))

    def characters(self) -> list[VertexId]:
        return sorted({edge.character for edge in self._edges})

    def entities(self) -> list[VertexId]:
        return sorted({edge.entity for edge in self._edges})

    def neighbour_counts(self, character: VertexId) -> Counter:
        return Counter(edge.entity for edge in self._adjacency.get(character, ()))

    def edges_by_entity(self, character: VertexId) -> dict[VertexId, list[TemporalEdge]]:
        grouped = defaultdict(list)
        for edge in self._adjacency.get(character, ()):
            grouped[edge.entity].append(edge)
        return dict(sorted(grouped.items()))

    def degree(self, vertex_id: VertexId) -> int:
        return len(self._adjacency.get(vertex_id, ()))


class NetworkBundle:
    """
    G = {G_β | β ∈ B}.  Relation types (B) are declared up front (or as discovered by the loader) and keep their
    declaration order, which is the column order of every per-subnetwork report.
    """

    def __init__(self,
                 relation_types: Iterable[str] = (),
                 entity_types: Iterable[str] = (),
                 character_type: str = DEFAULT_CHARACTER_TYPE,
                 time_unit: str = "year",
                 now: int | None = None):
        self.vertices: dict[VertexId, Vertex] = {}
        self.subnetworks: dict[str, TemporalActivityNetwork] = {}
        self.character_type = character_type
        self.time_unit = time_unit
        self.now = now
        self._relation_types: list[str] = []
        self._entity_types: list[str] = []
        self._relation_ids: set[str] = set()
        self._counters = Counter()
        self._sealed = False
        for relation_type in relation_types:
            self.declare_relation_type(relation_type)
        for entity_type in entity_types:
            self.declare_entity_type(entity_type)

    #
    # Declarations
    #
    @property
    def relation_types(self) -> tuple[str, ...]:
        return tuple(self._relation_types)

    @property
    def entity_types(self) -> tuple[str, ...]:
        return tuple(self._entity_types)

    @property
    def type_labels(self) -> frozenset[str]:
        """
        The vertex type label set A.
        """
        return frozenset({vertex.type_label for vertex in self.vertices.values()} | set(self._entity_types))

    def declare_relation_type(self, relation_type: str) -> bool:
        self._guard_sealed()
        if not relation_type:
            raise error.UndeclaredRelationType(message="relation type must be nonempty")
        if relation_type in self._relation_types:
            return False
        self._relation_types.append(relation_type)
        return True

    def declare_entity_type(self, entity_type: str) -> bool:
        self._guard_sealed()
        if entity_type in self._entity_types:
            return False
        self._entity_types.append(entity_type)
        return True

    #
    # Construction
    #
    def add_vertex(self,
                   kind: VertexKind,
                   type_label: str,
                   display_name: str,
                   id: VertexId | None = None) -> VertexId:
        self._guard_sealed()
        if not type_label:
            raise error.GraphError(message="type label must be nonempty", ctx={'display_name': display_name})
        if id is not None and id in self.vertices:
            raise error.DuplicateVertexId(message=f"duplicate vertex id {id}", ctx={'id': id})
        vertex_id = id if id is not None else self._fresh_id(ID_PREFIXES[kind], self.vertices)
        self.vertices[vertex_id] = Vertex(id=vertex_id, kind=kind, type_label=type_label, display_name=display_name)
        if kind is VertexKind.ENTITY:
            self.declare_entity_type(type_label)
        return vertex_id

    def add_edge(self,
                 character: VertexId,
                 entity: VertexId,
                 relation_type: str,
                 interval: TimeInterval,
                 relation_id: str | None = None) -> str:
        self._guard_sealed()
        self._expect_kind(character, VertexKind.CHARACTER)
        self._expect_kind(entity, VertexKind.ENTITY)
        if relation_type not in self._relation_types:
            raise error.UndeclaredRelationType(message=f"undeclared relation type {relation_type}",
                                               ctx={'relation_type': relation_type,
                                                    'declared': self.relation_types})
        if not isinstance(interval, TimeInterval):
            raise error.InvalidInterval(message="interval must be a TimeInterval", ctx={'interval': str(interval)})
        if relation_id is not None and relation_id in self._relation_ids:
            raise error.GraphError(message=f"duplicate relation id {relation_id}", ctx={'relation_id': relation_id})
        rel_id = relation_id if relation_id is not None else self._fresh_id(RELATION_PREFIX, self._relation_ids)
        self._relation_ids.add(rel_id)
        edge = TemporalEdge(relation_id=rel_id,
                            character=character,
                            entity=entity,
                            relation_type=relation_type,
                            interval=interval)
        self.subnetworks.setdefault(relation_type, TemporalActivityNetwork(relation_type))._append(edge)
        return rel_id

    def seal(self) -> "NetworkBundle":
        self._sealed = True
        return self

    @property
    def sealed(self) -> bool:
        return self._sealed

    def derive(self, exclude_vertices: Iterable[VertexId] = ()) -> "NetworkBundle":
        """
        An unsealed copy of this bundle, optionally without some vertices (and their edges), which continues this
        bundle's id sequences so new ids never collide with ids this bundle has issued.
        """
        excluded = set(exclude_vertices)
        copy = self.empty_like()
        for vertex in self.vertices.values():
            if vertex.id not in excluded:
                copy.vertices[vertex.id] = vertex
        for edge in self.edges():
            if edge.character not in excluded and edge.entity not in excluded:
                copy.add_edge(edge.character, edge.entity, edge.relation_type, edge.interval, edge.relation_id)
        return copy

    def empty_like(self) -> "NetworkBundle":
        copy = NetworkBundle(relation_types=self._relation_types,
                             entity_types=self._entity_types,
                             character_type=self.character_type,
                             time_unit=self.time_unit,
                             now=self.now)
        copy._counters = Counter(self._counters)
        return copy

    #
    # Queries
    #
    def vertex(self, vertex_id: VertexId) -> Vertex:
        if vertex_id not in self.vertices:
            raise error.UnknownVertex(message=f"unknown vertex {vertex_id}", ctx={'id': vertex_id})
        return self.vertices[vertex_id]

    def character(self, vertex_id: VertexId) -> Vertex:
        return self._expect_kind(vertex_id, VertexKind.CHARACTER)

    def characters(self) -> list[Vertex]:
        return sorted((v for v in self.vertices.values() if v.is_character), key=lambda v: v.id)

    def entities(self) -> list[Vertex]:
        return sorted((v for v in self.vertices.values() if v.is_entity), key=lambda v: v.id)

    def subnetwork(self, relation_type: str) -> TemporalActivityNetwork:
        """
        A character absent from a declared subnetwork is not an error; an undeclared relation type is.
        """
        if relation_type not in self._relation_types:
            raise error.UndeclaredRelationType(message=f"undeclared relation type {relation_type}",
                                               ctx={'relation_type': relation_type})
        return self.subnetworks.get(relation_type, TemporalActivityNetwork(relation_type))

    def edges(self) -> Iterator[TemporalEdge]:
        for relation_type in self._relation_types:
            if relation_type in self.subnetworks:
                yield from self.subnetworks[relation_type].edges

    def edges_of(self, vertex_id: VertexId) -> list[TemporalEdge]:
        return [edge
                for relation_type in self._relation_types if relation_type in self.subnetworks
                for edge in self.subnetworks[relation_type].incident(vertex_id)]

    def edge_count(self) -> int:
        return sum(len(network) for network in self.subnetworks.values())

    def is_empty(self) -> bool:
        return not self.vertices

    def max_end(self) -> int | None:
        return max((edge.end for edge in self.edges()), default=None)

    def fingerprint(self) -> str:
        """
        SHA-256 over the canonical vertex and edge listing.  Two bundles with the same fingerprint hold the same
        vertices and relations under the same ids.
        """
        canonical = {'vertices': [[v.id, v.kind.value, v.type_label, v.display_name]
                                  for v in sorted(self.vertices.values(), key=lambda v: v.id)],
                     'edges': sorted([e.relation_id, e.character, e.entity, e.relation_type, e.start, e.end]
                                     for e in self.edges()),
                     'relation_types': self.relation_types}
        return hashlib.sha256(json.dumps(canonical, sort_keys=True).encode("utf-8")).hexdigest()

    #
    # Helpers
    #
    def _guard_sealed(self):
        if self._sealed:
            raise error.SealedBundle(message="bundle is sealed; derive() a copy to modify it")

    def _expect_kind(self, vertex_id: VertexId, kind: VertexKind) -> Vertex:
        vertex = self.vertex(vertex_id)
        if vertex.kind is not kind:
            raise error.VertexKindMismatch(message=f"vertex {vertex_id} is an {vertex.kind.value}, expected {kind.value}",
                                           ctx={'id': vertex_id, 'kind': vertex.kind.value, 'expected': kind.value})
        return vertex

    def _fresh_id(self, prefix: str, taken) -> str:
        while True:
            self._counters[prefix] += 1
            candidate = f"{prefix}{self._counters[prefix]:0{ID_WIDTH}d}"
            if candidate not in taken:
                return candidate


def validate(bundle: NetworkBundle) -> monad.EitherMonad[NetworkBundle]:
    """
    Heterogeneity: a bundle is a valid heterogeneous network iff it has at least 2 vertex type labels and at least
    1 relation type.
    """
    if len(bundle.type_labels) < 2 or len(bundle.relation_types) < 1:
        return monad.Left(error.HeterogeneityError(message="bundle is not heterogeneous",
                                                   ctx={'vertex_types': sorted(bundle.type_labels),
                                                        'relation_types': list(bundle.relation_types)}))
    return monad.Right(bundle)


#
# 1-mode projection
#
@dataclass(frozen=True, order=True)
class CharacterRelation:
    x: VertexId
    y: VertexId
    entity: VertexId
    relation_type: str
    x_relation: str
    y_relation: str


class OneModeNetwork:
    """
    The character relationship network: an undirected multigraph on characters where every relation records the
    shared entity and the pair of 2-mode edges that induced it.
    """

    def __init__(self, graph: nx.MultiGraph):
        self.graph = graph

    def characters(self) -> list[VertexId]:
        return sorted(self.graph.nodes)

    def multiplicity(self, x: VertexId, y: VertexId) -> int:
        if not (self.graph.has_node(x) and self.graph.has_node(y)):
            return 0
        return self.graph.number_of_edges(x, y)

    def relations(self) -> list[CharacterRelation]:
        return sorted(data['provenance'] for _x, _y, data in self.graph.edges(data=True))

    def __len__(self):
        return self.graph.number_of_edges()


def project_one_mode(bundle: NetworkBundle) -> OneModeNetwork:
    graph = nx.MultiGraph()
    graph.add_nodes_from(vertex.id for vertex in bundle.characters())
    for relation_type in bundle.relation_types:
        network = bundle.subnetworks.get(relation_type)
        if not network:
            continue
        for entity in network.entities():
            by_character = defaultdict(list)
            for edge in network.incident(entity):
                by_character[edge.character].append(edge)
            for x, y in itertools.combinations(sorted(by_character), 2):
                for x_edge, y_edge in itertools.product(by_character[x], by_character[y]):
                    relation = CharacterRelation(x=x,
                                                 y=y,
                                                 entity=entity,
                                                 relation_type=relation_type,
                                                 x_relation=x_edge.relation_id,
                                                 y_relation=y_edge.relation_id)
                    graph.add_edge(x, y, key=f"{x_edge.relation_id}|{y_edge.relation_id}", provenance=relation)
    return OneModeNetwork(graph)
