from dataclasses import dataclass
from typing import Iterable, Sequence

from networkx.utils import UnionFind

from . import error, logger, parallel
from .config import TapConfig
from .graph import NetworkBundle, TemporalActivityNetwork
from .graph_value import TemporalEdge, VertexId
from .structure import CandidateSet

"""
Transaction activity path (TAP) similarity.

A TAP is a path character -> entity -> character inside one relation-type subnetwork.  Each edge carries a temporal
weight (Now + 1 - start) * (end + 1 - start), a path weighs the product of its two edges, and

    SimTAP_β(x, y) = 2·W(P_xy) / (W(P_xx) + W(P_yy))

Summed over every path, W(P_xy) = Σ_z s_x(z)·s_y(z) where s_v(z) is the total weight of v's edges to entity z, so the
similarity is computed from per-character weight vectors rather than by enumerating paths.  Weights are integers; the
only rounding is the final division.  The bundle-level SimTAP is the unweighted mean over every declared subnetwork.
"""

DIVERGENT_COLUMNS = ["x_id", "x_name", "y_id", "y_name", "zero_subnetworks", "simtap"]

REDUNDANT = "redundant"
UNIQUE = "unique"


@dataclass(frozen=True)
class TemporalWeight:
    relation_id: str
    weight: int


@dataclass(frozen=True)
class TapPath:
    start: VertexId
    entity: VertexId
    end: VertexId
    first_relation: str
    second_relation: str
    first_weight: int
    second_weight: int

    @property
    def weight(self) -> int:
        return path_weight(self)


@dataclass(frozen=True)
class NeighbourWeightVector:
    character: VertexId
    weights: dict[str, dict[VertexId, int]]

    def of(self, relation_type: str) -> dict[VertexId, int]:
        return self.weights.get(relation_type, {})


@dataclass(frozen=True)
class SimilarityResult:
    x: VertexId
    y: VertexId
    per_beta: dict[str, float]
    value: float
    now: int
    subnetwork_count: int

    def verdict(self, theta: float) -> str:
        return REDUNDANT if self.value >= theta else UNIQUE


@dataclass(frozen=True)
class RedundantGroupSet:
    groups: tuple[tuple[VertexId, ...], ...]
    theta: float
    now: int
    similarities: tuple[SimilarityResult, ...] = ()

    def __len__(self):
        return len(self.groups)

    def as_dict(self) -> dict:
        return {"theta": self.theta, "now": self.now, "groups": [list(group) for group in self.groups]}


def edge_weight(edge: TemporalEdge, now: int) -> TemporalWeight:
    if edge.start > now:
        raise error.FutureDatedEdge(message=f"relation {edge.relation_id} starts after now",
                                    ctx={'relation_id': edge.relation_id, 'start': edge.start, 'now': now})
    return TemporalWeight(relation_id=edge.relation_id, weight=(now + 1 - edge.start) * edge.interval.duration)


def path_weight(path: TapPath) -> int:
    return path.first_weight * path.second_weight


def enumerate_paths(network: TemporalActivityNetwork, x: VertexId, y: VertexId, now: int) -> list[TapPath]:
    """
    Every path x -> z -> y, one per (shared entity z, edge of x to z, edge of y to z).  For x == y this is the full
    double loop, including a path through the same edge twice and both orders of each edge pair.
    """
    x_edges, y_edges = network.edges_by_entity(x), network.edges_by_entity(y)
    return [TapPath(start=x,
                    entity=z,
                    end=y,
                    first_relation=first.relation_id,
                    second_relation=second.relation_id,
                    first_weight=edge_weight(first, now).weight,
                    second_weight=edge_weight(second, now).weight)
            for z in sorted(x_edges.keys() & y_edges.keys())
            for first in x_edges[z]
            for second in y_edges[z]]


def subnetwork_weights(network: TemporalActivityNetwork, character: VertexId, now: int) -> dict[VertexId, int]:
    return {z: sum(edge_weight(edge, now).weight for edge in edges)
            for z, edges in network.edges_by_entity(character).items()}


def neighbour_weights(bundle: NetworkBundle, character: VertexId, now: int) -> NeighbourWeightVector:
    return NeighbourWeightVector(character=character,
                                 weights={relation_type: subnetwork_weights(network, character, now)
                                          for relation_type, network in bundle.subnetworks.items()
                                          if network.has_vertex(character)})


def similarity_of(sx: dict[VertexId, int], sy: dict[VertexId, int]) -> float:
    xx = sum(w * w for _z, w in sorted(sx.items()))
    yy = sum(w * w for _z, w in sorted(sy.items()))
    if xx + yy == 0:
        return 0.0
    xy = sum(sx[z] * sy[z] for z in sorted(sx.keys() & sy.keys()))
    return (2 * xy) / (xx + yy)


def simtap_beta(network: TemporalActivityNetwork, x: VertexId, y: VertexId, now: int) -> float:
    return similarity_of(subnetwork_weights(network, x, now), subnetwork_weights(network, y, now))


def aggregate(per_beta: Sequence[float], subnetwork_count: int | None = None) -> float:
    count = subnetwork_count if subnetwork_count is not None else len(per_beta)
    if count == 0:
        return 0.0
    return sum(per_beta) / count


def simtap(bundle: NetworkBundle, x: VertexId, y: VertexId, now: int) -> SimilarityResult:
    bundle.character(x)
    bundle.character(y)
    return similarity_from_vectors(neighbour_weights(bundle, x, now),
                                   neighbour_weights(bundle, y, now),
                                   bundle.relation_types,
                                   now)


def similarity_from_vectors(vx: NeighbourWeightVector,
                            vy: NeighbourWeightVector,
                            relation_types: Sequence[str],
                            now: int) -> SimilarityResult:
    per_beta = {relation_type: similarity_of(vx.of(relation_type), vy.of(relation_type))
                for relation_type in relation_types}
    return SimilarityResult(x=vx.character,
                            y=vy.character,
                            per_beta=per_beta,
                            value=aggregate(list(per_beta.values()), len(relation_types)),
                            now=now,
                            subnetwork_count=len(relation_types))


def default_now(bundle: NetworkBundle) -> int:
    if bundle.now is not None:
        return bundle.now
    max_end = bundle.max_end()
    return max_end if max_end is not None else 0


@logger.with_perf_log(name="score_pairs")
def score_pairs(bundle: NetworkBundle,
                pairs: Iterable[tuple[VertexId, VertexId]],
                now: int,
                workers: int = 1) -> list[SimilarityResult]:
    pairs = sorted(tuple(sorted(pair)) for pair in pairs)
    for vertex_id in sorted({v for pair in pairs for v in pair}):
        bundle.character(vertex_id)
    context = {'vectors': {v: neighbour_weights(bundle, v, now) for v in sorted({v for pair in pairs for v in pair})},
               'relation_types': bundle.relation_types,
               'now': now}
    return parallel.map_chunks(_score_chunk, pairs, context=context, workers=workers)


def threshold_groups(candidates: CandidateSet,
                     bundle: NetworkBundle,
                     theta: float,
                     now: int,
                     workers: int = 1) -> RedundantGroupSet:
    """
    Scores every candidate pair, keeps those with SimTAP ≥ θ and groups them as the connected components of the kept
    pairs, so the result is independent of candidate order.
    """
    if not (0.0 < theta <= 1.0):
        raise error.InvalidThreshold(message=f"theta must be in (0, 1], got {theta}", ctx={'theta': theta})
    results = score_pairs(bundle, candidates.pair_ids(), now, workers)
    components = UnionFind()
    for result in results:
        if result.value >= theta:
            components.union(result.x, result.y)
    groups = sorted(tuple(sorted(group)) for group in components.to_sets())
    logger.info("Redundant groups formed", ctx={'candidates': len(results),
                                                'groups': len(groups),
                                                'theta': theta,
                                                'now': now})
    return RedundantGroupSet(groups=tuple(groups), theta=theta, now=now, similarities=tuple(results))


def divergent_pairs(results: Iterable[SimilarityResult], theta: float) -> list[SimilarityResult]:
    """
    Pairs scoring at or above θ although they have nothing in common in at least one subnetwork.  A high mean over the
    other activity types hides an entirely different history in that one.
    """
    return [r for r in results if r.value >= theta and any(v == 0.0 for v in r.per_beta.values())]


def similarity_columns(bundle: NetworkBundle) -> list[str]:
    return ["x_id", "x_name", "y_id", "y_name", *bundle.relation_types, "simtap"]


def similarity_rows(bundle: NetworkBundle, results: Iterable[SimilarityResult]) -> list[dict]:
    fmt = TapConfig().fmt
    return [{"x_id": r.x,
             "x_name": bundle.vertices[r.x].display_name,
             "y_id": r.y,
             "y_name": bundle.vertices[r.y].display_name,
             **{relation_type: fmt(value) for relation_type, value in r.per_beta.items()},
             "simtap": fmt(r.value)}
            for r in results]


def divergent_rows(bundle: NetworkBundle, results: Iterable[SimilarityResult]) -> list[dict]:
    fmt = TapConfig().fmt
    return [{"x_id": r.x,
             "x_name": bundle.vertices[r.x].display_name,
             "y_id": r.y,
             "y_name": bundle.vertices[r.y].display_name,
             "zero_subnetworks": ";".join(b for b, v in r.per_beta.items() if v == 0.0),
             "simtap": fmt(r.value)}
            for r in results]


def _score_chunk(context: dict, chunk) -> list[SimilarityResult]:
    vectors = context['vectors']
    return [similarity_from_vectors(vectors[x], vectors[y], context['relation_types'], context['now'])
            for x, y in chunk]
