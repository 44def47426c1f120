from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from . import error, logger, structure
from .graph import NetworkBundle
from .graph_value import TemporalEdge, VertexId
from .structure import CandidateSet
from .tap import RedundantGroupSet

"""
Collapsing redundant character groups.

Planning reads a sealed bundle and decides, for every edge of every absorbed vertex, whether it is dropped (the
representative already holds the same (entity, β, interval) fact) or transferred to the representative.  Applying a
plan builds a fresh bundle; verifying compares the before and after bundles against the plan.
"""

DROP_AS_DUPLICATE = "drop-as-duplicate"
TRANSFER_TO_REPRESENTATIVE = "transfer-to-representative"


class MergePolicy(Enum):
    SMALLEST_ID = "smallest-id"
    MOST_ACTIVE = "most-active"

    def representative(self, bundle: NetworkBundle, group: Sequence[VertexId]) -> VertexId:
        match self:
            case MergePolicy.MOST_ACTIVE:
                return min(group, key=lambda v: (-len(bundle.edges_of(v)), v))
            case _:
                return min(group)


@dataclass(frozen=True)
class EdgeDisposition:
    relation_id: str
    absorbed: VertexId
    action: str


@dataclass(frozen=True)
class GroupPlan:
    representative: VertexId
    absorbed: tuple[VertexId, ...]
    dispositions: tuple[EdgeDisposition, ...]

    def transferred(self) -> list[EdgeDisposition]:
        return [d for d in self.dispositions if d.action == TRANSFER_TO_REPRESENTATIVE]

    def dropped(self) -> list[EdgeDisposition]:
        return [d for d in self.dispositions if d.action == DROP_AS_DUPLICATE]


@dataclass(frozen=True)
class MergePlan:
    groups: tuple[GroupPlan, ...]
    bundle_fingerprint: str
    policy: MergePolicy = MergePolicy.SMALLEST_ID

    def absorbed(self) -> list[VertexId]:
        return sorted(v for group in self.groups for v in group.absorbed)

    def mapping(self) -> dict[VertexId, VertexId]:
        return {v: group.representative for group in self.groups for v in group.absorbed}

    def is_empty(self) -> bool:
        return not self.groups


@dataclass
class MergedNetwork:
    bundle: NetworkBundle
    provenance: dict[VertexId, VertexId]
    aliases: dict[VertexId, list[str]]
    audit: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Violation:
    name: str
    ctx: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass
class VerificationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def names(self) -> list[str]:
        return [v.name for v in self.violations]

    def as_dict(self) -> dict:
        return {"ok": self.ok, "violations": [{"violation": v.name, **v.ctx} for v in self.violations]}


#
# Plan
#
def plan_merge(bundle: NetworkBundle,
               groups: RedundantGroupSet | Iterable[Sequence[VertexId]],
               policy: MergePolicy = MergePolicy.SMALLEST_ID) -> MergePlan:
    """
    Groups of one are skipped.  Absorbed vertices are processed in id order, and an absorbed edge whose fact is
    already held by the representative, or was already transferred from an earlier absorbed vertex, is dropped.
    """
    normalised = _checked_groups(bundle, groups.groups if isinstance(groups, RedundantGroupSet) else groups)
    plans = []
    for group in normalised:
        if len(group) < 2:
            continue
        representative = policy.representative(bundle, group)
        absorbed = tuple(v for v in group if v != representative)
        held = {edge.fact() for edge in bundle.edges_of(representative)}
        dispositions = []
        for vertex in absorbed:
            for edge in sorted(bundle.edges_of(vertex), key=lambda e: e.relation_id):
                if edge.fact() in held:
                    dispositions.append(EdgeDisposition(edge.relation_id, vertex, DROP_AS_DUPLICATE))
                else:
                    held.add(edge.fact())
                    dispositions.append(EdgeDisposition(edge.relation_id, vertex, TRANSFER_TO_REPRESENTATIVE))
        plans.append(GroupPlan(representative=representative, absorbed=absorbed, dispositions=tuple(dispositions)))
    return MergePlan(groups=tuple(plans), bundle_fingerprint=bundle.fingerprint(), policy=policy)


def _checked_groups(bundle: NetworkBundle, groups: Iterable[Sequence[VertexId]]) -> list[tuple[VertexId, ...]]:
    seen = {}
    normalised = []
    for group in groups:
        members = tuple(sorted(set(group)))
        if not members:
            raise error.InvalidGroup(message="empty merge group")
        for member in members:
            try:
                bundle.character(member)
            except error.GraphError as e:
                raise error.InvalidGroup(message=f"group member {member} is not a character of the bundle",
                                         ctx={'member': member, 'reason': e.message})
            if member in seen:
                raise error.OverlappingGroups(message=f"vertex {member} appears in more than one group",
                                              ctx={'member': member, 'groups': [list(seen[member]), list(members)]})
            seen[member] = members
        normalised.append(members)
    return sorted(normalised)


#
# Apply
#
@logger.with_perf_log(name="apply_merge")
def apply_merge(bundle: NetworkBundle, plan: MergePlan) -> MergedNetwork:
    if bundle.fingerprint() != plan.bundle_fingerprint:
        raise error.StalePlan(message="the bundle has changed since the merge plan was made",
                              ctx={'planned': plan.bundle_fingerprint, 'found': bundle.fingerprint()})
    merged = bundle.derive(exclude_vertices=plan.absorbed())
    transferred = dropped = 0
    for group in plan.groups:
        edges = {edge.relation_id: edge for v in group.absorbed for edge in bundle.edges_of(v)}
        for disposition in group.dispositions:
            if disposition.action == TRANSFER_TO_REPRESENTATIVE:
                edge = edges[disposition.relation_id].reassigned(group.representative)
                merged.add_edge(edge.character, edge.entity, edge.relation_type, edge.interval, edge.relation_id)
                transferred += 1
            else:
                dropped += 1
    mapping = plan.mapping()
    audit = {"removed_vertices": len(mapping),
             "dropped_edges": dropped,
             "transferred_edges": transferred,
             "mapping": dict(sorted(mapping.items()))}
    logger.info("Merge applied", ctx={k: v for k, v in audit.items() if k != "mapping"})
    return MergedNetwork(bundle=merged.seal(),
                         provenance={c.id: mapping.get(c.id, c.id) for c in bundle.characters()},
                         aliases=_aliases(bundle, plan),
                         audit=audit)


def _aliases(bundle: NetworkBundle, plan: MergePlan) -> dict[VertexId, list[str]]:
    aliases = {}
    for group in plan.groups:
        names = [bundle.vertices[v].display_name for v in sorted((group.representative, *group.absorbed))]
        aliases[group.representative] = list(dict.fromkeys(names))
    return aliases


#
# Verify
#
def verify_merge(before: NetworkBundle,
                 after: NetworkBundle,
                 plan: MergePlan,
                 candidates: CandidateSet | None = None) -> VerificationReport:
    """
    Checks a merge result against its plan:
    + vertex conservation: exactly the absorbed vertices are gone.
    + no edge refers to a missing vertex.
    + entity-side conservation: for every entity linked to a group, the representative's edges to it afterwards are
      the representative's own edges plus one edge per distinct fact the absorbed vertices added.
    + vertices outside every group keep exactly their edges.
    + structure error is still computable between surviving former candidates.
    """
    violations = []
    absorbed = set(plan.absorbed())
    expected_count = len(before.vertices) - len(absorbed)
    if len(after.vertices) != expected_count:
        violations.append(Violation("vertex count mismatch", {'expected': expected_count,
                                                              'found': len(after.vertices)}))
    violations.extend(Violation("absorbed vertex survives", {'vertex': v}) for v in sorted(absorbed)
                      if v in after.vertices)
    violations.extend(Violation("dangling edge", {'relation_id': e.relation_id})
                      for e in after.edges()
                      if e.character not in after.vertices or e.entity not in after.vertices)
    for group in plan.groups:
        violations.extend(_group_violations(before, after, group))
    violations.extend(_untouched_violations(before, after, plan))
    if candidates is not None:
        violations.extend(_recomputable_violations(after, candidates))
    report = VerificationReport(violations=violations)
    if not report.ok:
        logger.warn("Merge verification failed", ctx={'violations': report.names()})
    return report


def _group_violations(before: NetworkBundle, after: NetworkBundle, group: GroupPlan) -> list[Violation]:
    own = _facts_by_entity(before.edges_of(group.representative))
    added = defaultdict(set)
    for vertex in group.absorbed:
        for entity, facts in _facts_by_entity(before.edges_of(vertex)).items():
            added[entity].update(fact for fact in facts if fact not in own.get(entity, Counter()))
    expected = {entity: own.get(entity, Counter()) + Counter(added.get(entity, ()))
                for entity in sorted(own.keys() | added.keys())}
    found = _facts_by_entity(after.edges_of(group.representative)) if group.representative in after.vertices else {}
    violations = []
    for entity in sorted(expected.keys() | found.keys()):
        want, got = expected.get(entity, Counter()), found.get(entity, Counter())
        if sum(want.values()) != sum(got.values()):
            violations.append(Violation("neighbor degree mismatch", {'representative': group.representative,
                                                                     'entity': entity,
                                                                     'expected': sum(want.values()),
                                                                     'found': sum(got.values())}))
        if set(want) != set(got):
            violations.append(Violation("neighbor fact mismatch", {'representative': group.representative,
                                                                   'entity': entity}))
    return violations


def _facts_by_entity(edges: Iterable[TemporalEdge]) -> dict[VertexId, Counter]:
    facts = defaultdict(Counter)
    for edge in edges:
        facts[edge.entity][(edge.relation_type, edge.interval)] += 1
    return dict(facts)


def _untouched_violations(before: NetworkBundle, after: NetworkBundle, plan: MergePlan) -> list[Violation]:
    grouped = {v for group in plan.groups for v in (group.representative, *group.absorbed)}
    violations = []
    for character in before.characters():
        if character.id in grouped:
            continue
        if character.id not in after.vertices or after.vertices[character.id] != character:
            violations.append(Violation("untouched vertex changed", {'vertex': character.id}))
            continue
        if _edge_signature(before.edges_of(character.id)) != _edge_signature(after.edges_of(character.id)):
            violations.append(Violation("untouched vertex changed", {'vertex': character.id}))
    return violations


def _edge_signature(edges: Iterable[TemporalEdge]) -> list[tuple]:
    return sorted((e.relation_id, e.entity, e.relation_type, e.start, e.end) for e in edges)


def _recomputable_violations(after: NetworkBundle, candidates: CandidateSet) -> list[Violation]:
    violations = []
    for x, y in candidates.pair_ids():
        if x not in after.vertices or y not in after.vertices:
            continue
        try:
            value = structure.structure_error(after, x, y).value
            if not (0.0 <= value <= 1.0):
                raise ValueError(value)
        except (error.BaseError, ValueError):
            violations.append(Violation("structure error not recomputable", {'x': x, 'y': y}))
    return violations
