"""Property-graph records: schemas, nodes, equality, dissimilarity, serialization.

A record is the complete structured content of a document: a list of typed
nodes carrying discrete properties (indices into finite vocabularies) and
continuous properties (normalized coordinates in [0, 1], stored flat as
x, y per point), plus relationship nodes that reference record nodes by
index.  Everything in this module is an immutable value; all operations are
pure functions and safe to call concurrently.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

SEQUENCE = "sequence"
SET = "set"
GRAPH = "graph"
STRUCTURES = (SEQUENCE, SET, GRAPH)


class SchemaError(ValueError):
    """A value does not conform to its declared schema."""


class ParseError(ValueError):
    """Malformed record text. ``offset`` is the byte offset of the defect."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class DiscreteProp:
    """A discrete property slot with a finite label vocabulary (size >= 2)."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise SchemaError(f"discrete property {self.name!r} needs >= 2 values")
        if len(set(self.values)) != len(self.values):
            raise SchemaError(f"discrete property {self.name!r} has duplicate values")


@dataclass(frozen=True)
class PointProp:
    """A continuous coordinate pair; occupies two scalar slots (x then y)."""

    name: str


@dataclass(frozen=True)
class NodeType:
    name: str
    discrete: tuple[DiscreteProp, ...] = ()
    points: tuple[PointProp, ...] = ()


@dataclass(frozen=True)
class RelationType:
    """A relationship vocabulary entry.

    ``arity`` endpoints reference record nodes by index.  ``symmetric``
    relations carry no endpoint order; they are stored with endpoints sorted
    ascending and compared as such.
    """

    name: str
    arity: int = 2
    symmetric: bool = False
    discrete: tuple[DiscreteProp, ...] = ()
    points: tuple[PointProp, ...] = ()

    def __post_init__(self):
        if self.arity < 1:
            raise SchemaError(f"relation type {self.name!r} needs arity >= 1")


@dataclass(frozen=True)
class RecordSchema:
    """Per-domain registry of node types, relationship types, and bounds.

    ``max_nodes`` bounds the node count and doubles as the identifier
    vocabulary for endpoint prediction.  ``canvas`` is the (height, width)
    of the rendered page; width None means variable width.
    """

    name: str
    structure: str
    node_types: tuple[NodeType, ...]
    rel_types: tuple[RelationType, ...] = ()
    max_nodes: int = 32
    canvas: tuple[int, int | None] | None = None

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise SchemaError(f"unknown structure {self.structure!r}")
        names = [t.name for t in self.node_types] + [t.name for t in self.rel_types]
        if len(set(names)) != len(names):
            raise SchemaError("node/relation type names must be unique")
        if self.max_nodes < 1:
            raise SchemaError("max_nodes must be positive")
        if self.rel_types and self.structure != GRAPH:
            raise SchemaError("relationship types require the graph structure")

    @property
    def n_node_types(self) -> int:
        return len(self.node_types)

    def node_type_index(self, name: str) -> int:
        for i, t in enumerate(self.node_types):
            if t.name == name:
                return i
        raise SchemaError(f"unknown node type {name!r}")

    def rel_type_index(self, name: str) -> int:
        for i, t in enumerate(self.rel_types):
            if t.name == name:
                return i
        raise SchemaError(f"unknown relation type {name!r}")

    def default_eps(self) -> float:
        """Coordinate tolerance: 4 pixels on the rendered canvas."""
        if self.canvas is None or self.canvas[1] is None:
            return 0.0
        return 4.0 / min(self.canvas[0], self.canvas[1])

    @property
    def eos_type(self) -> int:
        """Reserved property-less node type marking end of record."""
        return len(self.node_types)


@dataclass(frozen=True)
class Node:
    node_type: int
    dprops: tuple[int, ...] = ()
    cprops: tuple[float, ...] = ()


@dataclass(frozen=True)
class RelationshipNode:
    rel_type: int
    endpoints: tuple[int, ...]
    dprops: tuple[int, ...] = ()
    cprops: tuple[float, ...] = ()


@dataclass(frozen=True)
class Record:
    nodes: tuple[Node, ...] = ()
    relationships: tuple[RelationshipNode, ...] = ()


def eos_node(schema: RecordSchema) -> Node:
    return Node(node_type=schema.eos_type)


def validate_node(node: Node, schema: RecordSchema) -> None:
    if not 0 <= node.node_type < len(schema.node_types):
        raise SchemaError(f"node type index {node.node_type} out of range")
    spec = schema.node_types[node.node_type]
    if len(node.dprops) != len(spec.discrete):
        raise SchemaError(f"{spec.name}: expected {len(spec.discrete)} discrete props")
    for v, p in zip(node.dprops, spec.discrete):
        if not 0 <= v < len(p.values):
            raise SchemaError(f"{spec.name}.{p.name}: value index {v} out of range")
    if len(node.cprops) != 2 * len(spec.points):
        raise SchemaError(f"{spec.name}: expected {2 * len(spec.points)} coordinate scalars")
    for v in node.cprops:
        if not 0.0 <= v <= 1.0:
            raise SchemaError(f"{spec.name}: coordinate {v} outside [0, 1]")


def validate_record(record: Record, schema: RecordSchema) -> None:
    """Raise SchemaError unless the record conforms to the schema."""
    if len(record.nodes) > schema.max_nodes:
        raise SchemaError(f"{len(record.nodes)} nodes exceed max_nodes={schema.max_nodes}")
    for node in record.nodes:
        validate_node(node, schema)
    for rel in record.relationships:
        if not 0 <= rel.rel_type < len(schema.rel_types):
            raise SchemaError(f"relation type index {rel.rel_type} out of range")
        spec = schema.rel_types[rel.rel_type]
        if len(rel.endpoints) != spec.arity:
            raise SchemaError(f"{spec.name}: expected {spec.arity} endpoints")
        for e in rel.endpoints:
            if not 0 <= e < len(record.nodes):
                raise SchemaError(f"{spec.name}: endpoint {e} references no node")
        if len(rel.dprops) != len(spec.discrete):
            raise SchemaError(f"{spec.name}: expected {len(spec.discrete)} discrete props")
        for v, p in zip(rel.dprops, spec.discrete):
            if not 0 <= v < len(p.values):
                raise SchemaError(f"{spec.name}.{p.name}: value index {v} out of range")
        if len(rel.cprops) != 2 * len(spec.points):
            raise SchemaError(f"{spec.name}: expected {2 * len(spec.points)} coordinate scalars")


def canonical_record(record: Record, schema: RecordSchema) -> Record:
    """Sort the endpoints of symmetric relationships ascending."""
    rels = []
    for rel in record.relationships:
        if schema.rel_types[rel.rel_type].symmetric:
            rel = RelationshipNode(rel.rel_type, tuple(sorted(rel.endpoints)), rel.dprops, rel.cprops)
        rels.append(rel)
    return Record(record.nodes, tuple(rels))


# ---------------------------------------------------------------------------
# Equality


def _props_equal(a_d, b_d, a_c, b_c, eps: float) -> bool:
    if a_d != b_d:
        return False
    return all(abs(x - y) <= eps for x, y in zip(a_c, b_c))


def node_equal(a: Node, b: Node, eps: float) -> bool:
    """True iff types and discrete props match and every continuous prop
    differs by at most ``eps`` (absolute)."""
    if a.node_type != b.node_type:
        return False
    if len(a.dprops) != len(b.dprops) or len(a.cprops) != len(b.cprops):
        raise SchemaError("nodes of the same type disagree on property arity")
    return _props_equal(a.dprops, b.dprops, a.cprops, b.cprops, eps)


def _rel_props_equal(a: RelationshipNode, b: RelationshipNode, eps: float) -> bool:
    if a.rel_type != b.rel_type:
        return False
    if len(a.dprops) != len(b.dprops) or len(a.cprops) != len(b.cprops):
        raise SchemaError("relationships of the same type disagree on property arity")
    return _props_equal(a.dprops, b.dprops, a.cprops, b.cprops, eps)


def _endpoints_match(mapped: tuple[int, ...], target: tuple[int, ...], symmetric: bool) -> bool:
    if symmetric:
        return sorted(mapped) == sorted(target)
    return mapped == target


def _match_relationships(
    rels1, rels2, node_map: list[int], schema: RecordSchema, eps: float
) -> bool:
    """Backtracking search for a relationship bijection consistent with the
    node bijection ``node_map`` (index in r1 -> index in r2)."""
    used = [False] * len(rels2)

    def extend(i: int) -> bool:
        if i == len(rels1):
            return True
        r1 = rels1[i]
        mapped = tuple(node_map[e] for e in r1.endpoints)
        symmetric = schema.rel_types[r1.rel_type].symmetric
        for j, r2 in enumerate(rels2):
            if used[j] or not _rel_props_equal(r1, r2, eps):
                continue
            if not _endpoints_match(mapped, r2.endpoints, symmetric):
                continue
            used[j] = True
            if extend(i + 1):
                return True
            used[j] = False
        return False

    return extend(0)


def _degree_key(record: Record, n: int) -> int:
    return sum(1 for rel in record.relationships for e in rel.endpoints if e == n)


def record_equal(
    r1: Record,
    r2: Record,
    schema: RecordSchema,
    eps: float | None = None,
    ordered: bool | None = None,
) -> bool:
    """Exact record equality up to ``eps`` on continuous properties.

    ``ordered`` compares node lists pairwise by position (the sequence
    structure); otherwise a backtracking isomorphism search looks for node
    and relationship bijections preserving node equality, relationship
    equality, and endpoint structure.  Candidates are pruned by node type
    and degree; records here stay small (<= max_nodes), so the search is
    cheap in practice.
    """
    if eps is None:
        eps = schema.default_eps()
    if ordered is None:
        ordered = schema.structure == SEQUENCE
    if len(r1.nodes) != len(r2.nodes) or len(r1.relationships) != len(r2.relationships):
        return False

    if ordered:
        if not all(node_equal(a, b, eps) for a, b in zip(r1.nodes, r2.nodes)):
            return False
        for a, b in zip(r1.relationships, r2.relationships):
            if not _rel_props_equal(a, b, eps):
                return False
            if not _endpoints_match(a.endpoints, b.endpoints, schema.rel_types[a.rel_type].symmetric):
                return False
        return True

    n = len(r1.nodes)
    # Candidate lists per r1 node, pruned by type (and implicitly by
    # node_equal); processing order: rarest candidate set and highest degree
    # first to fail fast.
    candidates = [
        [j for j in range(n) if r1.nodes[i].node_type == r2.nodes[j].node_type
         and node_equal(r1.nodes[i], r2.nodes[j], eps)]
        for i in range(n)
    ]
    if any(not c for c in candidates):
        return False
    order = sorted(range(n), key=lambda i: (len(candidates[i]), -_degree_key(r1, i)))

    node_map = [-1] * n
    used = [False] * n

    def assign(k: int) -> bool:
        if k == n:
            return _match_relationships(r1.relationships, r2.relationships, node_map, schema, eps)
        i = order[k]
        for j in candidates[i]:
            if used[j]:
                continue
            node_map[i] = j
            used[j] = True
            if assign(k + 1):
                return True
            used[j] = False
            node_map[i] = -1
        return False

    return assign(0)


# ---------------------------------------------------------------------------
# Predictions and dissimilarity


@dataclass(frozen=True)
class NodePrediction:
    """Per-position output distributions.

    ``type_dist`` covers all node types plus EOS as the final entry.
    ``discrete_dists`` holds one probability vector per discrete slot
    (padded to the schema's maximum discrete arity).  ``coord_dists`` holds
    one (patch distribution, in-patch pixel distribution) pair per
    coordinate point; ``coord_points`` are the reconstructed scalars, two
    per point.
    """

    type_dist: np.ndarray
    discrete_dists: tuple[np.ndarray, ...] = ()
    coord_dists: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    coord_points: tuple[float, ...] = ()

    def validate(self, tol: float = 1e-6) -> None:
        dists = [self.type_dist, *self.discrete_dists]
        for p, q in self.coord_dists:
            dists += [p, q]
        for d in dists:
            if np.any(np.asarray(d) < 0):
                raise ValueError("negative probability in prediction")
            if abs(float(np.sum(d)) - 1.0) > tol:
                raise ValueError("prediction distribution does not sum to 1")


def node_dissimilarity(target: Node, pred: NodePrediction) -> float:
    """Cross-entropy on type and discrete slots plus squared error on
    reconstructed coordinates.  An EOS target (the reserved property-less
    type) contributes only the type term."""
    loss = -math.log(max(float(pred.type_dist[target.node_type]), 1e-300))
    for k, v in enumerate(target.dprops):
        loss += -math.log(max(float(pred.discrete_dists[k][v]), 1e-300))
    for c, v in enumerate(target.cprops):
        loss += (v - pred.coord_points[c]) ** 2
    return loss


# ---------------------------------------------------------------------------
# Serialization

_FORMAT_VERSION = 1


def _node_to_dict(node: Node, schema: RecordSchema) -> dict:
    spec = schema.node_types[node.node_type]
    return {
        "type": spec.name,
        "dprops": [spec.discrete[k].values[v] for k, v in enumerate(node.dprops)],
        "cprops": list(node.cprops),
    }


def _rel_to_dict(rel: RelationshipNode, schema: RecordSchema) -> dict:
    spec = schema.rel_types[rel.rel_type]
    return {
        "type": spec.name,
        "endpoints": list(rel.endpoints),
        "dprops": [spec.discrete[k].values[v] for k, v in enumerate(rel.dprops)],
        "cprops": list(rel.cprops),
    }


def serialize_record(record: Record, schema: RecordSchema) -> bytes:
    """One-line JSON document; floats keep full round-trip precision."""
    doc = {
        "schema": schema.name,
        "nodes": [_node_to_dict(n, schema) for n in record.nodes],
        "relationships": [_rel_to_dict(r, schema) for r in record.relationships],
    }
    return json.dumps(doc, separators=(", ", ": ")).encode("utf-8")


def _value_index(spec: DiscreteProp, label, offset: int) -> int:
    label = str(label)
    try:
        return spec.values.index(label)
    except ValueError:
        raise ParseError(f"unknown value {label!r} for property {spec.name!r}", offset) from None


def parse_record(data: bytes | str, schema: RecordSchema) -> Record:
    """Inverse of serialize_record.  Raises ParseError with the byte offset
    for malformed text, SchemaError for records that violate the schema."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.pos) from None
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object")
    if doc.get("schema") != schema.name:
        raise ParseError(f"record schema {doc.get('schema')!r} != {schema.name!r}")

    nodes = []
    for item in doc.get("nodes", ()):
        t = schema.node_type_index(item["type"])
        spec = schema.node_types[t]
        dprops = tuple(_value_index(spec.discrete[k], v, 0) for k, v in enumerate(item.get("dprops", ())))
        nodes.append(Node(t, dprops, tuple(float(v) for v in item.get("cprops", ()))))
    rels = []
    for item in doc.get("relationships", ()):
        t = schema.rel_type_index(item["type"])
        spec = schema.rel_types[t]
        dprops = tuple(_value_index(spec.discrete[k], v, 0) for k, v in enumerate(item.get("dprops", ())))
        rels.append(RelationshipNode(
            t,
            tuple(int(v) for v in item["endpoints"]),
            dprops,
            tuple(float(v) for v in item.get("cprops", ())),
        ))
    record = Record(tuple(nodes), tuple(rels))
    validate_record(record, schema)
    return record
