"""Shared test helpers: independent oracles and record fuzzing.

The equality oracle here is a plain exhaustive backtracking search over all
node and relationship bijections, with none of the type/degree pruning the
library uses; it exists to check the production matcher against first
principles.
"""

from __future__ import annotations

import numpy as np

from docrec.records import (
    Node,
    Record,
    RecordSchema,
    RelationshipNode,
    canonical_record,
    node_equal,
)


def brute_force_equal(r1: Record, r2: Record, schema: RecordSchema, eps: float) -> bool:
    if len(r1.nodes) != len(r2.nodes) or len(r1.relationships) != len(r2.relationships):
        return False
    n = len(r1.nodes)
    o = len(r1.relationships)

    def rel_compatible(a: RelationshipNode, b: RelationshipNode, node_map) -> bool:
        if a.rel_type != b.rel_type or a.dprops != b.dprops:
            return False
        if any(abs(x - y) > eps for x, y in zip(a.cprops, b.cprops)):
            return False
        mapped = [node_map[e] for e in a.endpoints]
        if schema.rel_types[a.rel_type].symmetric:
            return sorted(mapped) == sorted(b.endpoints)
        return tuple(mapped) == b.endpoints

    def match_rels(i: int, used: list[bool], node_map) -> bool:
        if i == o:
            return True
        for j in range(o):
            if used[j] or not rel_compatible(r1.relationships[i], r2.relationships[j], node_map):
                continue
            used[j] = True
            if match_rels(i + 1, used, node_map):
                return True
            used[j] = False
        return False

    def match_nodes(i: int, used: list[bool], node_map: list[int]) -> bool:
        if i == n:
            return match_rels(0, [False] * o, node_map)
        for j in range(n):
            if used[j] or not node_equal(r1.nodes[i], r2.nodes[j], eps):
                continue
            used[j] = True
            node_map[i] = j
            if match_nodes(i + 1, used, node_map):
                return True
            used[j] = False
        return False

    return match_nodes(0, [False] * len(r1.nodes), [-1] * n)


def permuted_record(record: Record, schema: RecordSchema, rng: np.random.Generator) -> Record:
    """The same record with node and relationship order shuffled (endpoints
    remapped through the node permutation)."""
    n = len(record.nodes)
    perm = rng.permutation(n)
    inverse = np.argsort(perm)
    nodes = tuple(record.nodes[int(i)] for i in perm)
    rels = [
        RelationshipNode(r.rel_type, tuple(int(inverse[e]) for e in r.endpoints), r.dprops, r.cprops)
        for r in record.relationships
    ]
    order = rng.permutation(len(rels))
    rels = tuple(rels[int(i)] for i in order)
    return canonical_record(Record(nodes, rels), schema)


def jitter_record(record: Record, rng: np.random.Generator, amount: float) -> Record:
    """Shift every continuous property by a uniform offset up to +-amount."""
    nodes = []
    for node in record.nodes:
        cprops = tuple(
            float(np.clip(v + rng.uniform(-amount, amount), 0.0, 1.0)) for v in node.cprops
        )
        nodes.append(Node(node.node_type, node.dprops, cprops))
    return Record(tuple(nodes), record.relationships)


def mutate_record(record: Record, schema: RecordSchema, rng: np.random.Generator) -> Record:
    """One structural or property defect, the kind a wrong prediction makes."""
    choice = int(rng.integers(4))
    nodes = list(record.nodes)
    rels = list(record.relationships)
    if choice == 0 and nodes:  # drop a node (and the relationships touching it)
        k = int(rng.integers(len(nodes)))
        nodes.pop(k)
        rels = [
            RelationshipNode(r.rel_type, tuple(e - (e > k) for e in r.endpoints), r.dprops, r.cprops)
            for r in rels
            if k not in r.endpoints
        ]
    elif choice == 1 and nodes:  # corrupt a discrete property
        k = int(rng.integers(len(nodes)))
        node = nodes[k]
        if node.dprops:
            slot = int(rng.integers(len(node.dprops)))
            vocab = len(schema.node_types[node.node_type].discrete[slot].values)
            dprops = list(node.dprops)
            dprops[slot] = (dprops[slot] + 1 + int(rng.integers(vocab - 1))) % vocab
            nodes[k] = Node(node.node_type, tuple(dprops), node.cprops)
        else:
            nodes[k] = Node(node.node_type, node.dprops,
                            tuple(min(1.0, v + 0.1) for v in node.cprops))
    elif choice == 2 and nodes:  # move a coordinate well past any tolerance
        k = int(rng.integers(len(nodes)))
        node = nodes[k]
        if node.cprops:
            c = list(node.cprops)
            slot = int(rng.integers(len(c)))
            c[slot] = float(np.clip(c[slot] + 0.2, 0.0, 1.0))
            nodes[k] = Node(node.node_type, node.dprops, tuple(c))
    elif rels:  # rewire a relationship
        k = int(rng.integers(len(rels)))
        r = rels[k]
        e = list(r.endpoints)
        e[int(rng.integers(len(e)))] = int(rng.integers(len(nodes)))
        rels[k] = RelationshipNode(r.rel_type, tuple(e), r.dprops, r.cprops)
    return canonical_record(Record(tuple(nodes), tuple(rels)), schema)
