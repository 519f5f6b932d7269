"""Independent checks of a rebalanced database.

verify_cyclic_balanced checks shape: right nodes, equal per-node storage,
every segment on exactly its run of consecutive nodes, replicas bit-identical.

verify_preservation checks meaning: every target segment's payload equals the
concatenation of the original atoms it is supposed to carry (recomputed from
the content generator, never from engine bookkeeping), and the targets
together cover every original atom exactly once.

Both return findings that name the offending node and segment, so a single
suppressed broadcast or flipped bit is traceable. The fault hooks at the
bottom produce tampered copies for exercising that.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bus import TransmissionLog
from .errors import ParameterError
from .model import (
    AtomRange,
    Database,
    SegmentLabel,
    StoredPiece,
    SystemParams,
    segment_content,
    slice_atoms,
    storage_set,
)
from .removal_merge import MergeRecipe
from .addition import AdditionPlan

Finding = tuple[str, str]  # (category, message)

_CATEGORIES = ("balance", "cyclicity", "replication", "content")


@dataclass(frozen=True)
class VerificationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def _clean(self, category: str) -> bool:
        return all(cat != category for cat, _ in self.findings)

    @property
    def is_balanced(self) -> bool:
        return self._clean("balance")

    @property
    def is_cyclic(self) -> bool:
        return self._clean("cyclicity")

    @property
    def replication_ok(self) -> bool:
        return self._clean("replication")

    @property
    def content_ok(self) -> bool:
        return self._clean("content")

    def merged(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport(self.findings + other.findings)


def verify_cyclic_balanced(db: Database, expected: SystemParams) -> VerificationReport:
    """Shape check against an expected (node count, replication, segment bits)."""
    n, r, seg_bits = expected.n_nodes, expected.replication, expected.segment_bits
    w = db.params.atom_bits
    findings: list[Finding] = []

    nodes = set(db.contents)
    if nodes != set(range(1, n + 1)):
        findings.append(("cyclicity", f"node set {sorted(nodes)} is not 1..{n}"))

    holders: dict[int, list[int]] = {}
    for node in sorted(nodes):
        items = db.contents[node]
        total_bits = 0
        for label, piece in items.items():
            if not isinstance(label, SegmentLabel) or label.generation != db.generation:
                findings.append(("cyclicity", f"node {node} stores stray item {label!r}"))
                continue
            holders.setdefault(label.index, []).append(node)
            total_bits += piece.n_atoms * w
            if piece.n_atoms * w != seg_bits:
                findings.append(
                    (
                        "balance",
                        f"node {node} segment {label.index} has {piece.n_atoms * w} bits, "
                        f"expected {seg_bits}",
                    )
                )
        if total_bits != r * seg_bits:
            findings.append(
                ("balance", f"node {node} stores {total_bits} bits, expected {r * seg_bits}")
            )

    if set(holders) != set(range(1, n + 1)):
        findings.append(
            ("cyclicity", f"segment set {sorted(holders)} is not 1..{n}")
        )
    for index in sorted(holders):
        where = holders[index]
        if len(where) != r:
            findings.append(
                ("replication", f"segment {index} stored on {len(where)} nodes, expected {r}")
            )
        want = storage_set(index, n, r) if 1 <= index <= n else frozenset()
        if set(where) != want:
            findings.append(
                (
                    "cyclicity",
                    f"segment {index} on nodes {sorted(where)}, expected {sorted(want)}",
                )
            )
        label = SegmentLabel(index, db.generation)
        reference_node = min(where)
        reference = db.stored(reference_node, label)
        for node in sorted(where):
            piece = db.stored(node, label)
            if piece is not None and reference is not None and piece.bits != reference.bits:
                findings.append(
                    (
                        "content",
                        f"segment {index} replicas differ between node {reference_node} "
                        f"and node {node}",
                    )
                )
    return VerificationReport(tuple(findings))


@dataclass(frozen=True)
class ExpectedTarget:
    """What one target segment should contain and where it should live."""

    index: int
    holders: tuple[int, ...]
    parts: tuple[AtomRange, ...]


def removal_expected_layout(recipes: tuple[MergeRecipe, ...]) -> tuple[ExpectedTarget, ...]:
    return tuple(
        ExpectedTarget(
            index=rec.target.index,
            holders=rec.holders,
            parts=tuple((p.origin, p.atom_start, p.atom_stop) for p in rec.parts),
        )
        for rec in recipes
    )


def addition_expected_layout(plan: AdditionPlan) -> tuple[ExpectedTarget, ...]:
    params = plan.params
    k, r = params.n_nodes, params.replication
    kept_atoms = plan.kept[0].size_atoms
    out = [
        ExpectedTarget(
            index=i,
            holders=tuple(sorted(storage_set(i, k + 1, r))),
            parts=((i, 0, kept_atoms),),
        )
        for i in range(1, k + 1)
    ]
    out.append(
        ExpectedTarget(
            index=k + 1,
            holders=tuple(sorted(storage_set(k + 1, k + 1, r))),
            parts=tuple((i, kept_atoms, params.segment_atoms) for i in range(1, k + 1)),
        )
    )
    return tuple(out)


def verify_preservation(
    final: Database,
    expected: tuple[ExpectedTarget, ...],
    params: SystemParams,
    seed: int,
) -> VerificationReport:
    """Content check: every target holds exactly its original atoms, all atoms kept."""
    w = params.atom_bits
    orig_bits = params.segment_atoms * w
    findings: list[Finding] = []

    coverage: dict[int, list[tuple[int, int]]] = {i: [] for i in range(1, params.n_nodes + 1)}
    for tgt in expected:
        want = 0
        offset = 0
        for origin, start, stop in tgt.parts:
            src = segment_content(seed, origin, orig_bits)
            want |= slice_atoms(src, start, stop, w) << (offset * w)
            offset += stop - start
            coverage[origin].append((start, stop))
        label = SegmentLabel(tgt.index, "target")
        for node in tgt.holders:
            piece = final.stored(node, label)
            if piece is None:
                findings.append(
                    ("content", f"node {node} is missing target segment {tgt.index}")
                )
            elif piece.n_atoms != offset or piece.bits != want:
                findings.append(
                    (
                        "content",
                        f"node {node} target segment {tgt.index} payload does not match "
                        f"its source atoms",
                    )
                )

    for origin in sorted(coverage):
        spans = sorted(coverage[origin])
        cursor = 0
        for start, stop in spans:
            if start != cursor:
                findings.append(
                    (
                        "content",
                        f"origin segment {origin} atoms [{cursor}:{start}] "
                        f"{'duplicated' if start < cursor else 'lost'} across targets",
                    )
                )
            cursor = max(cursor, stop)
        if cursor != params.segment_atoms:
            findings.append(
                (
                    "content",
                    f"origin segment {origin} atoms [{cursor}:{params.segment_atoms}] "
                    f"lost across targets",
                )
            )
    return VerificationReport(tuple(findings))


def drop_broadcast(log: TransmissionLog, index: int) -> TransmissionLog:
    """Tampered copy of a log with one broadcast suppressed."""
    if not 0 <= index < len(log.broadcasts):
        raise ParameterError(f"broadcast index {index} outside the log")
    kept = [b for i, b in enumerate(log.broadcasts) if i != index]
    return TransmissionLog(params=log.params, broadcasts=kept)


def flip_stored_bit(db: Database, node: int, segment_index: int, bit: int) -> Database:
    """Tampered copy of a database with one stored bit inverted."""
    label = SegmentLabel(segment_index, db.generation)
    piece = db.stored(node, label)
    if piece is None:
        raise ParameterError(f"node {node} does not store segment {segment_index}")
    width = piece.n_atoms * db.params.atom_bits
    if not 0 <= bit < width:
        raise ParameterError(f"bit {bit} outside [0, {width})")
    flipped = StoredPiece(
        label=piece.label,
        n_atoms=piece.n_atoms,
        bits=piece.bits ^ (1 << bit),
        provenance=piece.provenance,
    )
    contents = {n: dict(items) for n, items in db.contents.items()}
    contents[node][label] = flipped
    return Database(
        params=db.params,
        seed=db.seed,
        n_nodes=db.n_nodes,
        generation=db.generation,
        segment_atoms=db.segment_atoms,
        contents=contents,
    )


def reorder_replica_parts(db: Database, node: int, segment_index: int) -> Database:
    """Tampered copy with the first two recorded parts of one replica swapped."""
    label = SegmentLabel(segment_index, db.generation)
    piece = db.stored(node, label)
    if piece is None:
        raise ParameterError(f"node {node} does not store segment {segment_index}")
    if len(piece.provenance) < 2:
        raise ParameterError(f"segment {segment_index} has fewer than two parts")
    w = db.params.atom_bits
    sizes = [stop - start for _, start, stop in piece.provenance]
    a, b = sizes[0], sizes[1]
    first = slice_atoms(piece.bits, 0, a, w)
    second = slice_atoms(piece.bits, a, a + b, w)
    rest = piece.bits >> ((a + b) * w)
    swapped = second | (first << (b * w)) | (rest << ((a + b) * w))
    prov = (piece.provenance[1], piece.provenance[0]) + piece.provenance[2:]
    contents = {n: dict(items) for n, items in db.contents.items()}
    contents[node][label] = StoredPiece(
        label=piece.label, n_atoms=piece.n_atoms, bits=swapped, provenance=prov
    )
    return Database(
        params=db.params,
        seed=db.seed,
        n_nodes=db.n_nodes,
        generation=db.generation,
        segment_atoms=db.segment_atoms,
        contents=contents,
    )
