"""Orders over shape sets: linear orders with ties, modified Kendall tau, partial orders."""

from dataclasses import dataclass

from .grid import ShapeError
from .ioutil import atomic_write_text


@dataclass(frozen=True)
class LinearOrder:
    """Equality groups ascending in complexity; gaps between groups exceed the tolerance."""

    groups: tuple          # tuple of tuples of shape ids
    group_values: tuple    # representative (mean) value per group
    tolerance: float

    def ranks(self) -> dict:
        return {sid: i for i, grp in enumerate(self.groups) for sid in grp}


@dataclass(frozen=True)
class PartialOrder:
    """Product order over indicator vectors: A <= B iff A is no larger on every indicator."""

    ids: tuple
    classes: tuple             # equivalence classes (tuples of ids), deterministic order
    dominance: frozenset       # pairs (a, b) with a <= b, over ids, reflexive
    hasse_edges: tuple         # (class_index, class_index) transitive reduction edges
    incomparable_pairs: tuple  # id pairs (a, b), a < b lexicographically


def _group_by_gap(items, tolerance):
    """Single-linkage grouping of (id, value) sorted by value: split where the gap > tolerance."""
    items = sorted(items, key=lambda kv: (kv[1], kv[0]))
    groups = []
    cur = [items[0]]
    for sid, val in items[1:]:
        if val - cur[-1][1] > tolerance:
            groups.append(cur)
            cur = []
        cur.append((sid, val))
    groups.append(cur)
    ids = tuple(tuple(sid for sid, _ in g) for g in groups)
    vals = tuple(sum(v for _, v in g) / len(g) for g in groups)
    return ids, vals


def order_at_scale(profiles, t_star: float, estimator: str = "entropy",
                   tolerance: float = 1e-9) -> LinearOrder:
    """Sort shapes by the estimator at each profile's level nearest to t_star."""
    if not profiles:
        raise ShapeError("order_at_scale needs at least one profile")
    if not 0.0 < t_star <= 1.0:
        raise ShapeError("t_star must lie in (0, 1]")
    if len({p.bins for p in profiles}) > 1:
        raise ShapeError("profiles were computed with different bin counts")
    items = []
    for prof in profiles:
        diffs = [abs(t - t_star) for t in prof.t_values]
        best = min(range(len(diffs)), key=lambda i: (diffs[i], i))
        items.append((prof.shape_id, float(prof.values(estimator)[best])))
    ids, vals = _group_by_gap(items, tolerance)
    return LinearOrder(ids, vals, tolerance)


def order_by_indicator(indicators, tolerance: float = 1e-9) -> LinearOrder:
    if not indicators:
        raise ShapeError("order_by_indicator needs at least one indicator")
    ids, vals = _group_by_gap([(ind.shape_id, ind.value) for ind in indicators], tolerance)
    return LinearOrder(ids, vals, tolerance)


def modified_kendall_tau(expected, observed: dict, tolerance: float = 1e-9) -> float:
    """Pairwise concordance in [-1, 1]; observed ties count +1 regardless of the expected order.

    `expected` is a strict order (LinearOrder without ties, or a sequence of
    ids ascending in complexity); `observed` maps id -> value.
    """
    if isinstance(expected, LinearOrder):
        if any(len(g) != 1 for g in expected.groups):
            raise ShapeError("expected order must be strict (no ties)")
        order = [g[0] for g in expected.groups]
    else:
        order = list(expected)
    if len(set(order)) != len(order):
        raise ShapeError("expected order must not repeat ids")
    if set(order) != set(observed):
        raise ShapeError("expected and observed ids differ")
    if len(order) < 2:
        raise ShapeError("need at least two ids")
    rank = {sid: i for i, sid in enumerate(order)}
    total = 0
    npairs = 0
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            npairs += 1
            dv = observed[b] - observed[a]
            if abs(dv) <= tolerance:
                total += 1
            elif (dv > 0) == (rank[b] > rank[a]):
                total += 1
            else:
                total -= 1
    return total / npairs


def partial_order(table: dict, tolerance: float = 1e-9) -> PartialOrder:
    """Dominance over shape-indexed indicator vectors (same indicator set for all shapes)."""
    if not table:
        raise ShapeError("partial_order needs at least one shape")
    ids = tuple(sorted(table))
    width = len(next(iter(table.values())))
    if width < 1:
        raise ShapeError("need at least one indicator per shape")
    vec = {}
    for sid in ids:
        v = tuple(float(x) for x in table[sid])
        if len(v) != width:
            raise ShapeError("ragged indicator table")
        vec[sid] = v

    def dominates(a, b):
        return all(x <= y + tolerance for x, y in zip(vec[a], vec[b]))

    dom = frozenset((a, b) for a in ids for b in ids if dominates(a, b))

    # mutual dominance collapses ids into classes
    classes = []
    assigned = {}
    for sid in ids:
        for ci, cls in enumerate(classes):
            rep = cls[0]
            if (sid, rep) in dom and (rep, sid) in dom:
                classes[ci] = cls + [sid]
                assigned[sid] = ci
                break
        else:
            assigned[sid] = len(classes)
            classes.append([sid])
    classes = tuple(tuple(c) for c in classes)

    def strict(ci, cj):
        a, b = classes[ci][0], classes[cj][0]
        return ci != cj and (a, b) in dom and (b, a) not in dom

    ncls = len(classes)
    edges = []
    for i in range(ncls):
        for j in range(ncls):
            if strict(i, j) and not any(strict(i, k) and strict(k, j) for k in range(ncls)):
                edges.append((i, j))

    incomparable = tuple((a, b) for i, a in enumerate(ids) for b in ids[i + 1:]
                         if (a, b) not in dom and (b, a) not in dom)
    return PartialOrder(ids, classes, dom, tuple(sorted(edges)), incomparable)


def emit_hasse(po: PartialOrder, path) -> None:
    """DOT text: one node per equivalence class, one edge per Hasse edge (simple -> complex)."""
    def label(cls):
        return "|".join(cls)

    lines = ["digraph hasse {", "  rankdir=BT;"]
    for cls in sorted(po.classes, key=label):
        lines.append(f'  "{label(cls)}";')
    for i, j in sorted(po.hasse_edges, key=lambda e: (label(po.classes[e[0]]),
                                                      label(po.classes[e[1]]))):
        lines.append(f'  "{label(po.classes[i])}" -> "{label(po.classes[j])}";')
    lines.append("}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def order_to_csv(order: LinearOrder, path) -> None:
    lines = ["rank,group_members,value"]
    for rank, (grp, val) in enumerate(zip(order.groups, order.group_values)):
        lines.append(f"{rank},{'|'.join(grp)},{val:.12g}")
    atomic_write_text(path, "\n".join(lines) + "\n")
