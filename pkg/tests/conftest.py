"""Shared builders for randomized tree tests."""

import numpy as np

from planset.tree import SearchTree, ValueMode


def random_backprop_tree(
    rng: np.random.Generator,
    max_nodes: int = 60,
    max_actions: int = 3,
    extra_playouts: int = 10,
    value_mode: ValueMode | None = None,
) -> SearchTree:
    """Grow a tree through add_child/backpropagate only.

    Every node receives at least one playout (deposited at itself when
    created), so all nodes are visited and extraction sees the whole tree.
    Rewards are continuous uniforms, which keeps q-value ties measure-zero.
    """
    if value_mode is None:
        value_mode = ValueMode.MAX if rng.random() < 0.5 else ValueMode.AVERAGE
    n_actions = int(rng.integers(1, max_actions + 1))
    tree = SearchTree(b"s0", value_mode, root_actions=range(n_actions))
    tree.backpropagate(tree.root, float(rng.random()))
    target = int(rng.integers(1, max_nodes + 1))
    expandable = [tree.root]
    while len(tree.nodes) < target and expandable:
        idx = int(rng.integers(len(expandable)))
        parent = expandable[idx]
        rec = tree.node(parent)
        if not rec.untried_actions:
            expandable.pop(idx)
            continue
        action = rec.untried_actions[int(rng.integers(len(rec.untried_actions)))]
        terminal = rng.random() < 0.15
        child_actions = () if terminal else range(int(rng.integers(0, max_actions + 1)))
        child = tree.add_child(parent, action, f"s{len(tree.nodes)}".encode(), terminal, child_actions)
        tree.backpropagate(child, float(rng.random()))
        if not terminal:
            expandable.append(child)
    for _ in range(extra_playouts):
        tree.backpropagate(int(rng.integers(len(tree.nodes))), float(rng.random()))
    return tree


def leaf_deposit_tree(
    rng: np.random.Generator,
    max_nodes: int = 40,
    max_actions: int = 3,
    playouts: int = 60,
) -> SearchTree:
    """Grow the structure first, then deposit playouts only at leaves.

    Internal nodes carry no self-terminated mass, so their averages are
    exact visit-weighted child averages.
    """
    value_mode = ValueMode.MAX if rng.random() < 0.5 else ValueMode.AVERAGE
    n_actions = int(rng.integers(1, max_actions + 1))
    tree = SearchTree(b"s0", value_mode, root_actions=range(n_actions))
    target = int(rng.integers(1, max_nodes + 1))
    expandable = [tree.root]
    while len(tree.nodes) < target and expandable:
        idx = int(rng.integers(len(expandable)))
        parent = expandable[idx]
        rec = tree.node(parent)
        if not rec.untried_actions:
            expandable.pop(idx)
            continue
        action = rec.untried_actions[int(rng.integers(len(rec.untried_actions)))]
        child_actions = range(int(rng.integers(0, max_actions + 1)))
        child = tree.add_child(parent, action, f"s{len(tree.nodes)}".encode(), False, child_actions)
        expandable.append(child)
    leaves = [nid for nid in range(len(tree.nodes)) if not tree.node(nid).children]
    for leaf in leaves:  # every node must end up visited
        tree.backpropagate(leaf, float(rng.random()))
    for _ in range(playouts):
        tree.backpropagate(leaves[int(rng.integers(len(leaves)))], float(rng.random()))
    return tree


def random_root_path(rng: np.random.Generator, tree: SearchTree) -> list[int]:
    """A random root-to-somewhere path over visited children."""
    path = [tree.root]
    while True:
        kids = tree.visited_children(path[-1])
        if not kids or rng.random() < 0.2:
            return path
        path.append(kids[int(rng.integers(len(kids)))])


def tree_depth(tree: SearchTree) -> int:
    """Max root-to-leaf edge count over visited nodes."""
    depth = {tree.root: 0}
    best = 0
    for nid in tree.iter_visited():
        if nid == tree.root:
            continue
        parent = tree.node(nid).parent
        if parent in depth:
            depth[nid] = depth[parent] + 1
            best = max(best, depth[nid])
    return best


def assert_matches_oracle(extracted, oracle, k, tol=1e-12):
    """Extracted plans must equal the oracle prefix up to exact-quality ties.

    ``oracle`` is the already-q-filtered (plan, quality) list; ``extracted``
    a list of Plans.  Qualities must agree pairwise within ``tol`` and the
    plans must match as sets inside each exact-tie group (the cut-off group
    may legitimately contribute any subset of its members).
    """
    import math

    expected = oracle[: None if k == math.inf else int(k)]
    assert len(extracted) == len(expected), (
        f"got {len(extracted)} plans, oracle says {len(expected)}"
    )
    for mine, (_, quality) in zip(extracted, expected):
        assert abs(mine.relative_quality - quality) <= tol
    mine_groups: dict[float, set] = {}
    for plan in extracted:
        mine_groups.setdefault(plan.relative_quality, set()).add(plan.nodes)
    ref_groups: dict[float, set] = {}
    for plan, quality in expected:
        ref_groups.setdefault(quality, set()).add(plan.nodes)
    full_ref: dict[float, set] = {}
    for plan, quality in oracle:
        full_ref.setdefault(quality, set()).add(plan.nodes)
    assert {q: len(v) for q, v in mine_groups.items()} == {
        q: len(v) for q, v in ref_groups.items()
    }, "tie-group sizes differ from the oracle"
    for quality, mine in mine_groups.items():
        # any subset of an exact-tie group is legitimate at the k boundary;
        # combined with the size check this forces equality off the boundary
        assert mine <= full_ref[quality], "extracted a plan the oracle does not rank here"
