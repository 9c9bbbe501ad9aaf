"""Walk through plan-set extraction on a small hand-built search tree.

Builds the tree with explicit backpropagated playouts, then pulls out the
single best plan, the top-k set, a quality-bounded set, and a diverse set,
cross-checking everything against exhaustive enumeration.

Run:  python3 demos/plan_set_extraction_basics.py
"""

import math

from planset import (
    ExtractionConfig,
    SearchTree,
    ValueMode,
    brute_force_enumerate,
    extract_plans,
    relative_plan_quality,
)

# ---------------------------------------------------------------------------
# A tree with four routes of different value.  Rewards land in [0, 1]; node
# values are running averages of whatever was backpropagated through them.
#
#            root
#        /    |     \
#      a0     a1     a2
#      |      |    /    \
#     end    end  end   end
#
tree = SearchTree(b"start", ValueMode.AVERAGE, root_actions=[0, 1, 2])
left = tree.add_child(tree.root, 0, b"left", terminal=True)
mid = tree.add_child(tree.root, 1, b"mid", terminal=True)
right = tree.add_child(tree.root, 2, b"right", untried_actions=[0, 1])
for reward in (0.9, 0.9):
    tree.backpropagate(left, reward)
for reward in (0.6, 0.6):
    tree.backpropagate(mid, reward)
r_hi = tree.add_child(right, 0, b"right-hi", terminal=True)
r_lo = tree.add_child(right, 1, b"right-lo", terminal=True)
tree.backpropagate(r_hi, 0.8)
tree.backpropagate(r_lo, 0.4)

print("node values:")
for nid, name in [(left, "left"), (mid, "mid"), (right, "right"), (r_hi, "right-hi"), (r_lo, "right-lo")]:
    print(f"  {name:9s} visits={tree.node(nid).visits}  Q={tree.q_value(nid):.3f}")

# ---------------------------------------------------------------------------
# Relative quality: the product over path steps of (chosen child's value /
# best sibling's value).  The best path scores exactly 1.
print("\nrelative plan qualities:")
for path, name in [
    ([tree.root, left], "root->left"),
    ([tree.root, mid], "root->mid"),
    ([tree.root, right, r_hi], "root->right->hi"),
    ([tree.root, right, r_lo], "root->right->lo"),
]:
    print(f"  {name:16s} {relative_plan_quality(tree, path):.4f}")

# ---------------------------------------------------------------------------
# Exhaustive enumeration is the ground truth the extractor is tested against.
print("\nexhaustive ranking:")
for plan, quality in brute_force_enumerate(tree):
    print(f"  quality={quality:.4f}  nodes={plan.nodes}  states={sorted(plan.state_keys)}")

# ---------------------------------------------------------------------------
# The same queue-based extractor covers all three planning modes.
single = extract_plans(tree, ExtractionConfig(k=1))
print("\nsingle best plan:", single.plans[0].nodes, f"quality={single.plans[0].relative_quality:.4f}")

top2 = extract_plans(tree, ExtractionConfig(k=2))
print("top-2 qualities:", [round(p.relative_quality, 4) for p in top2.plans])

quality_bound = extract_plans(tree, ExtractionConfig(k=math.inf, q=0.8))
print("all plans with quality >= 0.8:", [p.nodes for p in quality_bound.plans])

# Diversity: fraction of a candidate's states the accepted set never visits.
# With d = 0.9 the second-best plan must be nearly disjoint from the first.
diverse = extract_plans(tree, ExtractionConfig(k=2, d=0.9))
print("diverse top-2 (d=0.9):")
for plan in diverse.plans:
    print(f"  quality={plan.relative_quality:.4f}  states={sorted(plan.state_keys)}")
