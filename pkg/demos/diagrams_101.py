"""
Decision diagrams with aggregation
==================================

Build a small diagram over an inventory state, evaluate it two ways,
and shrink it with a focus-set reduction.
"""
from fractions import Fraction

from gfoddplan import AVG, MAX, If, Var, atom, build, eval_brute, eval_ve, to_text
from gfoddplan.apply import apply_open, max_expr
from gfoddplan.evaluate import count_substitutions
from gfoddplan.model import builtin
from gfoddplan.reduce import reduce_with_report

ic = builtin("ic")

# Two shops, s1 is out of stock, the loaded truck waits at the depot.
state = ic.interpretation(2, [("empty", "s1"), ("tin", "t1", "d1"), ("loaded", "t1")])

# "Pick the best truck, then average over shops": full shops are worth 1,
# an empty shop is worth 1/10 if the truck is standing in it.
t, s = Var("t", "truck"), Var("s", "shop")
f = build([(t, MAX), (s, AVG)],
          If(atom("empty", s), If(atom("tin", t, s), Fraction(1, 10), 0), 1))
print(to_text(f))

# Both evaluators return the value, the winning truck, and the edges they used.
for method in (eval_brute, eval_ve):
    r = method(f, state)
    print(method.__name__, r.value, {v.name: c.name for v, c in r.winner.items()}, sorted(r.edges))
print("substitutions enumerated by brute force:", count_substitutions(f, state))

# Reduction keeps the edges some focus state uses and sends the rest to 0.
g, removed = reduce_with_report(f, [state])
print("removed edges:", removed)
print(to_text(g))

# Adding a constant to an average distributes over it, but max does not:
# max(1/2, avg) needs the equality-node construction.
half = build([], Fraction(1, 2))
print("f + 1/2 =", eval_ve(apply_open("add", f, half), state).value)
print("max(f, 1/2) =", eval_ve(max_expr(f, half, "shop"), state).value)
