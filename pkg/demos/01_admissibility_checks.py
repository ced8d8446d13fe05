"""Exact admissibility checks for Sobolev exponent arithmetic.

Every check below runs in exact rational arithmetic and returns a
certificate: the full list of inequalities that were tested, with exact
left/right sides, so boundary cases (equality against a strict or
non-strict inequality) are decided without any floating point.
"""

from fractions import Fraction

from sobolev.exponents import (
    DomainClass, check_derivative, check_embedding, check_multiplication,
    check_pointwise, space,
)


def show(title, verdict):
    print(f"\n== {title}")
    print(f"   result: {verdict.result}"
          + (f"  (via {verdict.theorem_tag})" if verdict.theorem_tag else ""))
    for c in verdict.conditions:
        mark = "ok " if c.satisfied else "FAIL"
        print(f"   [{mark}] {c.text}:  {c.lhs} {c.relation} {c.rhs}")


# A classical Sobolev embedding on the whole space: W^{2,2} -> W^{1,4}
# in two dimensions.  The balance s - n/p >= t - n/q reads 1 >= 1/2.
show("embedding, whole space",
     check_embedding(space(2, 2, 2), space(1, 4, 2)))

# The same exponents over an arbitrary open set: no encoded result
# applies (the fractional chain breaks down without boundary regularity).
show("embedding, general open set",
     check_embedding(space(2, 2, 2, DomainClass.GENERAL_OPEN),
                     space(1, 4, 2, DomainClass.GENERAL_OPEN)))

# Pointwise multiplication W^{1,2} x W^{1,2} -> L^2 in three dimensions.
show("multiplication",
     check_multiplication(space(1, 2, 3), space(1, 2, 3), space(0, 2, 3)))

# A boundary case decided exactly: s*p = n is rejected by the strict
# inequality of the algebra threshold.
show("Banach algebra exactly at the threshold",
     check_pointwise(space(1, 2, 2), "algebra"))
show("Banach algebra above the threshold",
     check_pointwise(space(Fraction(9, 8), 2, 2), "algebra"))

# Differentiation drops the smoothness order; on a Lipschitz domain the
# exceptional set s - 1/p integral is excluded.
show("derivative of W^{3/2,2} on a Lipschitz domain, order 2",
     check_derivative(space("3/2", 2, 1, DomainClass.BOUNDED_LIPSCHITZ), 2))
show("derivative of W^{4/3,2} on a Lipschitz domain, order 2",
     check_derivative(space("4/3", 2, 1, DomainClass.BOUNDED_LIPSCHITZ), 2))
