"""Sobolev-Slobodeckij norms on boxes and compact manifolds.

Exact rational admissibility checks for the classical embedding,
multiplication, differentiation, extension and composition results,
plus numerical norms via midpoint quadrature: Lebesgue norms, the
singular Gagliardo double integral, chart/partition-of-unity norms on
built-in manifolds, connection norms, and local differential operators.

Submodules: ``exponents``, ``funcexpr``, ``quadrature``, ``atlas``,
``geometry``, ``manifold_norms``, ``operators``, ``cli``.
"""

__version__ = "0.1.0"
