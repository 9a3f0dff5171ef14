"""Exact symbolic calculus for dg operads and Maurer-Cartan twisting.

Everything is computed over the rationals with exact arithmetic; every
structural identity (d^2 = 0, contracting homotopies, chain maps) is
verified by expanding both sides to canonical form and comparing.
"""

from fractions import Fraction as Rational

__all__ = ["Rational"]
