"""equires: exact engine for group actions resolved into quotient towers.

Takes a compact (abelian) group action described as combinatorial
stratification data, assembles the resolution tower over the quotient, and
computes, by exact rational linear algebra:

  * cohomology twisted by flat Borel-fiber local systems over the tower,
  * delocalized cohomology with representation-ring coefficients,
  * reduced K-theory as an equalizer of windowed representation modules,
  * the coefficient-level Chern character between the last two.

All arithmetic is exact (arbitrary-precision rationals); there is no
floating point anywhere in the engine.
"""

__version__ = "0.1.0"
