"""padesk: desk-scale exact verification toolkit.

Subpackages cover arithmetic in ramified p-adic chain rings (chainring),
polynomials/series over truncated Witt vectors (padpoly), constructive
order isomorphisms (orderiso), 2x2 matrix groups over finite chain rings
(matgrp), finite-group cohomology dimensions (groupcoh), local Galois
cohomology dimension formulas (localcoh), Selmer dimension bookkeeping
(selmer), and a scenario-running CLI (cli).
"""

__version__ = "0.1.0"
