"""Quadratic Dirichlet L-functions over the family d = 8m, their derivatives,
real zeros of L', a random multiplicative model, and family-scale experiments.

Subpackages are organized by object: `characters` (the family and chi_d),
`lfunc` (certified evaluation of L, Lambda, L', -L'/L), `randmodel` (the
random multiplicative model), `selberg` (weighted Dirichlet polynomials),
`zeros` (certified zero counts and circle covers), `fekete` (Fekete
polynomials and Mellin identities), `stats` (family experiments), and
`harness` (configuration, caching, CLI drivers).
"""

__version__ = "0.1.0"

CODE_VERSION_TAG = "ldzeros-" + __version__
