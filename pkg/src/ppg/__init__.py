"""Exact-arithmetic toolkit for unipotent quotients of pro-p coproducts.

Subpackages:

- rings: Z/p^m and F_p arithmetic, linear solver, F_p rank
- unipotent: the groups U_{n+1}(Z/p^m), their Frattini structure and projections
- magnus: truncated Magnus expansion, mildness certificates, cup pairing
- presentations: Demushkin / free factors, coproducts, homomorphism checks
- massey: the lifting solver, witnesses and their independent verification
- numtheory: signatures, splitting scans, rank formula, abelianization check
- cli: the `ppg` command line front end
"""

__version__ = "0.1.0"
