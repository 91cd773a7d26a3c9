"""Exception types shared across the package.

The CLI maps these onto exit codes: infeasibility guards (net caps,
enumeration explosion, dense-size guards) exit with 3, numerical failures
(annihilated states, empty DP lists, infeasible eigenspace selection)
exit with 4.
"""


class ShapeMismatchError(ValueError):
    """Tensor axes paired for contraction have unequal extents."""


class SizeGuardError(RuntimeError):
    """A dense computation would exceed its configured size guard."""


class NetSizeError(RuntimeError):
    """Grid candidate enumeration would exceed the candidate cap."""


class EmptyNetError(RuntimeError):
    """Every net candidate was removed by a filter step."""


class SchmidtRankError(RuntimeError):
    """A cut of the input state exceeds the bond-dimension cap in strict mode."""


class NoAdmissibleTransitionError(RuntimeError):
    """A DP site list is empty: no predecessor satisfies the stitching bound."""


class NoAdmissibleSequenceError(RuntimeError):
    """Brute-force enumeration found no sequence satisfying all stitching bounds."""


class AnnihilationError(RuntimeError):
    """A projector annihilated the state (norm below tolerance)."""


class NoFeasibleEigenspaceError(RuntimeError):
    """No eigenspace passes the weight threshold of the projection lemma."""


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""
