"""Exception hierarchy.

Every error carries a machine-readable ``code`` used by the CLI's error JSON.
"""


class ConleyError(Exception):
    code = "error"

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class SystemSpecError(ConleyError, ValueError):
    code = "invalid_system"


class UnknownFamily(SystemSpecError):
    code = "unknown_family"


class NonFiniteImage(ConleyError, ArithmeticError):
    code = "non_finite_image"


class BudgetExceeded(ConleyError):
    code = "budget"


class DigraphOnly(ConleyError):
    """Geometric operation requested on a map without a grid."""

    code = "digraph_only"


class GridMismatch(ConleyError, ValueError):
    code = "grid_mismatch"


class NotIsolating(ConleyError, ValueError):
    code = "not_isolating"


class NotABlock(ConleyError, ValueError):
    code = "not_a_block"


class RefineRequired(ConleyError):
    """No admissible block or pair at the current resolution; raise the depth."""

    code = "refine"

    def to_json(self) -> dict:
        out = super().to_json()
        out["suggestion"] = "increase --depth"
        return out


class DegeneratePair(RefineRequired):
    """The exit collar swallowed part of the invariant set."""

    code = "degenerate_pair"

    def __init__(self, message: str, overlap=()):
        super().__init__(message)
        self.overlap = sorted(overlap)


class InvalidPair(ConleyError, ValueError):
    code = "invalid_pair"


class NonrectangularImage(ConleyError):
    code = "nonrectangular_image"

    def to_json(self) -> dict:
        out = super().to_json()
        out["suggestion"] = "increase --depth"
        return out


class CarrierNotAcyclic(ConleyError):
    code = "carrier_not_acyclic"


class ShapeMismatch(ConleyError, ValueError):
    code = "shape_mismatch"


class InvalidWitness(ConleyError, ValueError):
    code = "invalid_witness"


class NotIntertwining(ConleyError, ValueError):
    code = "not_intertwining"


class NotAnInterval(ConleyError, ValueError):
    code = "not_an_interval"


class NotAttracting(ConleyError, ValueError):
    code = "not_attracting"


class NotAttractingInterval(NotAttracting):
    code = "not_attracting_interval"


class DefectiveFiltration(ConleyError):
    code = "defective_filtration"

    def __init__(self, message: str, witnesses=()):
        super().__init__(message)
        self.witnesses = list(witnesses)

    def to_json(self) -> dict:
        out = super().to_json()
        out["witnesses"] = self.witnesses
        return out
