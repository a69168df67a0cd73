"""Exception hierarchy.

Every error carries a short ``tag`` so that callers (the CLI in particular)
can map failures onto stable exit codes without string matching.
"""


class AlgebraError(ValueError):
    tag = "algebra"


class DimensionError(AlgebraError):
    tag = "dim"


class WatermarkError(AlgebraError):
    tag = "watermark"


class NotInvertibleError(AlgebraError):
    tag = "not-invertible"


class OrderError(AlgebraError):
    tag = "order"


class BranchError(AlgebraError):
    tag = "branch"


class ParameterError(AlgebraError):
    tag = "param"


class NonAbelianGaugeError(AlgebraError):
    tag = "nonabelian-gauge"


class GradeError(AlgebraError):
    tag = "grade"


class ShapeError(AlgebraError):
    tag = "shape"


class VerificationError(AlgebraError):
    """A post-condition checked by the engine itself did not hold."""

    tag = "verify"
