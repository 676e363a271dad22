"""
Exception hierarchy shared by all GermCalc modules.

Negative mathematical verdicts are returned as values; these exceptions signal
violated preconditions and usage errors.
"""


class GermCalcError(Exception):
    """Base class for all engine errors."""

    code = "germcalc_error"


class FieldMismatchError(GermCalcError):
    """Arithmetic between scalars of different coefficient fields."""

    code = "field_mismatch"


class EmbeddingError(GermCalcError):
    """No canonical embedding between two coefficient fields."""

    code = "no_embedding"


class ConfigurationBoundError(GermCalcError):
    """A configured bound (cyclotomic order, group size, ...) was exceeded."""

    code = "bound_exceeded"


class JetError(GermCalcError):
    """Constant-term or arity precondition of a jet operation violated."""

    code = "jet_precondition"


class AmbientMismatchError(GermCalcError):
    """Objects living in different ambients (n, field) were combined."""

    code = "ambient_mismatch"


class SingularLinearPartError(GermCalcError):
    """A diffeomorphism jet has a non-invertible linear part."""

    code = "singular_linear_part"


class SingularMatrixError(GermCalcError):
    code = "singular_matrix"


class NotUnipotentError(GermCalcError):
    code = "not_unipotent"


class NonNilpotentFlowError(GermCalcError):
    """Polynomial-in-t flows need a nilpotent linear part."""

    code = "non_nilpotent_flow"


class EigenvalueFieldError(GermCalcError):
    """Eigenvalues of a linear part do not lie in the coefficient field."""

    code = "eigenvalues_outside_field"


class ResonanceError(GermCalcError):
    code = "resonance"


class TwistedEquationError(GermCalcError):
    code = "twisted_equation"


class BranchMatchError(GermCalcError):
    code = "branch_match"


class ResidueActionError(GermCalcError):
    code = "residue_action"


class NotInIsoError(GermCalcError):
    code = "not_in_iso"


class NotInCentralizerError(GermCalcError):
    code = "not_in_centralizer"

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class HolonomyError(GermCalcError):
    """Integration along a loop failed (path hits F = 0, step underflow)."""

    code = "holonomy"


class TangencyUndefinedError(GermCalcError):
    code = "tangency_undefined"


class NonHomogeneousError(GermCalcError):
    code = "non_homogeneous"


class UnknownScenarioError(GermCalcError):
    code = "unknown_scenario"


class DSLParseError(GermCalcError):
    """Lexical or syntax error in DSL source, positioned at line:col."""

    code = "parse_error"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class DSLEvalError(GermCalcError):
    """Type or arity error while evaluating a parsed DSL expression."""

    code = "eval_error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class FormDegreeError(GermCalcError):
    """Operation undefined for the degree of the given form."""

    code = "form_degree"


class UsageError(GermCalcError):
    """Malformed command line or request arguments."""

    code = "usage"
