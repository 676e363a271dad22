"""
Pydantic models for command reports, API requests and responses.

Every command of the CLI and of the HTTP surface answers with a CommandReport
whose `result` is one of the report models below. Exact objects are rendered
in the expression language, so a report can be pasted back as input.
"""

from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator


# ============================================================================
# Building blocks
# ============================================================================

class ScalarText(BaseModel):
    """A field element: its canonical DSL text plus a complex approximation."""

    text: str = Field(..., description="Canonical DSL rendering, e.g. zeta3 or (1/2 + i)")
    real: float = Field(..., description="Real part under the principal embedding")
    imag: float = Field(..., description="Imaginary part under the principal embedding")
    exact: bool = Field(..., description="Whether the value is an exact field element")


class ExpressionText(BaseModel):
    """Any DSL-renderable object: function, form, vector field, map or logarithmic form."""

    kind: Literal["scalar", "function", "form", "vector_field", "map", "logform"] = Field(
        ..., description="Object type"
    )
    text: str = Field(..., description="Canonical DSL rendering")
    order: Optional[int] = Field(None, description="Effective truncation order N")
    degree: Optional[int] = Field(None, description="Form degree p, for differential forms")
    zero: Optional[bool] = Field(None, description="Whether the object vanishes to its order")


# ============================================================================
# Differential calculus reports
# ============================================================================

class IntegrabilityReportModel(BaseModel):
    """Frobenius integrability test of a 1-form or a decomposed p-form."""

    integrable: bool = Field(..., description="Whether every residual vanishes")
    order: int = Field(..., description="Effective order of the residuals")
    residuals: List[ExpressionText] = Field(default_factory=list, description="Nonzero residual forms")
    decomposes: Optional[bool] = Field(None, description="Whether the factors wedge to the given p-form")


class FormReportModel(BaseModel):
    """Result of a computation producing one object."""

    value: ExpressionText = Field(..., description="Computed object")
    certificates: Dict[str, ExpressionText] = Field(
        default_factory=dict, description="Residuals certifying the result (all zero when it holds)"
    )


class FixVerdictModel(BaseModel):
    status: Literal["yes", "no", "unknown"] = Field(..., description="Fix membership verdict")
    reason: str = Field(..., description="Branch of the decision procedure that produced the verdict")
    generator: Optional[ExpressionText] = Field(None, description="log(Phi) or log of its unipotent part")
    factor: Optional[ExpressionText] = Field(None, description="Integrating factor i_X(omega) when transverse")
    closedness: Optional[ExpressionText] = Field(None, description="Certificate f d(omega) - df ^ omega")


class IsoVerdictModel(BaseModel):
    """Membership of Phi in Iso(F) and, optionally, in Fix(F)."""

    member: bool = Field(..., description="Whether Phi^* Omega = u Omega for a unit u")
    cofactor: Optional[ExpressionText] = Field(None, description="The cofactor u")
    cofactor_constant: Optional[ScalarText] = Field(None, description="u when it is a constant")
    failed_degree: Optional[int] = Field(None, description="First degree at which the graded solve failed")
    fix: Optional[FixVerdictModel] = Field(None, description="Fix(F) verdict, when requested")
    certificates: Dict[str, ExpressionText] = Field(default_factory=dict, description="Residual forms")


# ============================================================================
# Diffeomorphism reports
# ============================================================================

class FlowReportModel(BaseModel):
    """exp(tX) of a formal vector field."""

    polynomial: Optional[str] = Field(None, description="exp(tX) with polynomial-in-t coefficients")
    t_degree: Optional[int] = Field(None, description="Largest t-degree occurring")
    t_degree_bound: Optional[int] = Field(None, description="A priori t-degree bound")
    t: Optional[ScalarText] = Field(None, description="Time at which the flow was evaluated")
    evaluated: Optional[ExpressionText] = Field(None, description="exp(tX) at the requested t")


class ResonantTermModel(BaseModel):
    degree: int = Field(..., description="Total degree of the monomial")
    component: int = Field(..., description="Component index (1-based)")
    exponent: List[int] = Field(..., description="Monomial exponent")
    coefficient: ScalarText = Field(..., description="Coefficient in the normal form")


class JordanReportModel(BaseModel):
    """phi = phi_S o phi_U with phi_S linearizable and phi_U unipotent."""

    semisimple: ExpressionText = Field(..., description="phi_S")
    unipotent: ExpressionText = Field(..., description="phi_U")
    conjugator: ExpressionText = Field(..., description="G with G^-1 o phi_S o G linear diagonal")
    eigenvalues: List[ScalarText] = Field(..., description="Eigenvalues of the linear part")
    resonant_terms: List[ResonantTermModel] = Field(default_factory=list, description="Surviving resonant terms")
    commute: bool = Field(..., description="Whether phi_S and phi_U commute")
    residual_zero: bool = Field(..., description="Whether phi_S o phi_U reproduces phi")


class IntegratingFactorModel(BaseModel):
    factor: Optional[ExpressionText] = Field(None, description="Polynomial integrating factor f")
    degree_bound: int = Field(..., description="Degree bound actually searched")
    solution_dimension: int = Field(..., description="Dimension of the solution space")
    closed: Optional[bool] = Field(None, description="Whether d(omega / f) = 0 to the effective order")
    homogeneous_factor: Optional[ExpressionText] = Field(
        None, description="i_R omega, for homogeneous non-conical forms"
    )


class ResidueActionModel(BaseModel):
    residues: List[ScalarText] = Field(..., description="Residues lambda_j")
    alpha: ScalarText = Field(..., description="Exceptional residue sum k_j lambda_j")
    first_integral: Literal["holomorphic", "meromorphic", "none", "assumed_none"] = Field(
        ..., description="Existence of a first integral prod f_j^a_j"
    )
    ratios: List[Optional[str]] = Field(default_factory=list, description="lambda_j / lambda_1 when rational")
    permutation: Optional[List[int]] = Field(None, description="sigma (1-based) with f_sigma(i) o Phi divisible by f_i")
    constant: Optional[ScalarText] = Field(None, description="C with lambda_sigma(i) = C lambda_i")
    cycle_length: Optional[int] = Field(None, description="Length of the cycle of sigma through branch 1")


class BlowupReportModel(BaseModel):
    multiplicities: List[int] = Field(..., description="Vanishing orders k_j of the branches along x = 0")
    strict_transforms: List[str] = Field(default_factory=list, description="Strict transforms f_j o Pi / x^k_j")
    alpha: Optional[ScalarText] = Field(None, description="Residue of the exceptional divisor")
    pulled: ExpressionText = Field(..., description="Pulled-back holomorphic form in the chart")
    chart_form: Optional[str] = Field(None, description="Chart logarithmic form")
    closed: Optional[bool] = Field(None, description="Whether closedness is preserved")
    shape_holds: Optional[bool] = Field(None, description="Whether the pullback has the chart logarithmic shape")
    precision: int = Field(..., description="x-adic precision of the chart jets")
    chart: int = Field(1, description="Chart index (variable placed first before blowing up)")


class NormalFormModel(BaseModel):
    kind: Literal["regular", "simple_pole", "higher_pole"] = Field(..., description="Model type")
    model: str = Field(..., description="Model form")
    change: ExpressionText = Field(..., description="Coordinate change x_hat(x)")
    residual_zero: bool = Field(..., description="Whether the change pulls the model back to the input")
    m: Optional[int] = Field(None, description="Vanishing order of the regular model")
    residue: Optional[ScalarText] = Field(None, description="Residue of the pole models")
    centralizer: Optional["CentralizerModel"] = Field(None, description="Centralizer verdict, when requested")


class CentralizerModel(BaseModel):
    kind: Literal["regular", "simple_pole", "higher_pole"] = Field(..., description="Model type")
    preserves: bool = Field(..., description="Whether h preserves the model")
    delta: Optional[ScalarText] = Field(None, description="Root-of-unity factor")
    rho: Optional[ScalarText] = Field(None, description="Linear factor of the simple-pole centralizer")
    t: Optional[ScalarText] = Field(None, description="Flow time of the higher-pole centralizer")


NormalFormModel.model_rebuild()


# ============================================================================
# Numerical and group reports
# ============================================================================

class HolonomyReportModel(BaseModel):
    multiplier: List[float] = Field(..., description="h'(0) from the exponential integral, as [re, im]")
    fitted_multiplier: List[float] = Field(..., description="h'(0) from the fitted jet, as [re, im]")
    coefficients: List[List[float]] = Field(..., description="Fitted jet coefficients a_0..a_N as [re, im]")
    tangency_order: Optional[int] = Field(None, description="Least k >= 2 with a_k != 0, when h'(0) = 1")
    ramified: Optional[bool] = Field(None, description="Whether h(x) = x g(x^r) for the requested r")
    diagnostics: Dict[str, float] = Field(default_factory=dict, description="Integrator and fit diagnostics")


class LieElementModel(BaseModel):
    matrix: List[List[str]] = Field(..., description="Matrix A")
    scalars: List[str] = Field(..., description="c_j with X_A(h_j) = c_j h_j")


class RigidityReportModel(BaseModel):
    dimension: int = Field(..., description="Dimension of the isotropy Lie algebra")
    degrees: List[int] = Field(..., description="Degrees of the polynomials")
    basis: List[LieElementModel] = Field(default_factory=list, description="Basis of the Lie algebra")
    contains_identity: bool = Field(..., description="Whether the identity lies in the algebra")
    bracket_closed: bool = Field(..., description="Whether brackets stay in the isotropy")
    rigid_infinitesimal: bool = Field(..., description="Whether the algebra is spanned by the identity")
    rigid_assumed: bool = Field(..., description="Infinitesimally rigid and no permutation isotropy found")
    permutations: List[List[int]] = Field(default_factory=list, description="Non-identity permutation isotropies")
    permutation_search_complete: bool = Field(..., description="Whether all n! permutations were tried")


class FactModel(BaseModel):
    claim: str = Field(..., description="Checked statement")
    status: Literal["pass", "fail", "assumption"] = Field(..., description="Outcome")
    detail: str = Field("", description="Supporting values")


class ScenarioTranscriptModel(BaseModel):
    id: str = Field(..., description="Scenario identifier")
    description: str = Field(..., description="One-line description")
    passed: bool = Field(..., description="Whether no checked fact failed")
    checked: int = Field(..., description="Number of checked (non-assumption) facts")
    objects: Dict[str, str] = Field(default_factory=dict, description="Objects built, in DSL form")
    facts: List[FactModel] = Field(default_factory=list, description="Checked facts and assumptions")
    data: Dict[str, Any] = Field(default_factory=dict, description="Computed values")


class ScenarioListModel(BaseModel):
    scenarios: Dict[str, str] = Field(..., description="Scenario id to description")


ResultModel = Union[
    IntegrabilityReportModel,
    FormReportModel,
    IsoVerdictModel,
    FixVerdictModel,
    FlowReportModel,
    JordanReportModel,
    IntegratingFactorModel,
    ResidueActionModel,
    BlowupReportModel,
    NormalFormModel,
    HolonomyReportModel,
    RigidityReportModel,
    ScenarioTranscriptModel,
    ScenarioListModel,
]


# ============================================================================
# Envelope
# ============================================================================

class CommandReport(BaseModel):
    """Envelope shared by the CLI (--json) and the HTTP surface."""

    command: str = Field(..., description="Subcommand name")
    ok: bool = Field(..., description="False when a mathematical verdict is negative")
    verdict: Optional[bool] = Field(None, description="The command's verdict, when it has one")
    field: str = Field(..., description="Coefficient field spec")
    n_vars: int = Field(..., description="Number of variables")
    order: int = Field(..., description="Requested truncation order")
    warnings: List[str] = Field(default_factory=list, description="Precision losses and assumptions")
    result: ResultModel = Field(..., description="Command-specific report")


# ============================================================================
# API Models
# ============================================================================

class CommandRequest(BaseModel):
    """Request body of POST /api/commands/{command}: CLI-style arguments after the subcommand."""

    args: List[str] = Field(default_factory=list, description="Arguments, e.g. ['--vars', '3', '--form', 'x*dy']")

    @field_validator("args")
    @classmethod
    def no_nested_json_flag(cls, v: List[str]) -> List[str]:
        return [a for a in v if a != "--json"]


class HealthCheck(BaseModel):
    """Health check response model."""

    status: Literal["healthy", "degraded", "unhealthy"] = Field(..., description="Service status")
    timestamp: datetime = Field(default_factory=datetime.now, description="Check timestamp")
    version: str = Field(..., description="Application version")
    settings: Dict[str, Any] = Field(default_factory=dict, description="Effective settings summary")


class ErrorResponse(BaseModel):
    """Standard error response model."""

    error: str = Field(..., description="Error code")
    message: str = Field(..., description="Error message")
    details: Optional[Dict[str, Any]] = Field(None, description="Additional error details, e.g. line and col")
    timestamp: datetime = Field(default_factory=datetime.now, description="Error timestamp")
