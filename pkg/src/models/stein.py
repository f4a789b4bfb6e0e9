"""Stein test functions and solution evaluations."""

import math
from enum import Enum
from typing import Callable, ClassVar, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TestFunctionKind(str, Enum):
    """Families of Stein test functions."""
    INDICATOR = "indicator"
    SCALED_SINE = "sine"
    IDENTITY = "identity"
    SQUARE = "square"
    CUSTOM = "custom"


class TestFunction(BaseModel):
    """A test function h with the norm metadata the Stein factors need.

    Indicator(z) is h(x) = 1(x ≤ z); ScaledSine(a) is h(x) = sin(ax)/a;
    Identity and Square are the polynomial oracles; Custom wraps a callable.
    """

    __test__: ClassVar[bool] = False

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: TestFunctionKind = Field(..., description="Test function family")
    z: Optional[float] = Field(None, description="Indicator threshold")
    a: Optional[float] = Field(None, gt=0.0, description="Sine frequency")
    func: Optional[Callable[[float], float]] = Field(None, exclude=True)
    derivative_func: Optional[Callable[[float], float]] = Field(None, exclude=True)
    sup_h: Optional[float] = Field(None, ge=0.0, description="Known sup|h| for Custom")
    lip_h: Optional[float] = Field(None, ge=0.0, description="Known sup|h'| for Custom")
    name: Optional[str] = Field(None, description="Label for Custom functions")

    @model_validator(mode="after")
    def validate_fields(self) -> "TestFunction":
        """Each family carries exactly the fields it needs."""
        if self.kind == TestFunctionKind.INDICATOR and (self.z is None or not math.isfinite(self.z)):
            raise ValueError("Indicator needs a finite threshold z")
        if self.kind == TestFunctionKind.SCALED_SINE and self.a is None:
            raise ValueError("ScaledSine needs a frequency a")
        if self.kind == TestFunctionKind.CUSTOM and self.func is None:
            raise ValueError("Custom needs a callable")
        return self

    # Constructors

    @classmethod
    def indicator(cls, z: float) -> "TestFunction":
        return cls(kind=TestFunctionKind.INDICATOR, z=z)

    @classmethod
    def scaled_sine(cls, a: float) -> "TestFunction":
        return cls(kind=TestFunctionKind.SCALED_SINE, a=a)

    @classmethod
    def identity(cls) -> "TestFunction":
        return cls(kind=TestFunctionKind.IDENTITY)

    @classmethod
    def square(cls) -> "TestFunction":
        return cls(kind=TestFunctionKind.SQUARE)

    @classmethod
    def custom(cls, func: Callable[[float], float],
               derivative: Optional[Callable[[float], float]] = None,
               sup_h: Optional[float] = None,
               lip_h: Optional[float] = None,
               name: Optional[str] = None) -> "TestFunction":
        return cls(kind=TestFunctionKind.CUSTOM, func=func, derivative_func=derivative,
                   sup_h=sup_h, lip_h=lip_h, name=name)

    @classmethod
    def from_descriptor(cls, text: str) -> "TestFunction":
        """Parse ``indicator:z``, ``sine:a``, ``identity`` or ``square``."""
        kind, _, arg = text.strip().partition(":")
        kind = kind.lower()
        if kind == "indicator":
            return cls.indicator(float(arg))
        if kind == "sine":
            return cls.scaled_sine(float(arg))
        if kind == "identity" and not arg:
            return cls.identity()
        if kind == "square" and not arg:
            return cls.square()
        raise ValueError(f"Unknown test function descriptor '{text}'")

    # Evaluation

    def __call__(self, x: float) -> float:
        if self.kind == TestFunctionKind.INDICATOR:
            return 1.0 if x <= self.z else 0.0
        if self.kind == TestFunctionKind.SCALED_SINE:
            return math.sin(self.a * x) / self.a
        if self.kind == TestFunctionKind.IDENTITY:
            return x
        if self.kind == TestFunctionKind.SQUARE:
            return x * x
        return float(self.func(x))

    @property
    def has_derivative(self) -> bool:
        return self.kind != TestFunctionKind.CUSTOM or self.derivative_func is not None

    def derivative(self, x: float) -> float:
        """h'(x); the indicator's derivative is zero away from z."""
        if self.kind == TestFunctionKind.INDICATOR:
            return 0.0
        if self.kind == TestFunctionKind.SCALED_SINE:
            return math.cos(self.a * x)
        if self.kind == TestFunctionKind.IDENTITY:
            return 1.0
        if self.kind == TestFunctionKind.SQUARE:
            return 2.0 * x
        if self.derivative_func is None:
            raise ValueError(f"{self.descriptor} has no derivative")
        return float(self.derivative_func(x))

    def plus(self, other: "TestFunction") -> "TestFunction":
        """Pointwise sum, as a Custom test function."""
        derivative = None
        if self.has_derivative and other.has_derivative:
            derivative = lambda x: self.derivative(x) + other.derivative(x)  # noqa: E731
        return TestFunction.custom(lambda x: self(x) + other(x), derivative=derivative,
                                   name=f"{self.descriptor}+{other.descriptor}")

    # Metadata

    @property
    def kinks(self) -> Tuple[float, ...]:
        """Points where h is discontinuous."""
        return (self.z,) if self.kind == TestFunctionKind.INDICATOR else ()

    @property
    def growth_order(self) -> int:
        """Polynomial growth of |h| at infinity, used to size tail truncation."""
        if self.kind in (TestFunctionKind.INDICATOR, TestFunctionKind.SCALED_SINE):
            return 0
        if self.kind == TestFunctionKind.IDENTITY:
            return 1
        if self.kind == TestFunctionKind.CUSTOM and self.sup_h is not None:
            return 0
        if self.kind == TestFunctionKind.CUSTOM and self.lip_h is not None:
            return 1
        return 2

    @property
    def sup_h1(self) -> Optional[float]:
        """sup|h'| where finite and known."""
        if self.kind in (TestFunctionKind.SCALED_SINE, TestFunctionKind.IDENTITY):
            return 1.0
        if self.kind == TestFunctionKind.CUSTOM:
            return self.lip_h
        return None

    @property
    def sup_h2(self) -> Optional[float]:
        """sup|h''| where finite and known."""
        if self.kind == TestFunctionKind.SCALED_SINE:
            return self.a
        if self.kind == TestFunctionKind.IDENTITY:
            return 0.0
        return None

    @property
    def descriptor(self) -> str:
        if self.kind == TestFunctionKind.INDICATOR:
            return f"indicator:{self.z!r}"
        if self.kind == TestFunctionKind.SCALED_SINE:
            return f"sine:{self.a!r}"
        if self.kind == TestFunctionKind.CUSTOM:
            return f"custom:{self.name}" if self.name else "custom"
        return self.kind.value


class HNorms(BaseModel):
    """Norms ‖h̃‖, ‖h'‖, ‖h''‖ fed to the Stein-factor right-hand sides."""

    h_tilde: Optional[float] = Field(None, ge=0.0, description="sup|h - E h(Z)|")
    h1: Optional[float] = Field(None, ge=0.0, description="sup|h'|")
    h2: Optional[float] = Field(None, ge=0.0, description="sup|h''|")


class SteinEval(BaseModel):
    """Solution f of the Stein equation and its derivatives at one point."""

    x: float
    f: float
    f1: Optional[float] = None
    f2: Optional[float] = None
    f3: Optional[float] = None
    err_est: float = Field(default=0.0, ge=0.0, description="Propagated quadrature error")
    method: str = Field(default="kernel", description="How f2/f3 were obtained")
