"""Exception hierarchy shared by all planner modules."""

from __future__ import annotations


class IrsPlanError(Exception):
    """Base class for all errors raised by this package."""


class ScenarioError(IrsPlanError):
    """Scenario document failed to parse or validate.

    ``violations`` lists every failed check so a bad document is reported
    in one shot rather than one field at a time.
    """

    def __init__(self, message: str, violations: list[str] | None = None):
        self.violations = list(violations or [])
        if self.violations:
            message = message + ": " + "; ".join(self.violations)
        super().__init__(message)


class GeometryError(IrsPlanError):
    """Invalid ray-tracing query (coincident endpoints, endpoint inside an obstacle)."""


class CkmError(IrsPlanError):
    """CKM persistence failure: corrupt file, version or scene-hash mismatch."""


class UnreachableTargetError(IrsPlanError):
    """A sensing/communication point has a zero effective channel under the
    current deployment, so no finite transmit power can serve it."""

    def __init__(self, points: list[str]):
        self.points = list(points)
        super().__init__(f"unreachable target(s): {', '.join(self.points)}")


class InfeasibleError(IrsPlanError):
    """No deployment within the power budget satisfies the requirements."""

    def __init__(self, message: str, points: list[str] | None = None):
        self.points = list(points or [])
        super().__init__(message)


class SolverError(IrsPlanError):
    """A convex subproblem did not return a certified solution."""

    def __init__(self, status: str, message: str = ""):
        self.status = status
        super().__init__(message or f"solver failed with status {status!r}")
