from __future__ import annotations


class ElastoBemError(Exception):
    """Base class for all package errors."""


class GeometryError(ElastoBemError):
    pass


class SingularPointError(ElastoBemError):
    pass


class AssemblyError(ElastoBemError):
    pass


class SolverError(ElastoBemError):
    pass


class ConfigError(ElastoBemError):
    pass


class ScenarioError(ElastoBemError):
    pass


class NonConvergenceError(ElastoBemError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []
