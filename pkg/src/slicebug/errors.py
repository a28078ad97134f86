"""Exception types shared across the package."""


class SlicebugError(Exception):
    """Base class for all package-specific errors."""


class ParseError(SlicebugError):
    def __init__(self, file, line, reason):
        super().__init__(f"{file}:{line}: {reason}")
        self.file = file
        self.line = line
        self.reason = reason


class GraphError(SlicebugError):
    pass


class UnknownNode(GraphError):
    pass


class CriterionMismatch(SlicebugError):
    pass


class MixedFunctions(SlicebugError):
    pass


class SpanMismatch(SlicebugError):
    pass


class EmptyInput(SlicebugError):
    pass


class ZeroVector(SlicebugError):
    pass


class DimMismatch(SlicebugError):
    pass


class ProviderUnavailable(SlicebugError):
    pass


class NoEligibleOccurrence(SlicebugError):
    pass


class AllPairsFailed(SlicebugError):
    pass


class EmptyResult(SlicebugError):
    """No key variable survives the patch analysis."""


class NoRootStatement(SlicebugError):
    def __init__(self, variable_key):
        super().__init__(f"no root statement found for {variable_key!r}")
        self.variable_key = variable_key


class SeedAnalysisFailed(SlicebugError):
    pass


class IndexRequired(SlicebugError):
    pass


class ManifestMismatch(SlicebugError):
    pass


class CorruptIndex(SlicebugError):
    pass
