"""Exception hierarchy. Every error carries a stable machine-readable ``code``."""


class GeoTorsionError(Exception):
    code = "Error"

    def to_dict(self):
        return {"code": self.code, "message": str(self)}


class InputError(GeoTorsionError):
    """Bad user input: the CLI maps these to exit code 1."""

    code = "InputError"


class NotFound(InputError):
    code = "NotFound"


class InvalidSpec(InputError):
    code = "InvalidSpec"


# triangulation
class NotClosed(InputError):
    code = "NotClosed"


class OrientationClash(InputError):
    code = "OrientationClash"


class DegenerateTet(InputError):
    code = "DegenerateTet"


class GluingMismatch(InputError):
    code = "GluingMismatch"


class NonManifoldEdge(InputError):
    code = "NonManifoldEdge"


class NonManifoldVertex(InputError):
    code = "NonManifoldVertex"


class NotAChain(InputError):
    code = "NotAChain"


class SharedEdgeCollision(InputError):
    code = "SharedEdgeCollision"


# geometry
class ResampleExhausted(GeoTorsionError):
    code = "ResampleExhausted"


# torsion
class RankDeficit(GeoTorsionError):
    code = "RankDeficit"


class SingularF2Minor(GeoTorsionError):
    code = "SingularF2Minor"


class NotAcyclic(GeoTorsionError):
    code = "NotAcyclic"


# pachner
class MoveRejected(GeoTorsionError):
    code = "MoveRejected"


class TouchesChain(MoveRejected):
    code = "TouchesChain"


class DegenerateResult(MoveRejected):
    code = "DegenerateResult"


class ConventionViolation(MoveRejected):
    code = "ConventionViolation"


class BadDegree(MoveRejected):
    code = "BadDegree"


# framing / catalog
class IndexClash(GeoTorsionError):
    code = "IndexClash"


class OracleMismatch(GeoTorsionError):
    code = "OracleMismatch"
