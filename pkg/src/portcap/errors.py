"""Exception hierarchy shared by the model, simulation and ingestion layers."""


class PortCapError(Exception):
    """Base class for every error raised by portcap."""


class UnstableRegimeError(PortCapError):
    """Traffic intensity at or above 1 - EPS_STAB; the closed forms do not apply."""


class DegenerateObservationError(PortCapError, ValueError):
    pass


class SolverError(PortCapError):
    """A numeric solve failed to bracket or converge."""


class SchemaError(PortCapError, ValueError):
    """An input file or record does not match its documented schema."""


class ConfigError(PortCapError, ValueError):
    pass
