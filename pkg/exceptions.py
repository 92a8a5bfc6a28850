class PogError(Exception):
    """Base class for every error raised by the perception stack."""


class ConfigError(PogError):
    """Malformed scenario or command configuration (exit status 2)."""


class GeometryError(PogError):
    pass


class DepthError(PogError):
    pass


class LocalizationError(PogError):
    pass


class UnknownBeaconError(LocalizationError):
    def __init__(self, beacon_id):
        super().__init__(f"unknown beacon id: {beacon_id}")
        self.beacon_id = beacon_id


class OutOfOrderError(LocalizationError):
    def __init__(self, line, timestamp, previous):
        super().__init__(
            f"line {line}: timestamp {timestamp} is earlier than {previous}"
        )
        self.line = line


class MappingError(PogError):
    pass


class CorrespondenceError(MappingError):
    """ICP found fewer correspondences than required."""


class SimulationError(PogError):
    pass
