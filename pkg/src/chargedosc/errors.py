"""Exception hierarchy shared by all modules."""


class OscillatorError(Exception):
    """Base class for every error raised by this package."""


class InvalidSystem(OscillatorError, ValueError):
    pass


class ConfigError(OscillatorError, ValueError):
    """Problem reading a key = value system file.

    ``lineno`` is 1-based, or ``None`` when the problem is not tied to a line
    (for example a missing key).
    """

    def __init__(self, message, lineno=None, key=None):
        self.lineno = lineno
        self.key = key
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class DegenerateAxis(OscillatorError):
    """An axis carries an electric field but no restoring force."""


class ZeroMode(OscillatorError):
    """One normal-mode frequency vanishes; the ladder construction does not apply."""


class DegenerateMode(OscillatorError):
    pass


class NormalizationFailure(OscillatorError):
    pass


class NonNormalizable(OscillatorError):
    pass


class NegativeRadicand(OscillatorError):
    pass


class ContinuumSpectrum(OscillatorError):
    """Requested discrete levels for a motion whose spectrum is continuous."""


class ResolutionError(OscillatorError):
    pass


class ConvergenceFailure(OscillatorError):
    pass


class SolverStall(OscillatorError):
    pass
