class ParameterError(ValueError):
    """
    Raised when an operation is called with a parameter outside its allowed range, for example a
    low-pass cutoff above Nyquist or ``f_min >= f_max``.
    """


class AudioFormatError(ValueError):
    """
    Raised when an audio file cannot be decoded, or decodes to something we refuse to track (e.g. a
    sample rate outside 8-48 kHz).
    """


class ConfigError(ValueError):
    """
    Raised when a config file or ``--set`` override is malformed or names an unknown key.
    """


class ReferenceFormatError(ValueError):
    """
    Raised when a reference F0 file is neither one column (F0 every 10 ms) nor two (time, F0).
    """
