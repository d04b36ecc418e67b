"""
Error types raised by synthal
"""

from typing import List, Optional


class SynthALError(Exception):
    """Base class for every error raised by the library"""


class InvalidParameter(SynthALError, ValueError):
    """A parameter is outside its documented range"""


class ConfigError(InvalidParameter):
    """A run configuration file is malformed"""


class ShapeError(SynthALError, ValueError):
    """Array dimensions do not agree"""


class DegenerateInput(SynthALError):
    """Input statistics make an operation undefined (e.g. all-black image)"""


class GenerationFailed(SynthALError):
    """A synthetic sample could not be produced after resampling"""


class NoBackgroundAvailable(SynthALError):
    """No background could be drawn, inpainted or borrowed"""


class InvalidStack(SynthALError, ValueError):
    """A probability stack violates its invariants"""


class InvalidInput(SynthALError, ValueError):
    """Generic invalid input (empty map, non-finite values)"""


class InsufficientPool(SynthALError):
    """More images were requested than are available"""


class FormatError(SynthALError):
    """A file on disk does not follow its format"""


class LabelAccessError(SynthALError):
    """Attempt to read a label that has not been revealed"""


class DatasetError(SynthALError):
    """Dataset layout is invalid; carries every violation found"""

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        self.violations = list(violations or [])
        if self.violations:
            shown = "; ".join(self.violations[:5])
            more = len(self.violations) - 5
            if more > 0:
                shown += f" (+{more} more)"
            message = f"{message}: {shown}"
        super().__init__(message)


class TrainerError(SynthALError):
    """The trainer adapter failed"""

    def __init__(self, message: str, returncode: Optional[int] = None,
                 stdout: str = "", stderr: str = ""):
        self.returncode = returncode
        self.stdout = stdout
        self.stderr = stderr
        details = message
        if returncode is not None:
            details += f" (exit code {returncode})"
        if stderr:
            details += f"\n--- stderr (tail) ---\n{stderr[-2000:]}"
        super().__init__(details)
