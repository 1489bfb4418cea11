from typing import Optional, Dict
import logging
from dataclasses import dataclass


class VideoMergeError(Exception):
    """Base class for all pipeline errors"""

    code = 'E_VIDEOMERGE'


class InvalidShapeError(VideoMergeError, ValueError):
    code = 'E_INVALID_SHAPE'


class InvalidParameterError(VideoMergeError, ValueError):
    code = 'E_INVALID_PARAMETER'


class InvalidInputError(VideoMergeError, ValueError):
    code = 'E_INVALID_INPUT'


class NonRealResultError(VideoMergeError, ArithmeticError):
    code = 'E_NON_REAL'


class FrameIndexError(VideoMergeError, IndexError):
    code = 'E_INDEX'


class IncompletePredictionsError(VideoMergeError, ValueError):
    code = 'E_INCOMPLETE_PREDICTIONS'


class InsufficientFramesError(VideoMergeError, ValueError):
    code = 'E_INSUFFICIENT_FRAMES'


class InsufficientWindowsError(VideoMergeError, ValueError):
    code = 'E_INSUFFICIENT_WINDOWS'


class LatentFormatError(VideoMergeError, ValueError):
    code = 'E_FORMAT'


class ChecksumError(LatentFormatError):
    code = 'E_CHECKSUM'


class RefinerClientError(VideoMergeError, RuntimeError):
    code = 'E_REFINER'


class DenoiserError(VideoMergeError, RuntimeError):
    """Denoiser failure at a specific tile and noise level"""

    code = 'E_DENOISER'

    def __init__(self, message: str, tile_index: int, sigma: float):
        super().__init__(f"tile {tile_index} at sigma={sigma:.6g}: {message}")
        self.tile_index = tile_index
        self.sigma = sigma


class ConfigError(VideoMergeError, ValueError):
    """Run configuration problem, located by dotted key and line when known"""

    code = 'E_CONFIG'

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if key is not None:
            location.append(f"key '{key}'")
        prefix = f"{', '.join(location)}: " if location else ''
        super().__init__(f"{prefix}{message}")
        self.key = key
        self.line = line


@dataclass
class ProcessingError:
    """Structured error information"""
    error_type: str
    message: str
    details: Optional[str] = None
    suggestions: Optional[str] = None


class ErrorHandler:
    """Centralized error reporting for the command line surface"""

    def __init__(self):
        self.logger = logging.getLogger('ErrorHandler')

        # Suggestions keyed by error code
        self.error_templates: Dict[str, str] = {
            'E_CONFIG': "Check the run config against the documented schema (schema_version: 1).",
            'E_FORMAT': "The file is not a VMLT latent container or is truncated.",
            'E_CHECKSUM': "The latent payload is corrupted; regenerate or re-copy the file.",
            'E_INVALID_SHAPE': "Tensor extents must be five positive integers and agree between inputs.",
            'E_INVALID_PARAMETER': "Check overlap < tile length, cutoffs in (0, 0.5] and counts >= 1.",
            'E_DENOISER': "The denoiser failed on a tile; rerun with --log-level DEBUG for details.",
            'E_INSUFFICIENT_FRAMES': "The metric needs at least two frames.",
            'E_INSUFFICIENT_WINDOWS': "The video is shorter than two disjoint tile windows.",
        }

    def describe(self, error: BaseException) -> ProcessingError:
        """Build structured error information for an exception"""
        error_type = getattr(error, 'code', 'E_INTERNAL')
        return ProcessingError(
            error_type=error_type,
            message=str(error) or error.__class__.__name__,
            details=error.__class__.__name__,
            suggestions=self.error_templates.get(error_type)
        )

    def format_error(self, error: BaseException) -> str:
        """Single-line, machine-parseable record: '<CODE>: <message>'"""
        info = self.describe(error)
        message = ' '.join(info.message.split())
        return f"{info.error_type}: {message}"

    def handle_error(self, error: BaseException) -> str:
        """Log the error with its suggestion and return the single-line record"""
        info = self.describe(error)
        line = self.format_error(error)
        self.logger.debug(line, exc_info=error)
        if info.suggestions:
            self.logger.info(f"Suggestion: {info.suggestions}")
        return line
