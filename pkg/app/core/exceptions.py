"""
Exception hierarchy for the Gaze-Guided Generation Service

Input problems map to CLI exit code 2 / HTTP 400, numeric failures to
exit code 3 / HTTP 422.
"""

from typing import List, Optional


class GazeGenError(Exception):
    """Base class for all service errors"""
    exit_code = 1
    status_code = 500


class InputValidationError(GazeGenError):
    """Invalid or unreadable input"""
    exit_code = 2
    status_code = 400


class NumericError(GazeGenError):
    """Numerically degenerate computation"""
    exit_code = 3
    status_code = 422


class AlignmentError(InputValidationError):
    """Token pieces do not reconstruct the segmented words"""

    def __init__(self, token_index: int, message: Optional[str] = None):
        self.token_index = token_index
        super().__init__(message or f"Token {token_index} cannot be aligned to any word")


class TokenizationError(InputValidationError):
    """Text contains characters the tokenizer has never seen"""


class CorpusError(InputValidationError):
    """Empty or malformed training corpus"""


class SearchSpaceError(InputValidationError):
    """Exhaustive search space exceeds the configured guard"""


class FileFormatError(InputValidationError):
    """Model or data file does not follow its declared format"""


class RankDeficiencyError(NumericError):
    """Design matrix is not full rank"""

    def __init__(self, columns: List[str]):
        self.columns = list(columns)
        super().__init__(f"Design matrix is rank deficient; collinear columns: {', '.join(self.columns)}")


class ZeroVarianceError(NumericError):
    """A vector that must vary is constant"""


class InsufficientRepetitionError(NumericError):
    """MTLD found no completed factor"""
