"""Exception types shared across the package."""


class ClaimFilterError(Exception):
    """Base class for all claimfilter errors."""


class NonSquareError(ClaimFilterError):
    """Adjacency matrix is not square."""

    def __init__(self, row: int, width: int, expected: int):
        self.row = row
        super().__init__(f"row {row} has {width} entries, expected {expected}")


class SelfEdgeError(ClaimFilterError):
    """A claim lists itself as its own ancestor."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"claim {index} depends on itself")


class CyclicError(ClaimFilterError):
    """The dependency relation contains a directed cycle."""

    def __init__(self, cycle: list[int]):
        self.cycle = cycle
        super().__init__(f"dependency cycle: {' -> '.join(map(str, cycle))}")


class IndexOutOfRangeError(ClaimFilterError):
    def __init__(self, index: int, n_claims: int):
        self.index = index
        self.n_claims = n_claims
        super().__init__(f"claim index {index} out of range for {n_claims} claims")


class SizeMismatchError(ClaimFilterError):
    """Two graphs being compared have different claim counts."""


class TooLargeError(ClaimFilterError):
    """Graph exceeds the exhaustive-validation bound."""


class TiedScoresError(ClaimFilterError):
    """Risk scores contain duplicates; tie-breaking noise was skipped."""


class InconsistentTallyError(ClaimFilterError):
    """Support tally counts do not add up to the number of alternates."""


class IncoherentEmptySetError(ClaimFilterError):
    """The coherence oracle rejected the empty claim set (configuration bug)."""


class EmptyCalibrationError(ClaimFilterError):
    """Calibration requires at least one non-conformity score."""


class MissingLabelError(ClaimFilterError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"no claim-level label for claim {index}")


class MissingSubsetLabelError(ClaimFilterError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no subset-level label for claim set {{{key}}}")


class InvalidConfigError(ClaimFilterError):
    """Simulation or backend configuration is out of range."""


class MalformedResponseError(ClaimFilterError):
    """Backend returned text that does not parse as the expected format."""


class IdOutOfRangeError(ClaimFilterError):
    """Claim-score line references an id outside the claim list."""


class BackendUnavailableError(ClaimFilterError):
    """Backend could not be reached after the configured retries."""


class ArtifactMismatchError(ClaimFilterError):
    """Calibration artifact settings do not match the filtering request."""
