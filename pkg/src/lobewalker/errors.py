"""Exception types raised across the package.

Every error carries enough detail to print a one-line diagnostic. The CLI
maps each class onto an exit code through ``exit_code``.
"""


class LobeWalkerError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class MetaMismatch(LobeWalkerError):
    """Two volumes that must share a grid do not."""


class EmptyMask(LobeWalkerError):
    """An operation needing at least one true voxel got none."""


class UnknownLabel(LobeWalkerError):
    """A component label that does not occur in the map."""


class SeedingError(LobeWalkerError):
    exit_code = 3


class SeedCountNeverFive(SeedingError):
    def __init__(self, iterations, best_count, target=5):
        self.iterations = iterations
        self.best_count = best_count
        self.target = target
        super().__init__(
            f"no erosion depth gave exactly {target} seed regions "
            f"(iterations={iterations}, best_count={best_count})"
        )


class LungPartitionError(SeedingError):
    """Seed regions could not be split 2/3 across the left/right lungs."""


class EmptyLung(SeedingError):
    """The lung mask has no true voxel."""


class SolverDiverged(LobeWalkerError):
    exit_code = 4

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"conjugate gradients stopped at relative residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class TooLarge(LobeWalkerError):
    """Problem exceeds the size cap of a dense reference solver."""


class DimsTooSmall(LobeWalkerError):
    exit_code = 1


class ParseError(LobeWalkerError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class TypeMismatch(LobeWalkerError):
    """Stored element type does not fit the requested volume kind."""


class TruncatedData(LobeWalkerError):
    """Payload size disagrees with the header."""


class IoError(LobeWalkerError):
    pass


class EmptyInput(LobeWalkerError):
    pass


class EmptyScores(LobeWalkerError):
    pass
