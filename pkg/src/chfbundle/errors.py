"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to.
"""


class ChfError(Exception):
    exit_code = 1


class InputError(ChfError):
    """Malformed or inconsistent input file / argument."""

    exit_code = 2


class PropertyRangeError(InputError):
    pass


class SolverError(ChfError):
    exit_code = 3


class ModelError(ChfError):
    """A CHF model could not be evaluated, or its files are unusable."""

    exit_code = 4


class EvaluationError(ModelError):
    pass


class WeightFileError(ModelError):
    pass


class TrainingDivergedError(ModelError):
    def __init__(self, epoch, msg="training diverged"):
        super().__init__(f"{msg} at epoch {epoch}")
        self.epoch = epoch
