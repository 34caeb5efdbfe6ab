"""Exception hierarchy shared by all modules."""


class IslandFSSError(Exception):
    """Base class for errors raised by island_fss."""


class DatasetError(IslandFSSError):
    """A dataset could not be loaded, split, sharded or projected."""


class TrainingError(IslandFSSError):
    """Logistic-regression training diverged (non-finite loss)."""


class EvaluationError(IslandFSSError):
    """
    Evaluation of a single solution failed.

    Carries the solution key and, once re-raised by an island worker,
    the island index.
    """

    def __init__(self, message: str, key: int, island: int | None = None):
        super().__init__(message)
        self.key = key
        self.island = island

    def __reduce__(self):
        # Keeps key/island intact when the error crosses a worker process boundary
        return (type(self), (self.args[0], self.key, self.island))

    def __str__(self) -> str:
        where = f"solution {self.key}"
        if self.island is not None:
            where = f"island {self.island}, {where}"
        return f"{where}: {self.args[0]}"


class MigrationError(IslandFSSError):
    """The migration barrier received too few candidates or an incomplete round."""


class ReportError(IslandFSSError):
    """A front, summary or EAF file could not be read back."""
