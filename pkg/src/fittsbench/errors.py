"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can exit with
a stable identifier.
"""


class BenchError(Exception):
    code = "bench-error"


class InvalidArgumentError(BenchError, ValueError):
    code = "invalid-argument"


class InsufficientDataError(BenchError, ValueError):
    code = "insufficient-data"


class DemoParseError(BenchError, ValueError):
    code = "parse-error"

    def __init__(self, msg, offset=None):
        super().__init__(msg if offset is None else f"{msg} (byte offset {offset})")
        self.offset = offset


class DemoValidationError(BenchError, ValueError):
    code = "validation-error"

    def __init__(self, msg, field=None):
        super().__init__(msg)
        self.field = field


class OrderingError(DemoValidationError):
    code = "ordering-error"


class MissingJointError(BenchError, KeyError):
    code = "missing-joint"

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing preferred joints: {', '.join(self.missing)}")

    def __str__(self):
        return self.args[0]


class UnreachableDistanceError(BenchError, ValueError):
    code = "unreachable-distance"


class CollinearInputError(BenchError, ValueError):
    code = "collinear-input"


class ContractError(BenchError, ValueError):
    code = "contract-error"


class EmptyDatasetError(BenchError, ValueError):
    code = "empty-dataset"


class InsufficientWarmstartError(BenchError, ValueError):
    code = "insufficient-warmstart"


class SchemaVersionError(BenchError, ValueError):
    code = "schema-version"


class MissingInputError(BenchError, FileNotFoundError):
    code = "missing-input"


class UnwritableOutputError(BenchError, OSError):
    code = "unwritable-output"
