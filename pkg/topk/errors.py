"""
Error Types for Fair Top-k
Every failure raised by the library derives from TopKError
"""


class TopKError(Exception):
    """Base class for all library errors"""


class ValidationError(TopKError, ValueError):
    """Bad user input or inconsistent data"""


class DuplicateCandidateError(ValidationError):
    def __init__(self, candidate_id):
        self.candidate_id = candidate_id
        super().__init__(f"duplicate candidate id: {candidate_id!r}")


class EmptyInstanceError(ValidationError):
    def __init__(self, message="candidate list is empty"):
        super().__init__(message)


class AttributeArityError(ValidationError):
    def __init__(self, candidate_id, expected, found):
        self.candidate_id = candidate_id
        self.expected = expected
        self.found = found
        super().__init__(
            f"candidate {candidate_id!r} has {found} attributes, expected {expected}"
        )


class InvalidParameterError(ValidationError):
    """A policy or configuration parameter is outside its domain"""


class InfeasibleQuotaError(ValidationError):
    def __init__(self, quota, total):
        self.quota = quota
        self.total = total
        super().__init__(f"quota k={quota} exceeds the candidate pool n={total}")


class InfeasibleSelectionError(ValidationError):
    def __init__(self, class_label, count, size):
        self.class_label = class_label
        self.count = count
        self.size = size
        super().__init__(
            f"class {class_label!r}: admitted count {count} outside [0, {size}]"
        )


class ClassExhaustedError(ValidationError):
    def __init__(self, class_label, size):
        self.class_label = class_label
        self.size = size
        super().__init__(f"class {class_label!r} is fully admitted ({size} of {size})")


class LabelCollisionError(ValidationError):
    def __init__(self, label, first, second):
        self.label = label
        self.keys = (first, second)
        super().__init__(f"class keys {first} and {second} both join to label {label!r}; use unambiguous codes")


class NoClassesRemainError(ValidationError):
    def __init__(self, min_size):
        self.min_size = min_size
        super().__init__(f"no classes remain with at least {min_size} candidates")


class CodingError(ValidationError):
    """Candidate file or coding config could not be turned into an instance"""


class CodingConfigError(CodingError):
    """The coding config itself is malformed"""


class MissingColumnError(CodingError):
    def __init__(self, column, path=None):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class UnmatchedValueError(CodingError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}: value {value!r} of column {column!r} matches no bin")


class EncodingError(CodingError):
    def __init__(self, path, position, reason):
        self.path = path
        self.position = position
        super().__init__(f"{path}: not valid UTF-8 at byte {position} ({reason})")


class ScoreParseError(CodingError):
    def __init__(self, row, value):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: score {value!r} is not a finite non-negative number")


class SpecError(ValidationError):
    """Synthetic spec or sweep config is invalid"""


class OracleTooLargeError(TopKError):
    def __init__(self, size, limit, what="count compositions"):
        self.size = size
        self.limit = limit
        super().__init__(f"oracle refused: {size} {what} exceeds the guard of {limit}")
