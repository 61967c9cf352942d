"""Exception types shared across the condensation pipeline.

Every error raised on a contract violation derives from :class:`Dc3Error`, so
callers (and the CLI) can catch one base type. Errors that name an offending
sample, file position, or HTTP status carry that context as attributes.
"""

from __future__ import annotations


class Dc3Error(Exception):
    """Base class for all errors raised by this package."""


# --- dataset catalog ---------------------------------------------------------

class MissingFile(Dc3Error):
    def __init__(self, path):
        super().__init__(f"file not found: {path}")
        self.path = str(path)


class MalformedJson(Dc3Error):
    pass


class DuplicateId(Dc3Error):
    def __init__(self, sample_id: str):
        super().__init__(f"duplicate sample id: {sample_id!r}")
        self.sample_id = sample_id


class DanglingFeatureRow(Dc3Error):
    def __init__(self, sample_id: str, row: int, count: int):
        super().__init__(
            f"sample {sample_id!r} references feature row {row}, "
            f"but the matrix has only {count} rows"
        )
        self.sample_id = sample_id
        self.row = row
        self.count = count


class UnreadableImage(Dc3Error):
    def __init__(self, sample_id: str, path, reason: str):
        super().__init__(f"sample {sample_id!r}: {path} is not a readable PNG/JPEG ({reason})")
        self.sample_id = sample_id
        self.path = str(path)


class BadMagic(Dc3Error):
    """Feature file does not start with the expected magic/version header."""


class TruncatedFile(Dc3Error):
    pass


class TrailingBytes(Dc3Error):
    """Feature file has bytes beyond the declared payload; round-tripping would drop them."""


class NonFiniteValue(Dc3Error):
    def __init__(self, row: int, col: int):
        super().__init__(f"non-finite feature value at row {row}, col {col}")
        self.row = row
        self.col = col


class UnknownClass(Dc3Error):
    def __init__(self, label: str):
        super().__init__(f"unknown class label: {label!r}")
        self.label = label


# --- shared numeric contracts ------------------------------------------------

class EmptyInput(Dc3Error):
    pass


class DimensionMismatch(Dc3Error):
    pass


# --- sampler -----------------------------------------------------------------

class CandidateAlreadySelected(Dc3Error):
    def __init__(self, index: int):
        super().__init__(f"candidate {index} is already in the selected set")
        self.index = index


# --- compensator -------------------------------------------------------------

class EmptyFamily(Dc3Error):
    def __init__(self, family: str):
        super().__init__(f"prompt catalog has no {family} entries")
        self.family = family


class BackendUnreachable(Dc3Error):
    def __init__(self, url: str, reason: str = ""):
        msg = f"compensation backend unreachable: {url}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.url = url


class BackendError(Dc3Error):
    def __init__(self, status: int, body: str):
        super().__init__(f"compensation backend returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


# --- stitcher ----------------------------------------------------------------

class WrongVariantCount(Dc3Error):
    def __init__(self, expected: int, got: int):
        super().__init__(f"stitch strategy needs {expected} variants, got {got}")
        self.expected = expected
        self.got = got


# --- metrics -----------------------------------------------------------------

class EmptyImage(Dc3Error):
    pass


class EmptyDataset(Dc3Error):
    pass


class GridMismatch(Dc3Error):
    pass


# --- pipeline ----------------------------------------------------------------

class ConfigInvalid(Dc3Error):
    pass


class MissingStageInput(Dc3Error):
    def __init__(self, stage: str, detail: str = ""):
        msg = f"stage {stage!r} is missing its input artifacts"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.stage = stage


class StageError(Dc3Error):
    """Wraps any module error with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
