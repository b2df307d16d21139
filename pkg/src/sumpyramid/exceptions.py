"""Domain errors and warnings shared across the package."""


class SumPyramidError(Exception):
    """Base class for every domain error raised by this package."""


# --- text ---------------------------------------------------------------


class VocabularyMissing(SumPyramidError):
    """Subword tokenization was requested but no vocabulary is loaded."""


class InvalidN(SumPyramidError):
    """An n-gram order below 1 was requested."""


# --- extraction ---------------------------------------------------------


class EmptyDocument(SumPyramidError):
    """A document with no usable sentences cannot be extracted from."""


class CorpusReadError(SumPyramidError):
    """A corpus file contains a malformed record."""


# --- generation ---------------------------------------------------------


class TemplateError(SumPyramidError):
    """A prompt template is missing or duplicating a placeholder."""


class BackendUnavailable(SumPyramidError):
    """The completion backend kept failing past the retry budget."""


class EmptyCompletion(SumPyramidError):
    """The completion backend returned blank text."""


# --- resampling ---------------------------------------------------------


class InsufficientData(SumPyramidError):
    """Too few observations to fit a length model."""


class TokenizerMismatch(SumPyramidError):
    """Records and model disagree about which tokenizer measured lengths."""


class DegenerateSigmaWarning(UserWarning):
    """Zero length variance: the retention interval collapses to a point."""


# --- pyramid store ------------------------------------------------------


class EmptyCorpus(SumPyramidError):
    """An operation that needs documents received none."""


class TierViolation(SumPyramidError):
    """A record fails tier-tag or length-consistency validation."""


class InvalidK(SumPyramidError):
    """A subsample size outside [1, population size]."""


# --- fine-tuning schedule -----------------------------------------------


class MissingTier(SumPyramidError):
    """A stage plan needs a tier that the dataset does not provide."""


class TrainerFailure(SumPyramidError):
    """The external trainer exited nonzero."""

    def __init__(self, stage: str, exit_code: int):
        super().__init__(f"trainer failed at stage {stage!r} with exit code {exit_code}")
        self.stage = stage
        self.exit_code = exit_code


class CheckpointMissing(SumPyramidError):
    """An expected checkpoint digest file does not exist."""


# --- information theory -------------------------------------------------


class NotNormalized(SumPyramidError):
    """Probabilities do not sum to 1 within tolerance."""


class UnknownVariable(SumPyramidError):
    """A named variable is absent from the joint distribution."""


# --- evaluation ---------------------------------------------------------


class AlignmentError(SumPyramidError):
    """Prediction and reference streams do not line up."""


class DegenerateGroups(SumPyramidError):
    """Group data cannot support an F statistic."""
