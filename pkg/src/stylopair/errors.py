"""Exception hierarchy.

Everything raised on bad data derives from :class:`StyloError`, which the CLI
maps to exit code 2.
"""


class StyloError(Exception):
    pass


class EmptyInput(StyloError):
    pass


class LengthMismatch(StyloError):
    pass


class NoClassifiableWords(StyloError):
    pass


class EmptyGraph(StyloError):
    pass


class ModeMismatch(StyloError):
    pass


class MissingLexicon(StyloError):
    pass


class InsufficientCorpus(StyloError):
    pass


class TooFewRows(StyloError):
    pass


class SchemaError(StyloError):
    pass


class SchemaMismatch(StyloError):
    pass


class ParseError(StyloError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(ParseError):
    pass


class VersionError(StyloError):
    pass


class EmptySamples(StyloError):
    pass


class EmptyDataset(StyloError):
    pass


class EmptyMatrix(StyloError):
    pass


class InvalidParams(StyloError):
    pass
