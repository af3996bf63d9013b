"""Exception types shared across the package."""


class DatasetError(ValueError):
    """Base class for malformed or inconsistent input data."""


class ParseError(DatasetError):
    """Input could not be parsed as JSON of the expected overall shape."""


class SchemaError(DatasetError):
    """A record has a missing field, a wrong type, or an illegal value."""


class IntegrityError(DatasetError):
    """Cross-references between records do not resolve, or ids collide."""


class ConfigError(ValueError):
    """A configuration object violates one of its invariants."""


class InapplicableLabel(ValueError):
    """A text rule found nothing to rewrite in the given label."""
