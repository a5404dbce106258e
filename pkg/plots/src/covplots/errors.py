class SchemaError(Exception):
    """CSV columns do not match the trace/cost schema this tool consumes."""


class TimeOutOfRange(Exception):
    """Requested snapshot time lies outside the logged trace interval."""
