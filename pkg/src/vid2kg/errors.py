"""Error types shared across the package.

DataError covers everything caused by input content (malformed files,
contract violations, unknown identifiers); the CLI maps it to exit
code 2.  Anything else that escapes is an internal error, exit code 3.
"""


class Vid2kgError(Exception):
    pass


class DataError(Vid2kgError):
    pass
