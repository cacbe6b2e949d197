"""
Exception types shared by the mission planner modules
"""


class DomainError(ValueError):
    """A value is outside the domain an operation accepts"""


class OracleSizeError(DomainError):
    """Brute-force enumeration was asked to solve an instance that is too large"""


class ClaimConflictError(DomainError):
    """An agent tried to claim a task another agent already holds"""


class ConfigError(ValueError):
    """The scenario configuration is missing keys or holds invalid values"""


class ReplayParseError(ValueError):
    """A replay log line could not be parsed"""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"Line {line_number}: {message}")
        self.line_number = line_number
