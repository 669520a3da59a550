class ConfigurationError(ValueError):
    """Bad run parameters: wrong vector length, process id out of range, etc."""


class ProtocolViolation(RuntimeError):
    """A state machine reached a state the algorithm says is impossible."""


class UserContractViolation(RuntimeError):
    """A user invoked an operation while another was still pending at that process."""
