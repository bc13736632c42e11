class PaymentModelError(Exception):
    """Base for every error raised by the model services."""


class DomainError(PaymentModelError, ValueError):
    """An argument lies outside the domain of the operation."""


class ScheduleError(DomainError):
    pass


class SeriesFormatError(DomainError):
    def __init__(self, message: str, line: int = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CalibrationError(PaymentModelError, RuntimeError):
    pass
