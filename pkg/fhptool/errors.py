class FilterException(Exception):
    pass


class StructuralError(FilterException):
    pass


class PreconditionError(FilterException):
    pass


class AdmissibilityError(FilterException):
    pass


class EmissionError(FilterException):
    pass
