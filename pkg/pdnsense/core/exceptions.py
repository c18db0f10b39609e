class PdnSenseError(Exception):
    """Base exception class."""

    exit_code: int = 1

    def __init__(self, detail: str = "pdnsense error"):
        super().__init__(detail)
        self.detail = detail


class ValidationError(PdnSenseError):
    """Precondition or contract violation."""

    def __init__(self, detail: str = "Validation error"):
        super().__init__(detail)


class NotFoundError(PdnSenseError):
    """Resource not found exception."""

    def __init__(self, resource: str = "Resource"):
        super().__init__(f"{resource} not found")


class ConflictError(PdnSenseError):
    """Resource conflict exception."""

    def __init__(self, detail: str = "Resource conflict"):
        super().__init__(detail)


class SignatureReuseError(ConflictError):
    """A one-time golden signature was presented again."""

    def __init__(self, signature_id: str = "signature"):
        super().__init__(f"Golden signature {signature_id} was already used; replay rejected")
        self.signature_id = signature_id


class SolveError(PdnSenseError):
    """Singular or ill-conditioned admittance matrix."""

    def __init__(self, frequency: float, detail: str = "admittance matrix is singular"):
        super().__init__(f"Impedance solve failed at {frequency:.6g} Hz: {detail}")
        self.frequency = frequency


class DegenerateGeometryError(PdnSenseError):
    """Cavity geometry has no usable resonance."""

    def __init__(self, detail: str = "Cavity geometry has no non-zero resonance below the cap"):
        super().__init__(detail)


class DegenerateCellError(PdnSenseError):
    """Both sample vectors of a cell have zero variance."""

    def __init__(self, detail: str = "Both sample vectors have zero variance"):
        super().__init__(detail)


class GridMismatchError(PdnSenseError):
    """Golden and test (frequency, sensor) grids differ."""

    def __init__(self, detail: str = "Golden and test grids differ"):
        super().__init__(detail)


class StoreWriteError(PdnSenseError):
    """Signature store write failed."""

    def __init__(self, detail: str = "Signature store write failed"):
        super().__init__(detail)
