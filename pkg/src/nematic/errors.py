"""Exception types shared by the integrators and the command line."""


class NematicError(Exception):
    pass


class ConfigError(NematicError, ValueError):
    """Invalid run configuration (bad schema, range, or CFL violation)."""


class NonFiniteError(NematicError, FloatingPointError):
    """A right-hand-side term produced NaN/Inf."""

    def __init__(self, term: int, name: str = ""):
        self.term = term
        self.name = name
        super().__init__(f"non-finite value in term {term}" + (f" ({name})" if name else ""))


class BlowUpError(NematicError, FloatingPointError):
    """The director norm collapsed before projection."""

    def __init__(self, node: tuple[int, int], norm: float, t: float):
        self.node = node
        self.norm = norm
        self.t = t
        super().__init__(f"|u| = {norm:.3e} at node {node}, t = {t:.6g}")


class MissingColumnError(NematicError, KeyError):
    """A ledger lacks a column needed by an identity check."""

    def __init__(self, column: str, which: str):
        self.column = column
        super().__init__(f"ledger has no column {column!r} (needed for {which})")
