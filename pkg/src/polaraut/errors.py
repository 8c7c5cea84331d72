"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operand sizes do not match."""


class InvalidDirectionError(ValueError):
    """A derivative direction was the zero vector."""


class InvalidPermutationError(ValueError):
    """A variable permutation is not a bijection."""


class RejectedPermutationError(ValueError):
    """A permutation handed to the ensemble decoder is not an automorphism."""


class ModeMismatchError(ValueError):
    """LLR and erasure soft values were mixed."""


class ConstructionAnomalyError(RuntimeError):
    """Frozen-set and monomial views of a polar code disagree.

    Carries the ranks of the two spans (and of their union) so the caller
    can see how far apart they are.
    """

    def __init__(self, message, row_rank=None, monomial_rank=None, union_rank=None):
        super().__init__(message)
        self.row_rank = row_rank
        self.monomial_rank = monomial_rank
        self.union_rank = union_rank
