"""Exception types raised by the library."""


class PricegameError(Exception):
    """Base class for all library errors."""


class NonZeroEmptySet(PricegameError):
    """Valuation table has v(empty) != 0."""


class NonMonotone(PricegameError):
    """Valuation table decreases along some inclusion; carries a witness pair."""

    def __init__(self, small: int, big: int, v_small, v_big):
        self.witness = (small, big)
        self.values = (v_small, v_big)
        super().__init__(
            f"non-monotone table: v({small:#x})={v_small} > v({big:#x})={v_big}"
        )


class SizeLimit(PricegameError):
    """Item count exceeds what exhaustive subset scans can handle."""


class OverlappingSets(PricegameError):
    """Marginal v(T|S) requires S and T disjoint."""


class MalformedFamily(PricegameError):
    """Family parameters do not describe a valid monotone valuation."""


class InvalidPrice(PricegameError):
    """Price entry is negative or otherwise not a valid posted price."""


class GreedyNotDemanded(PricegameError):
    """The greedy decision map produced a set outside the demand correspondence.

    This signals that the valuation is not gross substitutes; it is surfaced
    rather than silently accepted.
    """

    def __init__(self, chosen: int, best_utility, greedy_utility):
        self.chosen = chosen
        self.best_utility = best_utility
        self.greedy_utility = greedy_utility
        super().__init__(
            f"greedy chose {chosen:#x} with utility {greedy_utility}, "
            f"demand optimum is {best_utility}"
        )


class MultiItemSeller(PricegameError):
    """Operation only supports sellers owning exactly one item."""


class Unsupported(PricegameError):
    """Operation precondition not met (e.g. needs a single buyer)."""


class NotSubmodular(PricegameError):
    """Operation requires a submodular valuation."""


class InputNotEquilibrium(PricegameError):
    """The supplied profile was expected to be an exact Nash equilibrium."""


class MapNotUpConsistent(PricegameError):
    """Operation requires an up-consistent decision map."""


class BudgetExceeded(PricegameError):
    """Requested exhaustive scan is larger than the configured cell budget."""


class ParseError(PricegameError):
    """Scenario file could not be parsed."""


class ValidationError(PricegameError):
    """Scenario file parsed but failed semantic validation."""
