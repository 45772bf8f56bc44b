"""Rules deciding whether a request is valid beyond the structural checks"""

from goalarbiter.definitions import Season
from goalarbiter.model import PropertyInstance

from .rules import ValidationRule


class AcceptAllRule(ValidationRule):
    """Default request validation: anything structurally valid is accepted"""

    name = "accept_all"

    def is_valid(self, instance: PropertyInstance, value: float, season: Season | None = None) -> bool:
        return True
