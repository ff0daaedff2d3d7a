import logging

from shared.errors import BudgetExceeded
from shared.settings import resolve_budget


class BudgetGuard:
    """
    Counts inner steps of a search and stops it once the limit is reached.
    Progress is logged every `report_every` steps.
    """

    def __init__(self, limit=None, label="search", report_every=50_000_000):
        self.limit = resolve_budget(limit)
        self.label = label
        self.spent = 0
        self.report_every = report_every
        self._next_report = report_every

    @property
    def remaining(self):
        return max(0, self.limit - self.spent)

    def spend(self, steps=1):
        self.spent += steps
        if self.spent >= self._next_report:
            logging.info(f"{self.label}: {self.spent:,} steps spent of {self.limit:,}")
            self._next_report += self.report_every
        if self.spent > self.limit:
            logging.warning(f"{self.label}: budget of {self.limit:,} steps exhausted")
            raise BudgetExceeded(
                f"{self.label} exceeded its budget of {self.limit:,} inner steps",
                steps=self.spent,
            )

    def split(self, parts):
        """Per-worker limits that add up to what is left of this budget."""
        parts = max(1, parts)
        base, extra = divmod(self.remaining, parts)
        return [max(1, base + (1 if k < extra else 0)) for k in range(parts)]
