"""Enumeration budgets and the shared exception types."""

from __future__ import annotations

from dataclasses import dataclass, replace


class BudgetExceeded(RuntimeError):
    """An exact computation would exceed its configured enumeration budget."""


class PreconditionError(ValueError):
    pass


class CertificateError(ValueError):
    """A supplied certificate violates one of its structural invariants."""


@dataclass(frozen=True)
class Budget:
    max_n: int = 26
    max_support: int = 10**7
    max_enumeration: int = 10**7
    max_terms: int = 10**6
    max_substitutions: int = 10**6
    decoupling_max_n: int = 20

    def scaled(self, factor: float) -> "Budget":
        return replace(
            self,
            max_support=int(self.max_support * factor),
            max_enumeration=int(self.max_enumeration * factor),
            max_terms=int(self.max_terms * factor),
            max_substitutions=int(self.max_substitutions * factor),
        )


DEFAULT_BUDGET = Budget()


def resolve(budget: Budget | None) -> Budget:
    return DEFAULT_BUDGET if budget is None else budget


def check(value: int, limit: int, what: str) -> None:
    if value > limit:
        raise BudgetExceeded(f"{what} = {value} exceeds budget {limit}")
