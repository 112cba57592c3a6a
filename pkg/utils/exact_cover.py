import logging
from typing import Hashable, Mapping, Sequence

from dlx import DLX


logger = logging.getLogger(__name__)


def build_solver(
    items: Sequence[Hashable],
    options: Mapping[Hashable, Sequence[Hashable]],
) -> DLX:
    """Load items as primary columns and options as named rows of a DLX matrix.

    Options that cover nothing are left out; they can never change a cover.

    Args:
        items: Items that must each be covered exactly once.
        options: Mapping from option key to the items it covers.
    """
    column_of = {item: position for position, item in enumerate(items)}
    solver = DLX([(item, DLX.PRIMARY) for item in items])
    for option, covered in options.items():
        unknown = [item for item in covered if item not in column_of]
        if unknown:
            raise ValueError(f"Option `{option}` covers unknown item `{unknown[0]}`")
        if covered:
            solver.appendRow([column_of[item] for item in covered], option)
    return solver


def exact_covers(
    items: Sequence[Hashable],
    options: Mapping[Hashable, Sequence[Hashable]],
) -> list[list[Hashable]]:
    """Return all exact covers, each sorted, in a deterministic order.

    Args:
        items: Items that must each be covered exactly once.
        options: Mapping from option key to the items it covers.
    """
    if not items:
        return [[]]
    solver = build_solver(items = items, options = options)
    # every node of a row carries the row name, so any node in a solution maps back to its option
    found = [sorted(solver.N[node] for node in solution) for solution in solver.solve()]
    found.sort()
    logger.debug("Exact cover over %d items found %d solutions", len(items), len(found))
    return found
