import pytest

from sharpcsp.relations import Relation, is_affine


@pytest.fixture(scope="session")
def affine_pool():
    """All nonempty affine relations of arity 1..4, discovered by filtering."""
    pool = {}
    for arity in range(1, 5):
        pool[arity] = [
            Relation(arity, mask)
            for mask in range(1, 1 << (1 << arity))
            if is_affine(Relation(arity, mask))
        ]
    return pool
