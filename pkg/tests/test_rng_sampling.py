import numpy as np
import pytest

from equicycle.errors import SamplingError
from equicycle.generators import complete_bipartite
from equicycle.rng import SeededRng
from equicycle.sampling import (
    BalancedPartition,
    BalancedSubset,
    PRandom,
    UniformOfSize,
    sample,
)


def test_same_seed_same_label_identical():
    a = SeededRng(7, "root").spawn("stage")
    b = SeededRng(7, "root").spawn("stage")
    assert [a.random() for _ in range(20)] == [b.random() for _ in range(20)]
    assert a.permutation(50) == b.permutation(50)


def test_labels_give_independent_streams():
    a = SeededRng(7, "root").spawn("stage-a")
    b = SeededRng(7, "root").spawn("stage-b")
    assert [a.random() for _ in range(8)] != [b.random() for _ in range(8)]


def test_uniform_subset_deterministic():
    r1 = sample(range(10), UniformOfSize(3), SeededRng(42, "s"))
    r2 = sample(range(10), UniformOfSize(3), SeededRng(42, "s"))
    assert r1 == r2 and len(r1) == 3


def test_balanced_partition_of_k44_sides():
    bg = complete_bipartite(4, 4)
    res = sample(range(8), BalancedPartition(2), SeededRng(1, "p"), sides=bg.side)
    assert len(res.parts) == 2 and not res.excluded
    for part in res.parts:
        assert sum(1 for v in part if v < 4) == 2


def test_balanced_partition_flooring_excludes_leftover():
    bg = complete_bipartite(5, 5)
    res = sample(range(10), BalancedPartition(2), SeededRng(1, "p"), sides=bg.side)
    assert all(len(p) == 4 for p in res.parts)
    assert len(res.excluded) == 2


def test_balanced_subset_odd_size_rejected():
    bg = complete_bipartite(4, 4)
    with pytest.raises(SamplingError):
        sample(range(8), BalancedSubset(3), SeededRng(0, "x"), sides=bg.side)
    with pytest.raises(SamplingError):
        sample(range(8), BalancedSubset(10), SeededRng(0, "x"), sides=bg.side)


def test_p_random_concentration():
    # |V| = 10^4, p = 0.3: size within 3000 +- 300 on >= 99% of 1000 seeds.
    # The binomial sd is ~46, so 300 is a 6.5-sigma corridor; this is a
    # regression tripwire for the mask implementation, not a close call.
    n, p = 10_000, 0.3
    hits = 0
    for seed in range(1000):
        size = int(SeededRng(seed, "mc").mask(n, p).sum())
        if 2700 <= size <= 3300:
            hits += 1
    assert hits >= 990


def test_mask_matches_uniforms_semantics():
    rng = SeededRng(3, "m")
    m = rng.mask(1000, 0.25)
    assert 150 < int(np.sum(m)) < 350
